#pragma once

// Inner-loop arithmetic shared by the conditioning and factorization code.
//
// Every kernel has a portable scalar reference in `kernels::scalar` and, on
// x86-64 builds, an AVX2/FMA variant in `kernels::avx2`. The free functions in
// `kernels` forward to whichever table is active; the table is chosen once
// from CPUID and can be pinned (tests, reproducibility runs) with select().

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace lcurve::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

/// True when the variant was compiled in and the running CPU supports it.
bool available(Isa isa);

/// Best available variant on this machine.
Isa detect();

/// Currently active variant.
Isa active();

/// Pin the active variant. Throws std::invalid_argument when unavailable.
/// Not synchronized with concurrent kernel calls; call before spawning work.
void select(Isa isa);

/// sum_i a[i] * b[i]. Spans must have equal length.
double dot(std::span<const double> a, std::span<const double> b);

/// sum_i a[i]^2
double sum_squares(std::span<const double> a);

/// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Coupled regularized SGD step on a pair of factor vectors:
///   u' = u + lr * (err * v - reg * u)
///   v' = v + lr * (err * u - reg * v)
/// where both right-hand sides read the pre-update values.
void sgd_pair_update(std::span<double> u, std::span<double> v, double err, double lr, double reg);

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum_squares)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*sgd_pair_update)(double*, double*, std::size_t, double, double, double);
};

namespace scalar {
extern const Table table;
}

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
// Defined only when the build enables AVX2; check available(Isa::avx2) first.
const Table* table_or_null();
}
#endif

/// Kernel table for a given variant (nullptr when not compiled in).
const Table* table_for(Isa isa);

}  // namespace lcurve::kernels
