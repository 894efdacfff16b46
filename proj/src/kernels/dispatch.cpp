#include <atomic>
#include <cassert>
#include <stdexcept>
#include <string>

#include "lcurve/kernels.hpp"

namespace lcurve::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(LCURVE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const Table*> g_table{nullptr};
std::atomic<Isa> g_isa{Isa::scalar};

const Table& current() {
  const Table* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    select(detect());
    t = g_table.load(std::memory_order_acquire);
  }
  return *t;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

std::optional<Isa> parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  return std::nullopt;
}

const Table* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar: return &scalar::table;
    case Isa::avx2:
#if defined(LCURVE_HAVE_AVX2)
      return avx2::table_or_null();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool available(Isa isa) {
  if (isa == Isa::scalar) return true;
  return table_for(isa) != nullptr && cpu_has_avx2();
}

Isa detect() { return available(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

Isa active() {
  (void)current();
  return g_isa.load(std::memory_order_acquire);
}

void select(Isa isa) {
  if (!available(isa)) {
    throw std::invalid_argument("kernel variant '" + std::string(to_string(isa)) +
                                "' is not available on this build/CPU");
  }
  g_isa.store(isa, std::memory_order_release);
  g_table.store(table_for(isa), std::memory_order_release);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return current().dot(a.data(), b.data(), a.size());
}

double sum_squares(std::span<const double> a) { return current().sum_squares(a.data(), a.size()); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  current().axpy(alpha, x.data(), y.data(), x.size());
}

void sgd_pair_update(std::span<double> u, std::span<double> v, double err, double lr, double reg) {
  assert(u.size() == v.size());
  current().sgd_pair_update(u.data(), v.data(), u.size(), err, lr, reg);
}

}  // namespace lcurve::kernels
