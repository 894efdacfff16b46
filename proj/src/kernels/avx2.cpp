// Compiled with -mavx2 -mfma. Nothing here may run before the dispatcher has
// confirmed CPU support.
#include <immintrin.h>

#include "lcurve/kernels.hpp"

namespace lcurve::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, std::size_t n) { return dot(a, a, n); }

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void sgd_pair_update(double* u, double* v, std::size_t n, double err, double lr, double reg) {
  const __m256d verr = _mm256_set1_pd(err);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d vreg = _mm256_set1_pd(reg);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d uf = _mm256_loadu_pd(u + i);
    const __m256d vf = _mm256_loadu_pd(v + i);
    // err * other - reg * self
    const __m256d gu = _mm256_fmsub_pd(verr, vf, _mm256_mul_pd(vreg, uf));
    const __m256d gv = _mm256_fmsub_pd(verr, uf, _mm256_mul_pd(vreg, vf));
    _mm256_storeu_pd(u + i, _mm256_fmadd_pd(vlr, gu, uf));
    _mm256_storeu_pd(v + i, _mm256_fmadd_pd(vlr, gv, vf));
  }
  for (; i < n; ++i) {
    const double uf = u[i];
    const double vf = v[i];
    u[i] += lr * (err * vf - reg * uf);
    v[i] += lr * (err * uf - reg * vf);
  }
}

const Table table{&dot, &sum_squares, &axpy, &sgd_pair_update};

}  // namespace

const Table* table_or_null() { return &table; }

}  // namespace lcurve::kernels::avx2
