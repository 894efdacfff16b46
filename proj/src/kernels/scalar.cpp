#include "lcurve/kernels.hpp"

namespace lcurve::kernels::scalar {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void sgd_pair_update(double* u, double* v, std::size_t n, double err, double lr, double reg) {
  for (std::size_t i = 0; i < n; ++i) {
    const double uf = u[i];
    const double vf = v[i];
    u[i] += lr * (err * vf - reg * uf);
    v[i] += lr * (err * uf - reg * vf);
  }
}

}  // namespace

const Table table{&dot, &sum_squares, &axpy, &sgd_pair_update};

}  // namespace lcurve::kernels::scalar
