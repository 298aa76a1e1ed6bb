#include "gamevo/kernels.hpp"

namespace gamevo::kernels {
namespace {

double dot_scalar(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += a[i] * b[i];
  }
  return s;
}

void axpy_scalar(double alpha, const double *x, double *y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

double squared_distance_scalar(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void hadamard_scalar(const double *a, const double *b, double *out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a[i] * b[i];
  }
}

void gram_scalar(const double *x, std::size_t n, std::size_t p, double *out) {
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 0; k <= j; ++k) {
      const double v = dot_scalar(x + j * n, x + k * n, n);
      out[j * p + k] = v;
      out[k * p + j] = v;
    }
  }
}

void gemv_scalar(const double *x, std::size_t n, std::size_t p, const double *beta, double *out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = 0.0;
  }
  for (std::size_t j = 0; j < p; ++j) {
    axpy_scalar(beta[j], x + j * n, out, n);
  }
}

void gemv_t_scalar(const double *x, std::size_t n, std::size_t p, const double *v, double *out) {
  for (std::size_t j = 0; j < p; ++j) {
    out[j] = dot_scalar(x + j * n, v, n);
  }
}

} // namespace

const KernelTable &scalar_table() {
  static const KernelTable table{
      "scalar",          dot_scalar,  axpy_scalar, squared_distance_scalar,
      hadamard_scalar,   gram_scalar, gemv_scalar, gemv_t_scalar,
  };
  return table;
}

} // namespace gamevo::kernels
