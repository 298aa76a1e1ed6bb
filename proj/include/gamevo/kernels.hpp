#pragma once

// Data-parallel arithmetic kernels used by the fitting and scoring paths.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The active table is chosen once at first use from the
// CPU feature flags; GAMEVO_SIMD=scalar|avx2 overrides the choice.

#include <cstddef>
#include <span>
#include <string_view>

namespace gamevo::kernels {

struct KernelTable {
  std::string_view name;
  double (*dot)(const double *a, const double *b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double *x, double *y, std::size_t n);
  // sum_i (a_i - b_i)^2
  double (*squared_distance)(const double *a, const double *b, std::size_t n);
  // out_i = a_i * b_i
  void (*hadamard)(const double *a, const double *b, double *out, std::size_t n);
  // out = X^T X for a column-major n x p matrix; out is column-major p x p.
  void (*gram)(const double *x, std::size_t n, std::size_t p, double *out);
  // out = X beta for a column-major n x p matrix.
  void (*gemv)(const double *x, std::size_t n, std::size_t p, const double *beta, double *out);
  // out = X^T v for a column-major n x p matrix.
  void (*gemv_t)(const double *x, std::size_t n, std::size_t p, const double *v, double *out);
};

const KernelTable &scalar_table();

// Null when the build or the running CPU lacks AVX2+FMA.
const KernelTable *avx2_table();

const KernelTable &active();

// Convenience wrappers over the active table.
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out);

} // namespace gamevo::kernels
