#include "gamevo/kernels.hpp"

#include <cassert>
#include <cstdlib>
#include <string>

namespace gamevo::kernels {

#if defined(GAMEVO_HAVE_AVX2)
const KernelTable &avx2_kernels();
#endif

const KernelTable *avx2_table() {
#if defined(GAMEVO_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable &select_table() {
  const char *env = std::getenv("GAMEVO_SIMD");
  const std::string want = env ? env : "";
  if (want == "scalar") {
    return scalar_table();
  }
  if (const KernelTable *t = avx2_table()) {
    return *t;
  }
  return scalar_table();
}

} // namespace

const KernelTable &active() {
  static const KernelTable &table = select_table();
  return table;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().squared_distance(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  assert(a.size() == b.size() && a.size() == out.size());
  active().hadamard(a.data(), b.data(), out.data(), a.size());
}

} // namespace gamevo::kernels
