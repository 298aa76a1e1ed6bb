#include "gamevo/kernels.hpp"
#include "gamevo/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace gamevo;

namespace {

std::vector<double> random_vector(std::size_t n, Rng &rng) {
  std::vector<double> v(n);
  for (auto &x : v) x = 2.0 * uniform01(rng) - 1.0;
  return v;
}

double tol(double scale, std::size_t n) { return 1e-14 * scale * static_cast<double>(n + 1); }

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {
protected:
  void SetUp() override {
    if (!kernels::avx2_table()) GTEST_SKIP() << "AVX2 unavailable";
  }
};

} // namespace

TEST_P(KernelEquivalence, DotMatchesScalar) {
  Rng rng(GetParam());
  const std::size_t n = GetParam();
  auto a = random_vector(n, rng), b = random_vector(n, rng);
  const auto &s = kernels::scalar_table();
  const auto *v = kernels::avx2_table();
  EXPECT_NEAR(s.dot(a.data(), b.data(), n), v->dot(a.data(), b.data(), n), tol(1.0, n));
  EXPECT_NEAR(s.squared_distance(a.data(), b.data(), n), v->squared_distance(a.data(), b.data(), n), tol(4.0, n));
}

TEST_P(KernelEquivalence, ElementwiseKernelsAreExact) {
  Rng rng(GetParam() + 100);
  const std::size_t n = GetParam();
  auto a = random_vector(n, rng), b = random_vector(n, rng);
  std::vector<double> h1(n), h2(n), y1 = b, y2 = b;
  kernels::scalar_table().hadamard(a.data(), b.data(), h1.data(), n);
  kernels::avx2_table()->hadamard(a.data(), b.data(), h2.data(), n);
  EXPECT_EQ(h1, h2);
  kernels::scalar_table().axpy(0.37, a.data(), y1.data(), n);
  kernels::avx2_table()->axpy(0.37, a.data(), y2.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-15);
}

TEST_P(KernelEquivalence, MatrixKernelsMatchScalar) {
  Rng rng(GetParam() + 7);
  const std::size_t n = GetParam() + 1, p = 1 + GetParam() % 9;
  auto x = random_vector(n * p, rng), beta = random_vector(p, rng), v = random_vector(n, rng);
  std::vector<double> g1(p * p), g2(p * p), o1(n), o2(n), t1(p), t2(p);
  const auto &s = kernels::scalar_table();
  const auto *a = kernels::avx2_table();
  s.gram(x.data(), n, p, g1.data());
  a->gram(x.data(), n, p, g2.data());
  s.gemv(x.data(), n, p, beta.data(), o1.data());
  a->gemv(x.data(), n, p, beta.data(), o2.data());
  s.gemv_t(x.data(), n, p, v.data(), t1.data());
  a->gemv_t(x.data(), n, p, v.data(), t2.data());
  for (std::size_t i = 0; i < p * p; ++i) EXPECT_NEAR(g1[i], g2[i], tol(1.0, n));
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(o1[i], o2[i], tol(1.0, p));
  for (std::size_t i = 0; i < p; ++i) EXPECT_NEAR(t1[i], t2[i], tol(1.0, n));
}

INSTANTIATE_TEST_SUITE_P(Lengths, KernelEquivalence,
                         ::testing::Values(0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 67, 255, 1000));

TEST(Kernels, GramIsSymmetric) {
  Rng rng(3);
  const std::size_t n = 50, p = 6;
  auto x = random_vector(n * p, rng);
  std::vector<double> g(p * p);
  kernels::active().gram(x.data(), n, p, g.data());
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) EXPECT_EQ(g[i * p + j], g[j * p + i]);
  }
}

TEST(Kernels, ActiveTableHasAName) {
  const auto name = kernels::active().name;
  EXPECT_TRUE(name == "scalar" || name == "avx2");
}

TEST(Kernels, WrappersUseSpans) {
  std::vector<double> a{1, 2, 3}, b{4, 5, 6}, out(3);
  EXPECT_DOUBLE_EQ(kernels::dot(a, b), 32.0);
  EXPECT_DOUBLE_EQ(kernels::squared_distance(a, b), 27.0);
  kernels::hadamard(a, b, out);
  EXPECT_EQ(out, (std::vector<double>{4, 10, 18}));
  kernels::axpy(2.0, a, out);
  EXPECT_EQ(out, (std::vector<double>{6, 14, 24}));
}
