#pragma once

#include "gamevo/dataset.hpp"
#include "gamevo/rng.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

namespace gamevo::fixtures {

inline std::vector<std::int64_t> daily(std::size_t n, std::int64_t start = 1483228800) {
  std::vector<std::int64_t> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = start + static_cast<std::int64_t>(i) * 86400;
  return ts;
}

inline std::vector<double> uniform_values(std::size_t n, Rng &rng, double lo = 0.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto &x : v) x = lo + (hi - lo) * uniform01(rng);
  return v;
}

inline std::vector<std::size_t> iota(std::size_t a, std::size_t b) {
  std::vector<std::size_t> out;
  for (std::size_t i = a; i < b; ++i) out.push_back(i);
  return out;
}

// y = sin(2 pi x) + N(0, sigma^2) with x uniform on [0, 1].
struct SinBench {
  DatasetPtr data;
  Slice train, valid;
};

inline SinBench sin_bench(std::size_t n_train, std::size_t n_valid, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  const std::size_t n = n_train + n_valid;
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = uniform01(rng);
    y[i] = std::sin(2.0 * std::numbers::pi * x[i]) + noise(rng);
  }
  auto d = std::make_shared<TimeDataset>(daily(n), 0, y);
  d->add_column(Covariate::numeric("x"), x);
  SinBench b;
  b.data = d;
  b.train = Slice{d, iota(0, n_train)};
  b.valid = Slice{d, iota(n_train, n)};
  return b;
}

} // namespace gamevo::fixtures
