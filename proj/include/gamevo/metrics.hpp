#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gamevo {

struct Metrics {
  double rmse = 0.0;
  double mape = 0.0; // percent, over non-zero targets
  std::size_t n = 0;
  std::size_t zero_targets = 0;
};

// Throws DataError on length mismatch or empty input.
Metrics metrics(std::span<const double> y, std::span<const double> yhat);

struct HourMetrics {
  int hour = 0;
  Metrics metrics;
};

// One entry per hour 0..23; hours without rows have n = 0.
std::vector<HourMetrics> per_hour(std::span<const int> hours, std::span<const double> y, std::span<const double> yhat);

// sqrt of the row-weighted mean of per-hour squared RMSE.
double pooled_rmse(const std::vector<HourMetrics> &hours);

} // namespace gamevo
