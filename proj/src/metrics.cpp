#include "gamevo/metrics.hpp"

#include "gamevo/error.hpp"
#include "gamevo/kernels.hpp"

#include <cmath>
#include <limits>

namespace gamevo {

Metrics metrics(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) {
    throw DataError("metrics: length mismatch " + std::to_string(y.size()) + " vs " + std::to_string(yhat.size()));
  }
  if (y.empty()) throw DataError("metrics: empty series");
  Metrics m;
  m.n = y.size();
  m.rmse = std::sqrt(kernels::squared_distance(y, yhat) / static_cast<double>(y.size()));
  double ape = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) {
      ++m.zero_targets;
      continue;
    }
    ape += std::abs(y[i] - yhat[i]) / std::abs(y[i]);
    ++used;
  }
  m.mape = used ? 100.0 * ape / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
  return m;
}

std::vector<HourMetrics> per_hour(std::span<const int> hours, std::span<const double> y, std::span<const double> yhat) {
  if (hours.size() != y.size() || y.size() != yhat.size()) throw DataError("per_hour: length mismatch");
  std::vector<HourMetrics> out(24);
  for (int h = 0; h < 24; ++h) {
    out[h].hour = h;
    std::vector<double> a, b;
    for (std::size_t i = 0; i < hours.size(); ++i) {
      if (hours[i] == h) {
        a.push_back(y[i]);
        b.push_back(yhat[i]);
      }
    }
    if (!a.empty()) out[h].metrics = metrics(a, b);
  }
  return out;
}

double pooled_rmse(const std::vector<HourMetrics> &hours) {
  double num = 0.0;
  std::size_t n = 0;
  for (const auto &h : hours) {
    num += static_cast<double>(h.metrics.n) * h.metrics.rmse * h.metrics.rmse;
    n += h.metrics.n;
  }
  if (n == 0) throw DataError("pooled_rmse: no rows");
  return std::sqrt(num / static_cast<double>(n));
}

} // namespace gamevo
