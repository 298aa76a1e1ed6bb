#pragma once

// Operational weekly replay: at each update instant the filter consumes the
// newly released batch of observations, then forecasts the coming horizon with
// frozen weights.

#include "gamevo/adapt.hpp"
#include "gamevo/metrics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gamevo {

struct ReplaySpec {
  int update_weekday = 1; // ISO, Monday = 1
  int update_hour = 8;
  int update_minute = 0;
  std::int64_t batch_lookback = 9 * 86400 + 8 * 3600; // batch start = U - lookback
  std::int64_t release_lag = 2 * 86400 + 8 * 3600;    // batch end (exclusive) = U - lag
  std::int64_t horizon = 7 * 86400;
  // First update consumes every row released before it, not only its batch.
  bool consume_history = false;
  // Earliest update instant considered; defaults to the first row.
  std::optional<std::int64_t> forecast_start;
};

struct ReplayWeek {
  std::int64_t update = 0;
  std::size_t consumed = 0; // observations consumed at this update
  std::size_t first = 0;    // position in the forecast table
  std::size_t count = 0;
};

struct ReplayResult {
  std::vector<std::size_t> positions; // slice positions of forecast rows
  std::vector<std::int64_t> timestamps;
  std::vector<double> actual;
  std::vector<double> forecast;
  Eigen::MatrixXd theta; // weights used for each forecast row
  std::vector<ReplayWeek> weeks;
  std::vector<Metrics> weekly;
  std::vector<HourMetrics> hourly;
  std::optional<Metrics> overall;
  std::vector<std::string> notices;
};

// `on_consume(update, position)` is invoked for each observation fed to the
// filter, in order.
ReplayResult weekly_replay(const FittedGam &fitted, const std::optional<std::vector<double>> &q_diag,
                           const Slice &rows, const ReplaySpec &spec = {},
                           const std::function<void(std::int64_t, std::size_t)> &on_consume = {});

// timestamp,actual,forecast,theta_1..theta_K
void write_forecast_csv(const ReplayResult &result, int offset_seconds, std::ostream &out);

} // namespace gamevo
