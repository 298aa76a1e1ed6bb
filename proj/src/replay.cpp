#include "gamevo/replay.hpp"

#include "gamevo/calendar.hpp"
#include "gamevo/error.hpp"
#include "gamevo/text.hpp"

#include <cstdint>
#include <limits>

namespace gamevo {
namespace {

std::int64_t first_update(std::int64_t from, int offset, const ReplaySpec &spec) {
  const std::int64_t day0 = local_day_number(from, offset);
  for (std::int64_t d = day0; d < day0 + 8; ++d) {
    const CivilTime c = to_civil(d * 86400 - offset, offset);
    if (c.weekday != spec.update_weekday) continue;
    const std::int64_t u = from_civil(c.year, c.month, c.day, spec.update_hour, spec.update_minute, 0, offset);
    if (u >= from) return u;
  }
  // Same weekday as `from` but earlier in the day: next week.
  const CivilTime c = to_civil((day0 + 7) * 86400 - offset, offset);
  return from_civil(c.year, c.month, c.day, spec.update_hour, spec.update_minute, 0, offset);
}

} // namespace

ReplayResult weekly_replay(const FittedGam &fitted, const std::optional<std::vector<double>> &q_diag,
                           const Slice &rows, const ReplaySpec &spec,
                           const std::function<void(std::int64_t, std::size_t)> &on_consume) {
  if (spec.horizon <= 0) throw DataError("replay horizon must be positive");
  if (rows.empty()) throw DataError("replay on empty data");
  ReplayResult out;
  const Prediction fixed = predict_fixed(fitted, rows);
  const std::vector<double> y = rows.target();
  const auto k = static_cast<Eigen::Index>(fitted.formula.effects.size());
  const std::vector<double> zeros(static_cast<std::size_t>(k), 0.0);
  KalmanState state = KalmanState::initial(q_diag ? std::span<const double>(*q_diag) : std::span<const double>(zeros));
  const int offset = rows.data->offset_seconds();
  const std::int64_t last = rows.timestamp(rows.size() - 1);
  const std::int64_t step = rows.data->step();
  const std::int64_t start = spec.forecast_start.value_or(rows.timestamp(0));

  std::vector<double> f(static_cast<std::size_t>(k));
  auto load_f = [&](std::size_t i) {
    for (Eigen::Index j = 0; j < k; ++j) f[j] = fixed.contributions(static_cast<Eigen::Index>(i), j);
  };
  std::size_t cursor = 0; // next unconsumed position
  std::vector<std::vector<double>> theta_rows;
  bool first = true;
  for (std::int64_t u = first_update(start, offset, spec);; u += 7 * 86400) {
    if (u + spec.horizon - step > last) {
      if (u <= last) {
        out.notices.push_back("dropped partial final week starting " + format_iso8601(u, offset));
      }
      break;
    }
    ReplayWeek week;
    week.update = u;
    const std::int64_t batch_start = (first && spec.consume_history) ? std::numeric_limits<std::int64_t>::min() : u - spec.batch_lookback;
    const std::int64_t batch_end = u - spec.release_lag;
    while (cursor < rows.size() && rows.timestamp(cursor) < batch_end) {
      if (rows.timestamp(cursor) >= batch_start) {
        if (on_consume) on_consume(u, cursor);
        if (q_diag) {
          load_f(cursor);
          kalman_update(state, f, y[cursor] - fitted.intercept());
        }
        ++week.consumed;
      }
      ++cursor;
    }
    first = false;
    week.first = out.forecast.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::int64_t t = rows.timestamp(i);
      if (t < u || t >= u + spec.horizon) continue;
      double yhat = fixed.values[i];
      if (q_diag) {
        load_f(i);
        yhat = fitted.intercept() + kalman_predict(state, f);
      }
      out.positions.push_back(i);
      out.timestamps.push_back(t);
      out.actual.push_back(y[i]);
      out.forecast.push_back(yhat);
      theta_rows.emplace_back(state.theta.data(), state.theta.data() + k);
    }
    week.count = out.forecast.size() - week.first;
    out.weeks.push_back(week);
    if (week.count > 0) {
      out.weekly.push_back(metrics(std::span<const double>(out.actual).subspan(week.first, week.count),
                                   std::span<const double>(out.forecast).subspan(week.first, week.count)));
    } else {
      out.weekly.push_back(Metrics{});
    }
  }
  out.theta.resize(static_cast<Eigen::Index>(theta_rows.size()), k);
  for (std::size_t i = 0; i < theta_rows.size(); ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out.theta(static_cast<Eigen::Index>(i), j) = theta_rows[i][j];
  }
  if (out.weeks.empty()) out.notices.push_back("no complete replay week in the data");
  if (!out.forecast.empty()) {
    out.overall = metrics(out.actual, out.forecast);
    std::vector<int> hours;
    for (auto t : out.timestamps) hours.push_back(to_civil(t, offset).hour);
    out.hourly = per_hour(hours, out.actual, out.forecast);
  }
  return out;
}

void write_forecast_csv(const ReplayResult &result, int offset_seconds, std::ostream &out) {
  out << "timestamp,actual,forecast";
  for (Eigen::Index k = 0; k < result.theta.cols(); ++k) out << ",theta_" << (k + 1);
  out << '\n';
  for (std::size_t i = 0; i < result.forecast.size(); ++i) {
    out << format_iso8601(result.timestamps[i], offset_seconds) << ',' << format_double(result.actual[i]) << ','
        << format_double(result.forecast[i]);
    for (Eigen::Index k = 0; k < result.theta.cols(); ++k) {
      out << ',' << format_double(result.theta(static_cast<Eigen::Index>(i), k));
    }
    out << '\n';
  }
}

} // namespace gamevo
