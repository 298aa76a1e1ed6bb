#include "gamevo/calendar.hpp"
#include "gamevo/dataset.hpp"
#include "gamevo/dsl.hpp"
#include "gamevo/error.hpp"
#include "gamevo/metrics.hpp"
#include "gamevo/replay.hpp"
#include "gamevo/synth.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace gamevo;

namespace {

std::int64_t at(const char *iso) { return parse_iso8601(iso).utc_seconds; }

Schema simple_schema() {
  Schema s;
  s.covariates = {Covariate::numeric("Temp"), Covariate::categorical("Day", 7)};
  return s;
}

// Hourly frame with Temp, calendar columns and a deterministic target.
DatasetPtr hourly(std::int64_t start, std::size_t n) {
  std::vector<std::int64_t> ts(n);
  std::vector<double> y(n), temp(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = start + static_cast<std::int64_t>(i) * 3600;
    temp[i] = 10.0 + 5.0 * std::sin(static_cast<double>(i) / 24.0);
    y[i] = 100.0 + 2.0 * temp[i] + std::cos(static_cast<double>(i));
  }
  auto d = std::make_shared<TimeDataset>(ts, 0, y);
  d->add_column(Covariate::numeric("Temp"), temp);
  d->add_calendar();
  return d;
}

} // namespace

TEST(Calendar, PositionInYear) {
  EXPECT_DOUBLE_EQ(position_in_year(at("2019-01-01T00:00:00Z"), 0), 0.0);
  EXPECT_DOUBLE_EQ(position_in_year(at("2019-12-31T23:59:00Z"), 0), 1.0);
  const double jan1 = static_cast<double>(at("2019-01-01T00:00:00Z"));
  const double ratio = (static_cast<double>(at("2019-07-02T12:00:00Z")) - jan1) /
                       (static_cast<double>(at("2019-12-31T23:59:00Z")) - jan1);
  EXPECT_NEAR(position_in_year(at("2019-07-02T12:00:00Z"), 0), ratio, 1e-15);
  EXPECT_NEAR(ratio, 0.5, 1e-3);
  EXPECT_DOUBLE_EQ(position_in_year(at("2020-01-01T00:00:00+01:00"), 3600), 0.0);
}

TEST(Calendar, Iso8601) {
  const auto p = parse_iso8601("2021-03-28T02:30:00+02:00");
  EXPECT_EQ(p.offset_seconds, 7200);
  EXPECT_EQ(format_iso8601(p.utc_seconds, p.offset_seconds), "2021-03-28T02:30:00+02:00");
  EXPECT_EQ(at("1970-01-01T00:00:00Z"), 0);
  EXPECT_THROW(parse_iso8601("2021-13-01T00:00:00Z"), DataError);
  EXPECT_THROW(parse_iso8601("yesterday"), DataError);
}

TEST(Calendar, DerivedColumns) {
  const std::vector<std::int64_t> ts{at("2024-01-06T23:00:00Z"), at("2024-01-07T00:00:00Z"), at("2024-01-08T01:00:00Z")};
  EXPECT_THROW(derive_calendar(ts, 0), DataError);
  const std::vector<std::int64_t> even{at("2024-01-06T23:00:00Z"), at("2024-01-07T23:00:00Z"), at("2024-01-08T23:00:00Z")};
  const auto cols = derive_calendar(even, 0);
  ASSERT_EQ(cols.size(), 5u);
  EXPECT_EQ(cols[0].name, "Hour");
  EXPECT_EQ(cols[0].values[0], 23.0);
  EXPECT_EQ(cols[1].values, (std::vector<double>{6, 7, 1}));
  EXPECT_EQ(cols[4].values, (std::vector<double>{2, 2, 1}));
}

TEST(Calendar, BreaksAndHolidays) {
  const DateCalendar holidays = parse_date_calendar("date,label\n2024-01-01,new-year\n");
  const DateCalendar breaks = parse_date_calendar("date,label\n2024-01-02,christmas\n2024-01-03,storm\n");
  CalendarOptions o;
  o.holidays = &holidays;
  o.breaks = &breaks;
  std::vector<std::int64_t> ts;
  for (int d = 0; d < 4; ++d) ts.push_back(at("2024-01-01T12:00:00Z") + d * 86400);
  const auto cols = derive_calendar(ts, 0, o);
  ASSERT_EQ(cols.size(), 7u);
  EXPECT_EQ(cols[5].values, (std::vector<double>{2, 1, 1, 1}));
  EXPECT_EQ(cols[6].modalities, 6);
  EXPECT_EQ(cols[6].values, (std::vector<double>{0, 4, 6, 0}));
  EXPECT_THROW(parse_date_calendar("date,label\nnot-a-date,x\n"), DataError);
}

TEST(Csv, ParsesAndReportsPositions) {
  const std::string good = "timestamp,load,Temp,Day\n2024-01-01T00:00:00Z,10,1.5,1\n2024-01-01T01:00:00Z,11,2.5,1\n";
  const TimeDataset d = parse_csv(good, simple_schema());
  EXPECT_EQ(d.rows(), 2u);
  EXPECT_EQ(d.step(), 3600);
  EXPECT_EQ(d.column("Temp").values, (std::vector<double>{1.5, 2.5}));
  std::ostringstream out;
  write_csv(d, out);
  EXPECT_EQ(parse_csv(out.str(), simple_schema()).target(), d.target());

  auto message = [](const std::string &text) {
    try {
      parse_csv(text, simple_schema());
    } catch (const DataError &e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message("timestamp,load,Temp,Day\n2024-01-01T00:00:00Z,10,x,1\n").find("row 2, column Temp"), std::string::npos);
  EXPECT_NE(message("timestamp,load,Temp,Day\n2024-01-01T00:00:00Z,10,1,9\n").find("outside 0..7"), std::string::npos);
  EXPECT_NE(message("timestamp,load,Day\n2024-01-01T00:00:00Z,10,1\n").find("missing column Temp"), std::string::npos);
  EXPECT_NE(message("timestamp,load,Temp,Day\n2024-01-01T00:00:00Z,10,1,1\n2024-01-01T00:00:00Z,10,1,1\n")
                .find("duplicated timestamp"),
            std::string::npos);
  EXPECT_NE(message("timestamp,load,Temp,Day\n2024-01-01T00:00:00Z,10,1,1\n2024-01-01T03:00:00Z,10,1,1\n"
                    "2024-01-01T04:00:00Z,10,1,1\n")
                .find("gap"),
            std::string::npos);
}

TEST(Schema, JsonRoundTrip) {
  Schema s = simple_schema();
  s.calendar = true;
  s.daily_extrema = {"Temp"};
  const Schema back = schema_from_json(to_json(s));
  EXPECT_EQ(back.covariates, s.covariates);
  EXPECT_TRUE(back.calendar);
  EXPECT_EQ(back.daily_extrema, s.daily_extrema);
}

TEST(Split, PartitionsByTime) {
  const auto d = hourly(at("2024-01-01T00:00:00Z"), 48);
  SplitSpec spec{at("2024-01-01T11:00:00Z"), at("2024-01-01T23:00:00Z"), {{at("2024-01-01T02:00:00Z"), at("2024-01-01T03:00:00Z")}}};
  const Split s = split(all_rows(d), spec);
  EXPECT_EQ(s.train.size(), 10u);
  EXPECT_EQ(s.valid.size(), 12u);
  EXPECT_EQ(s.test.size(), 24u);
  spec.valid_end = spec.train_end;
  EXPECT_THROW(split(all_rows(d), spec), DataError);
  const SplitSpec late{at("2023-01-01T00:00:00Z"), at("2023-06-01T00:00:00Z"), {}};
  try {
    split(all_rows(d), late);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_STREQ(e.what(), "empty partition: train");
  }
  const Slice h5 = filter_hour(all_rows(d), 5);
  EXPECT_EQ(h5.rows, (std::vector<std::size_t>{5, 29}));
}

TEST(Metrics, HandExample) {
  const std::vector<double> y{100, 100}, yhat{90, 110};
  const Metrics m = metrics(y, yhat);
  EXPECT_DOUBLE_EQ(m.rmse, 10.0);
  EXPECT_DOUBLE_EQ(m.mape, 10.0);
  EXPECT_THROW(metrics(y, std::vector<double>{1.0}), DataError);
  EXPECT_THROW(metrics(std::vector<double>{}, std::vector<double>{}), DataError);
  const Metrics z = metrics(std::vector<double>{0.0, 2.0}, std::vector<double>{1.0, 1.0});
  EXPECT_EQ(z.zero_targets, 1u);
  EXPECT_DOUBLE_EQ(z.mape, 50.0);
}

TEST(Metrics, PooledRmseAggregatesHours) {
  Rng rng(2);
  std::vector<int> hours;
  std::vector<double> y, yhat;
  for (int i = 0; i < 1000; ++i) {
    hours.push_back(static_cast<int>(uniform_index(rng, 24)));
    y.push_back(uniform01(rng));
    yhat.push_back(uniform01(rng));
  }
  const auto per = per_hour(hours, y, yhat);
  ASSERT_EQ(per.size(), 24u);
  EXPECT_NEAR(pooled_rmse(per), metrics(y, yhat).rmse, 1e-12);
}

TEST(Replay, FirstUpdateConsumesTheDelayedBatch) {
  // 2024-01-01 is a Monday.
  const auto d = hourly(at("2023-12-18T00:00:00Z"), 24 * 7 * 5);
  const Slice all = all_rows(d);
  const FittedGam g = fit(parse_formula("s(Temp, bs=cr, k=6)"), all);
  ReplaySpec spec;
  spec.forecast_start = at("2024-01-01T00:00:00Z");
  std::vector<std::pair<std::int64_t, std::size_t>> consumed;
  const auto r = weekly_replay(g, std::vector<double>{1e-3}, all, spec,
                               [&](std::int64_t u, std::size_t pos) { consumed.emplace_back(u, pos); });
  ASSERT_FALSE(r.weeks.empty());
  const std::int64_t u = at("2024-01-01T08:00:00Z");
  EXPECT_EQ(r.weeks[0].update, u);
  std::vector<std::int64_t> first;
  for (const auto &[upd, pos] : consumed) {
    if (upd == u) first.push_back(all.timestamp(pos));
  }
  ASSERT_EQ(first.size(), 7u * 24u);
  EXPECT_EQ(first.front(), at("2023-12-23T00:00:00Z"));
  EXPECT_EQ(first.back(), at("2023-12-29T23:00:00Z"));
  for (std::size_t i = 1; i < consumed.size(); ++i) EXPECT_LT(consumed[i - 1].second, consumed[i].second);
  for (const auto &[upd, pos] : consumed) EXPECT_LT(all.timestamp(pos), upd - 2 * 86400 - 8 * 3600 + 1);
}

TEST(Replay, ForecastsUseOnlyReleasedData) {
  const auto d = hourly(at("2024-01-01T00:00:00Z"), 24 * 7 * 4);
  const Slice all = all_rows(d);
  const FittedGam g = fit(parse_formula("s(Temp, bs=cr, k=6)"), all);
  const auto r = weekly_replay(g, std::vector<double>{1e-3}, all);
  for (const auto &w : r.weeks) {
    for (std::size_t i = w.first; i < w.first + w.count; ++i) {
      EXPECT_GE(r.timestamps[i], w.update);
      EXPECT_LT(r.timestamps[i], w.update + 7 * 86400);
      if (i > w.first) {
        EXPECT_EQ(r.theta.row(static_cast<Eigen::Index>(i)), r.theta.row(static_cast<Eigen::Index>(w.first)));
      }
    }
  }
}

TEST(Replay, PartialFinalWeekIsDropped) {
  const auto d = hourly(at("2024-01-01T00:00:00Z"), 24 * 7 * 3 + 30);
  const Slice all = all_rows(d);
  const FittedGam g = fit(parse_formula("s(Temp, bs=cr, k=6)"), all);
  const auto r = weekly_replay(g, std::nullopt, all);
  ASSERT_FALSE(r.notices.empty());
  EXPECT_NE(r.notices.back().find("dropped partial final week"), std::string::npos);
  const auto fixed = predict_fixed(g, all);
  for (std::size_t i = 0; i < r.forecast.size(); ++i) EXPECT_EQ(r.forecast[i], fixed.values[r.positions[i]]);
  std::ostringstream out;
  write_forecast_csv(r, 0, out);
  EXPECT_EQ(out.str().substr(0, 34), "timestamp,actual,forecast,theta_1\n");
}
