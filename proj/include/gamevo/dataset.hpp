#pragma once

// Time-indexed tables, row views and the train/valid/test split.

#include "gamevo/calendar.hpp"
#include "gamevo/formula.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gamevo {

struct Column {
  Covariate covariate;        // name, kind, period / modalities
  std::vector<double> values; // categorical codes stored as exact integers
};

class TimeDataset {
public:
  TimeDataset() = default;
  TimeDataset(std::vector<std::int64_t> timestamps, int offset_seconds, std::vector<double> target);

  std::size_t rows() const { return timestamps_.size(); }
  std::int64_t step() const;
  int offset_seconds() const { return offset_; }
  const std::vector<std::int64_t> &timestamps() const { return timestamps_; }
  const std::vector<double> &target() const { return target_; }
  const std::vector<Column> &columns() const { return columns_; }

  const Column *find(const std::string &name) const;
  const Column &column(const std::string &name) const; // throws DataError

  // Columns must match the row count; categorical values must lie in {0..m}.
  void add_column(Covariate covariate, std::vector<double> values);
  void add_calendar(const CalendarOptions &options = {});
  // Adds <name>Max and <name>Min daily extrema of a numeric column.
  void add_daily_extrema(const std::string &name);

  CovariateRegistry registry() const;

private:
  std::vector<std::int64_t> timestamps_;
  int offset_ = 0;
  std::vector<double> target_;
  std::vector<Column> columns_;
};

using DatasetPtr = std::shared_ptr<const TimeDataset>;

// A subset of rows of a full frame, in increasing row order. Engineered
// features are always computed on the full frame and then gathered, so
// smoothing state carries across slice boundaries.
struct Slice {
  DatasetPtr data;
  std::vector<std::size_t> rows;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  std::vector<double> target() const;
  std::vector<double> gather(std::span<const double> full) const;
  std::int64_t timestamp(std::size_t i) const { return data->timestamps()[rows[i]]; }
};

Slice all_rows(DatasetPtr data);
// Rows whose local hour equals `hour`.
Slice filter_hour(const Slice &slice, int hour);

struct TimeWindow {
  std::int64_t start = 0; // inclusive
  std::int64_t end = 0;   // inclusive
};

struct SplitSpec {
  std::int64_t train_end = 0; // tau1, inclusive
  std::int64_t valid_end = 0; // tau2, inclusive
  std::vector<TimeWindow> exclusions;
};

struct Split {
  Slice train, valid, test;
};

// Throws DataError("empty partition ...") when train or valid ends up empty.
Split split(const Slice &slice, const SplitSpec &spec);

struct Schema {
  std::string timestamp_column = "timestamp";
  std::string target_column = "load";
  std::vector<Covariate> covariates;
  bool calendar = false;
  std::optional<std::string> holidays_path;
  std::optional<std::string> breaks_path;
  std::vector<std::string> daily_extrema; // numeric columns to summarize per day
};

Schema schema_from_json(const nlohmann::json &j);
nlohmann::json to_json(const Schema &schema);
Schema load_schema(const std::string &path);

TimeDataset load_csv(const std::string &path, const Schema &schema);
TimeDataset parse_csv(std::string_view text, const Schema &schema);
// Writes timestamp, target and every column.
void write_csv(const TimeDataset &data, std::ostream &out);

} // namespace gamevo
