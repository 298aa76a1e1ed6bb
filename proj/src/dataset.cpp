#include "gamevo/dataset.hpp"

#include "gamevo/dsl.hpp"
#include "gamevo/error.hpp"
#include "gamevo/text.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gamevo {

TimeDataset::TimeDataset(std::vector<std::int64_t> timestamps, int offset_seconds, std::vector<double> target)
    : timestamps_(std::move(timestamps)), offset_(offset_seconds), target_(std::move(target)) {
  if (timestamps_.size() != target_.size()) {
    throw DataError("target length " + std::to_string(target_.size()) + " differs from " +
                    std::to_string(timestamps_.size()) + " timestamps");
  }
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    if (timestamps_[i] == timestamps_[i - 1]) {
      throw DataError("duplicated timestamp " + format_iso8601(timestamps_[i], offset_));
    }
    if (timestamps_[i] < timestamps_[i - 1]) {
      throw DataError("timestamps not increasing at " + format_iso8601(timestamps_[i], offset_));
    }
    if (timestamps_[i] - timestamps_[i - 1] != timestamps_[1] - timestamps_[0]) {
      throw DataError("timestamp gap before " + format_iso8601(timestamps_[i], offset_));
    }
  }
  for (std::size_t i = 0; i < target_.size(); ++i) {
    if (!std::isfinite(target_[i])) {
      throw DataError("non-finite target at " + format_iso8601(timestamps_[i], offset_));
    }
  }
}

std::int64_t TimeDataset::step() const { return timestamps_.size() >= 2 ? timestamps_[1] - timestamps_[0] : 0; }

const Column *TimeDataset::find(const std::string &name) const {
  for (const auto &c : columns_) {
    if (c.covariate.name == name) return &c;
  }
  return nullptr;
}

const Column &TimeDataset::column(const std::string &name) const {
  if (const Column *c = find(name)) return *c;
  throw DataError("missing column " + name);
}

void TimeDataset::add_column(Covariate covariate, std::vector<double> values) {
  if (values.size() != rows()) {
    throw DataError("column " + covariate.name + " has " + std::to_string(values.size()) + " rows, expected " +
                    std::to_string(rows()));
  }
  if (find(covariate.name)) throw DataError("duplicate column " + covariate.name);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (!std::isfinite(v)) {
      throw DataError("non-finite value in column " + covariate.name + " at row " + std::to_string(i + 1));
    }
    if (covariate.kind == CovariateKind::Categorical &&
        (v != std::floor(v) || v < 0 || v > covariate.modalities)) {
      throw DataError("categorical value " + format_double(v) + " outside 0.." +
                      std::to_string(covariate.modalities) + " in column " + covariate.name + " at row " +
                      std::to_string(i + 1));
    }
  }
  columns_.push_back({std::move(covariate), std::move(values)});
}

void TimeDataset::add_calendar(const CalendarOptions &options) {
  for (auto &c : derive_calendar(timestamps_, offset_, options)) {
    if (find(c.name)) continue;
    Covariate cov = c.categorical ? Covariate::categorical(c.name, c.modalities)
                    : c.period > 0 ? Covariate::cyclic(c.name, c.period)
                                   : Covariate::numeric(c.name);
    add_column(std::move(cov), std::move(c.values));
  }
}

void TimeDataset::add_daily_extrema(const std::string &name) {
  const Column &src = column(name);
  auto [hi, lo] = daily_extrema(timestamps_, offset_, src.values);
  add_column(Covariate::numeric(name + "Max"), std::move(hi));
  add_column(Covariate::numeric(name + "Min"), std::move(lo));
}

CovariateRegistry TimeDataset::registry() const {
  CovariateRegistry reg;
  for (const auto &c : columns_) reg.add(c.covariate);
  return reg;
}

std::vector<double> Slice::target() const { return gather(data->target()); }

std::vector<double> Slice::gather(std::span<const double> full) const {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = full[rows[i]];
  return out;
}

Slice all_rows(DatasetPtr data) {
  Slice s{std::move(data), {}};
  s.rows.resize(s.data->rows());
  for (std::size_t i = 0; i < s.rows.size(); ++i) s.rows[i] = i;
  return s;
}

Slice filter_hour(const Slice &slice, int hour) {
  Slice out{slice.data, {}};
  for (std::size_t r : slice.rows) {
    if (to_civil(slice.data->timestamps()[r], slice.data->offset_seconds()).hour == hour) out.rows.push_back(r);
  }
  return out;
}

Split split(const Slice &slice, const SplitSpec &spec) {
  if (!(spec.train_end < spec.valid_end)) throw DataError("split requires train end < valid end");
  for (const auto &w : spec.exclusions) {
    if (w.end < w.start) throw DataError("exclusion window ends before it starts");
    if (w.start > spec.train_end) throw DataError("exclusion window outside the training range");
  }
  Split out{{slice.data, {}}, {slice.data, {}}, {slice.data, {}}};
  for (std::size_t r : slice.rows) {
    const std::int64_t t = slice.data->timestamps()[r];
    if (t <= spec.train_end) {
      const bool excluded = std::any_of(spec.exclusions.begin(), spec.exclusions.end(),
                                        [t](const TimeWindow &w) { return t >= w.start && t <= w.end; });
      if (!excluded) out.train.rows.push_back(r);
    } else if (t <= spec.valid_end) {
      out.valid.rows.push_back(r);
    } else {
      out.test.rows.push_back(r);
    }
  }
  if (out.train.empty()) throw DataError("empty partition: train");
  if (out.valid.empty()) throw DataError("empty partition: valid");
  return out;
}

Schema schema_from_json(const nlohmann::json &j) {
  Schema s;
  s.timestamp_column = j.value("timestamp", s.timestamp_column);
  s.target_column = j.value("target", s.target_column);
  if (j.contains("covariates")) {
    for (const auto &c : j.at("covariates")) s.covariates.push_back(covariate_from_json(c));
  }
  s.calendar = j.value("calendar", false);
  if (j.contains("holidays")) s.holidays_path = j.at("holidays").get<std::string>();
  if (j.contains("breaks")) s.breaks_path = j.at("breaks").get<std::string>();
  if (j.contains("daily_extrema")) s.daily_extrema = j.at("daily_extrema").get<std::vector<std::string>>();
  return s;
}

nlohmann::json to_json(const Schema &schema) {
  nlohmann::json j;
  j["timestamp"] = schema.timestamp_column;
  j["target"] = schema.target_column;
  j["covariates"] = nlohmann::json::array();
  for (const auto &c : schema.covariates) j["covariates"].push_back(to_json(c));
  j["calendar"] = schema.calendar;
  if (schema.holidays_path) j["holidays"] = *schema.holidays_path;
  if (schema.breaks_path) j["breaks"] = *schema.breaks_path;
  j["daily_extrema"] = schema.daily_extrema;
  return j;
}

Schema load_schema(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw DataError("schema " + path + ": " + e.what());
  }
  Schema s = schema_from_json(j);
  const auto base = std::filesystem::path(path).parent_path();
  for (auto *p : {&s.holidays_path, &s.breaks_path}) {
    if (*p && std::filesystem::path(**p).is_relative()) **p = (base / **p).string();
  }
  return s;
}

namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

} // namespace

TimeDataset parse_csv(std::string_view text, const Schema &schema) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  const auto header = split_line(line);
  auto index_of = [&](const std::string &name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DataError("missing column " + name);
  };
  const std::size_t ts_col = index_of(schema.timestamp_column);
  const std::size_t y_col = index_of(schema.target_column);
  std::vector<std::size_t> cov_cols;
  for (const auto &c : schema.covariates) cov_cols.push_back(index_of(c.name));

  std::vector<std::int64_t> ts;
  std::vector<double> y;
  std::vector<std::vector<double>> cov(schema.covariates.size());
  std::optional<int> offset;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    ParsedTimestamp pt;
    try {
      pt = parse_iso8601(cells[ts_col]);
    } catch (const DataError &e) {
      throw DataError("row " + std::to_string(row) + ", column " + schema.timestamp_column + ": " + e.what());
    }
    if (offset && *offset != pt.offset_seconds) {
      throw DataError("row " + std::to_string(row) + ": UTC offset differs from the first row");
    }
    offset = pt.offset_seconds;
    if (!ts.empty() && pt.utc_seconds == ts.back()) {
      throw DataError("duplicated timestamp " + std::string(cells[ts_col]));
    }
    ts.push_back(pt.utc_seconds);
    auto number = [&](std::size_t col, const std::string &name) {
      const auto v = parse_double(cells[col]);
      if (!v || !std::isfinite(*v)) {
        throw DataError("row " + std::to_string(row) + ", column " + name + ": unparseable cell '" +
                        std::string(cells[col]) + "'");
      }
      return *v;
    };
    y.push_back(number(y_col, schema.target_column));
    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      const double v = number(cov_cols[k], schema.covariates[k].name);
      const Covariate &c = schema.covariates[k];
      if (c.kind == CovariateKind::Categorical && (v != std::floor(v) || v < 0 || v > c.modalities)) {
        throw DataError("row " + std::to_string(row) + ", column " + c.name + ": categorical value " +
                        std::string(cells[cov_cols[k]]) + " outside 0.." + std::to_string(c.modalities));
      }
      cov[k].push_back(v);
    }
  }
  if (ts.empty()) throw DataError("CSV input has no data rows");
  TimeDataset data(std::move(ts), offset.value_or(0), std::move(y));
  for (std::size_t k = 0; k < cov.size(); ++k) data.add_column(schema.covariates[k], std::move(cov[k]));
  if (schema.calendar) {
    CalendarOptions opts;
    DateCalendar holidays, breaks;
    if (schema.holidays_path) {
      holidays = load_date_calendar(*schema.holidays_path);
      opts.holidays = &holidays;
    }
    if (schema.breaks_path) {
      breaks = load_date_calendar(*schema.breaks_path);
      opts.breaks = &breaks;
    }
    data.add_calendar(opts);
  }
  for (const auto &name : schema.daily_extrema) data.add_daily_extrema(name);
  return data;
}

TimeDataset load_csv(const std::string &path, const Schema &schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema);
}

void write_csv(const TimeDataset &data, std::ostream &out) {
  out << "timestamp,load";
  for (const auto &c : data.columns()) out << ',' << c.covariate.name;
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    out << format_iso8601(data.timestamps()[i], data.offset_seconds()) << ',' << format_double(data.target()[i]);
    for (const auto &c : data.columns()) out << ',' << format_double(c.values[i]);
    out << '\n';
  }
}

} // namespace gamevo
