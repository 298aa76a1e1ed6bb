#include "gamevo/features.hpp"

#include "gamevo/error.hpp"
#include "gamevo/text.hpp"

#include <algorithm>
#include <cmath>

namespace gamevo {

std::vector<double> exp_smooth(std::span<const double> series, double alpha) {
  if (series.empty()) throw DataError("exp_smooth: empty series");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DataError("exp_smooth: alpha outside [0,1]");
  std::vector<double> out(series.size());
  out[0] = series[0];
  for (std::size_t t = 1; t < series.size(); ++t) {
    out[t] = alpha * out[t - 1] + (1.0 - alpha) * series[t];
  }
  return out;
}

std::vector<double> select_categories(std::span<const double> series, const std::vector<bool> &v, int modalities) {
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const double d = series[t];
    if (d > modalities) {
      throw DataError("category value " + format_double(d) + " exceeds m = " + std::to_string(modalities));
    }
    const auto j = static_cast<std::size_t>(d);
    out[t] = (j >= 1 && j <= v.size() && v[j - 1]) ? d : 0.0;
  }
  return out;
}

std::vector<double> select_days(std::span<const double> series, const std::vector<int> &days) {
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    const bool keep = std::find(days.begin(), days.end(), static_cast<int>(series[t])) != days.end();
    out[t] = keep ? series[t] : 0.0;
  }
  return out;
}

std::vector<double> lag(std::span<const double> series, int offset) {
  if (offset < 0) throw DataError("negative lag offset");
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    out[t] = series[t >= static_cast<std::size_t>(offset) ? t - offset : 0];
  }
  return out;
}

std::vector<EngineeredColumn> engineer(const TimeDataset &data, const std::string &name,
                                       const FeatureEngineering &eng) {
  const Column &src = data.column(name);
  const Covariate &cov = src.covariate;
  const bool cat = cov.kind == CovariateKind::Categorical;
  EngineeredColumn base{name, eng, cat, cov.modalities, cov.kind == CovariateKind::Cyclic ? cov.period : 0.0, {}};
  std::vector<EngineeredColumn> out;
  if (std::holds_alternative<Identity>(eng)) {
    base.values = src.values;
    out.push_back(std::move(base));
  } else if (const auto *e = std::get_if<ExpSmooth>(&eng)) {
    if (cat) throw DataError("exp-smooth applied to categorical column " + name);
    base.values = exp_smooth(src.values, e->alpha);
    base.period = 0.0;
    out.push_back(std::move(base));
  } else if (const auto *e = std::get_if<CategorySelect>(&eng)) {
    if (!cat) throw DataError("category selection applied to numeric column " + name);
    base.values = select_categories(src.values, e->selected, cov.modalities);
    out.push_back(std::move(base));
  } else if (const auto *e = std::get_if<DaySet>(&eng)) {
    if (!cat) throw DataError("day set applied to numeric column " + name);
    base.values = select_days(src.values, e->days);
    out.push_back(std::move(base));
  } else if (const auto *e = std::get_if<LagSet>(&eng)) {
    if (cat) throw DataError("lag set applied to categorical column " + name);
    for (int o : e->offsets) {
      EngineeredColumn c = base;
      c.engineering = LagSet{{o}};
      c.values = lag(src.values, o);
      out.push_back(std::move(c));
    }
  }
  return out;
}

void write_engineered_csv(const TimeDataset &data, const Formula &formula, std::ostream &out) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  for (const auto &effect : formula.effects) {
    for (std::size_t j = 0; j < effect.covariates.size(); ++j) {
      for (auto &c : engineer(data, effect.covariates[j], effect.engineering[j])) {
        const std::string label = c.name + ":" + engineering_tag(c.engineering);
        if (std::find(names.begin(), names.end(), label) != names.end()) continue;
        names.push_back(label);
        cols.push_back(std::move(c.values));
      }
    }
  }
  out << "timestamp";
  for (const auto &n : names) out << ",\"" << n << '"';
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    out << format_iso8601(data.timestamps()[i], data.offset_seconds());
    for (const auto &c : cols) out << ',' << format_double(c[i]);
    out << '\n';
  }
}

} // namespace gamevo
