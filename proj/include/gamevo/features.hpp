#pragma once

// Feature-engineering functions applied to dataset columns.

#include "gamevo/dataset.hpp"
#include "gamevo/formula.hpp"

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace gamevo {

// out[0] = x[0]; out[t] = alpha * out[t-1] + (1 - alpha) * x[t].
std::vector<double> exp_smooth(std::span<const double> series, double alpha);

// Keeps modality j when v[j-1] is set, maps everything else to 0.
std::vector<double> select_categories(std::span<const double> series, const std::vector<bool> &v, int modalities);

// Keeps the listed codes, maps everything else to 0.
std::vector<double> select_days(std::span<const double> series, const std::vector<int> &days);

// out[t] = x[max(0, t - offset)].
std::vector<double> lag(std::span<const double> series, int offset);

struct EngineeredColumn {
  std::string name; // source covariate
  FeatureEngineering engineering;
  bool categorical = false;
  int modalities = 0;  // categorical
  double period = 0.0; // cyclic numeric source
  std::vector<double> values;
};

// Applies `eng` to a column of the full frame. A lag set yields one column per
// offset; every other variant yields one column.
std::vector<EngineeredColumn> engineer(const TimeDataset &data, const std::string &name,
                                       const FeatureEngineering &eng);

// Engineered columns of every effect in the formula, for inspection.
void write_engineered_csv(const TimeDataset &data, const Formula &formula, std::ostream &out);

} // namespace gamevo
