#pragma once

// Model files: a formula, its adaptation setting and the fitted state needed to
// predict without refitting.

#include "gamevo/fit.hpp"
#include "gamevo/formula.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>

namespace gamevo {

struct ModelFile {
  AdaptiveModel model;
  CovariateRegistry registry;
  std::shared_ptr<const FittedGam> fitted; // may be null: refit before use
  std::optional<int> hour;
  std::optional<double> loss;
  std::optional<double> rmse_valid;
  std::optional<double> eta;
};

nlohmann::json to_json(const FittedGam &fitted);
FittedGam fitted_from_json(const nlohmann::json &j, const Formula &formula);

nlohmann::json to_json(const ModelFile &file);
// Throws DataError on malformed content.
ModelFile model_file_from_json(const nlohmann::json &j);

void save_model(const ModelFile &file, const std::string &path);
ModelFile load_model(const std::string &path);

// Writes to a temporary sibling and renames over the target.
void write_file_atomic(const std::string &path, const std::string &content);

} // namespace gamevo
