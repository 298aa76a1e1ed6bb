#pragma once

// Textual formula DSL and canonical JSON persistence for formulae and
// adaptive models. The grammar is documented in docs/formula-dsl.md.

#include "gamevo/formula.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace gamevo {

std::string serialize(const Effect &effect);
std::string serialize(const Formula &formula);
std::string serialize(const AdaptiveModel &model);

// Throws ParseError (line/column, expected token) on malformed text. Missing
// categorical modality counts are resolved through `registry` when given.
AdaptiveModel deserialize(std::string_view text, const CovariateRegistry *registry = nullptr);
Formula parse_formula(std::string_view text, const CovariateRegistry *registry = nullptr);

nlohmann::json to_json(const FeatureEngineering &eng);
nlohmann::json to_json(const BasisSpec &basis);
nlohmann::json to_json(const Effect &effect);
nlohmann::json to_json(const Formula &formula);
nlohmann::json to_json(const AdaptiveModel &model);

FeatureEngineering engineering_from_json(const nlohmann::json &j);
BasisSpec basis_from_json(const nlohmann::json &j);
Effect effect_from_json(const nlohmann::json &j);
Formula formula_from_json(const nlohmann::json &j);
AdaptiveModel model_from_json(const nlohmann::json &j);

nlohmann::json to_json(const Covariate &covariate);
Covariate covariate_from_json(const nlohmann::json &j);
nlohmann::json to_json(const CovariateRegistry &registry);
CovariateRegistry registry_from_json(const nlohmann::json &j);

} // namespace gamevo
