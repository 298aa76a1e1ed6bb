#include "gamevo/persist.hpp"

#include "gamevo/base64.hpp"
#include "gamevo/basis.hpp"
#include "gamevo/dsl.hpp"
#include "gamevo/error.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace gamevo {

nlohmann::json to_json(const FittedGam &f) {
  nlohmann::json j;
  nlohmann::json effects = nlohmann::json::array();
  for (const auto &t : f.effects) {
    nlohmann::json e;
    e["start"] = t.start;
    e["count"] = t.count;
    e["blocks"] = nlohmann::json::array();
    for (const auto &b : t.blocks) e["blocks"].push_back(to_json(b));
    effects.push_back(std::move(e));
  }
  j["effects"] = std::move(effects);
  j["beta"] = encode_doubles(std::span<const double>(f.beta.data(), static_cast<std::size_t>(f.beta.size())));
  j["lambdas"] = f.lambdas;
  j["lambda_effect"] = f.lambda_effect;
  j["edf"] = f.edf;
  j["gcv"] = f.gcv;
  j["rss"] = f.rss;
  j["converged"] = f.converged;
  j["n_train"] = f.n_train;
  j["warnings"] = f.warnings;
  return j;
}

FittedGam fitted_from_json(const nlohmann::json &j, const Formula &formula) {
  FittedGam f;
  f.formula = formula;
  try {
    for (const auto &e : j.at("effects")) {
      EffectTerm t;
      t.start = e.at("start").get<std::size_t>();
      t.count = e.at("count").get<std::size_t>();
      for (const auto &b : e.at("blocks")) t.blocks.push_back(evaluator_from_json(b));
      f.effects.push_back(std::move(t));
    }
    const auto beta = decode_doubles(j.at("beta").get<std::string>());
    f.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    f.lambdas = j.at("lambdas").get<std::vector<double>>();
    f.lambda_effect = j.at("lambda_effect").get<std::vector<std::size_t>>();
    f.edf = j.at("edf").get<double>();
    f.gcv = j.at("gcv").get<double>();
    f.rss = j.at("rss").get<double>();
    f.converged = j.at("converged").get<bool>();
    f.n_train = j.at("n_train").get<std::size_t>();
    if (j.contains("warnings")) f.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception &err) {
    throw DataError(std::string("malformed fitted state: ") + err.what());
  }
  if (f.effects.size() != formula.size()) throw DataError("fitted state does not match the formula");
  std::size_t p = 1;
  for (const auto &t : f.effects) {
    if (t.start != p) throw DataError("fitted state has non-contiguous effect columns");
    p += t.count;
  }
  if (static_cast<std::size_t>(f.beta.size()) != p) throw DataError("coefficient count does not match the design");
  return f;
}

nlohmann::json to_json(const ModelFile &file) {
  nlohmann::json j;
  j["format"] = "gamevo-model";
  j["version"] = 1;
  j["formula"] = serialize(file.model);
  j["model"] = to_json(file.model);
  j["registry"] = to_json(file.registry);
  if (file.hour) j["hour"] = *file.hour;
  if (file.loss) j["loss"] = *file.loss;
  if (file.rmse_valid) j["rmse_valid"] = *file.rmse_valid;
  if (file.eta) j["eta"] = *file.eta;
  if (file.fitted) j["fitted"] = to_json(*file.fitted);
  return j;
}

ModelFile model_file_from_json(const nlohmann::json &j) {
  ModelFile out;
  try {
    if (j.at("format").get<std::string>() != "gamevo-model") throw DataError("not a model file");
    if (j.at("version").get<int>() != 1) throw DataError("unsupported model file version");
    out.registry = registry_from_json(j.at("registry"));
    out.model = model_from_json(j.at("model"));
    if (j.contains("hour")) out.hour = j.at("hour").get<int>();
    if (j.contains("loss")) out.loss = j.at("loss").get<double>();
    if (j.contains("rmse_valid")) out.rmse_valid = j.at("rmse_valid").get<double>();
    if (j.contains("eta")) out.eta = j.at("eta").get<double>();
  } catch (const nlohmann::json::exception &err) {
    throw DataError(std::string("malformed model file: ") + err.what());
  } catch (const std::invalid_argument &err) {
    throw DataError(std::string("malformed model file: ") + err.what());
  }
  const auto issues = validate(out.model, &out.registry);
  if (!issues.empty()) throw DataError("invalid model: " + to_string(issues.front()));
  if (j.contains("fitted")) {
    out.fitted = std::make_shared<const FittedGam>(fitted_from_json(j.at("fitted"), out.model.formula));
  }
  return out;
}

void write_file_atomic(const std::string &path, const std::string &content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw DataError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

void save_model(const ModelFile &file, const std::string &path) {
  write_file_atomic(path, to_json(file).dump(2) + "\n");
}

ModelFile load_model(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &err) {
    throw DataError("model file " + path + ": " + err.what());
  }
  return model_file_from_json(j);
}

} // namespace gamevo
