#pragma once

// Model search: loss evaluation, random model generation, variation
// operators, the steady-state evolutionary algorithm and a random-search
// baseline.

#include "gamevo/adapt.hpp"
#include "gamevo/dataset.hpp"
#include "gamevo/fit.hpp"
#include "gamevo/formula.hpp"
#include "gamevo/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gamevo {

struct SearchConfig {
  std::size_t population = 20; // M
  std::size_t budget = 200;    // T, total fits
  std::size_t tournament = 5;  // m
  double p_bivar = 0.2;
  std::size_t k_max_effects = 0; // K_max; 0 means the number of covariates
  int k_min = 4;
  int k_max = 15;
  int te_k_max = 7; // upper size of each tensor marginal
  double alpha_min = 0.5;
  double alpha_max = 0.99;
  double q_min = 1e-8;
  double q_max = 1e-1;
  double sigma_min = 0.1;
  double sigma_max = 10.0;

  CovariateRegistry registry;
  std::vector<std::string> variables;          // L_var; empty means every registry covariate
  std::vector<BasisFamily> splines{BasisFamily::CubicSpline, BasisFamily::CyclicSpline, BasisFamily::Linear}; // L_sp
  std::vector<BasisFamily> tensors{BasisFamily::CubicSpline, BasisFamily::CyclicSpline};                     // L_te
  std::vector<std::string> smoothable;         // covariates eligible for exp-smooth
  std::vector<std::string> day_covariates;     // covariates eligible for day sets
  std::vector<std::vector<int>> day_lists;     // L_day
  std::vector<std::string> lag_covariates;     // covariates eligible for lag sets
  std::vector<std::vector<int>> offset_lists;  // L_os
  double p_engineer = 0.5;
  double p_select = 0.25;

  bool kalman = false;
  std::optional<double> eta;
  int qigs_in_loop = 0;    // N
  int qigs_iterations = 20;
  double q0 = 1e-6;
  QigsOptions qigs;

  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::optional<AdaptiveModel> preset; // seeded into the initial population
  bool log_wall_time = false;
  FitOptions fit;

  // Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  std::vector<std::string> l_var() const;
  std::size_t effective_k_max() const;
};

struct Lineage {
  std::vector<long> parents;
  std::vector<std::string> operators;
};

struct EvaluatedModel {
  AdaptiveModel model;
  std::shared_ptr<const FittedGam> fitted;
  double loss = 0.0;
  double rmse_valid = 0.0;
  double edf = 0.0;
  bool failed = false;
  std::string diagnostic;
  Lineage lineage;
};

struct AuditRecord {
  std::size_t iteration = 0;
  std::size_t slot = 0;
  Lineage lineage;
  std::string child;
  double loss = 0.0;
  double rmse = 0.0;
  double edf = 0.0;
  bool failed = false;
  std::string diagnostic;
  std::optional<std::size_t> replaced;
  std::optional<double> wall_ms;
};

nlohmann::json to_json(const AuditRecord &record);
void write_audit_log(const std::vector<AuditRecord> &records, std::ostream &out);

// sqrt(population variance of y) / 5000.
double default_eta(std::span<const double> y);

// Fits on train and scores on valid: loss = rmse_valid + eta * edf. Forecasts
// are adaptive iff q_diag is present, the filter starting at the first
// training row. Failures give loss = +inf.
EvaluatedModel evaluate(const AdaptiveModel &model, const Slice &train, const Slice &valid, double eta,
                        const FitOptions &options = {}, int qigs_iterations = 0);
// Scores an already fitted formula with the given adaptation setting. With
// `warmup` the filter first runs over those rows and carries its state on.
EvaluatedModel evaluate_fitted(std::shared_ptr<const FittedGam> fitted, const AdaptiveModel &model,
                               const Slice &valid, double eta, const Slice *warmup = nullptr);

AdaptiveModel generate_model(const SearchConfig &config, Rng &rng);
Effect random_effect(const SearchConfig &config, Rng &rng);
AdaptiveModel mutate(const AdaptiveModel &model, Rng &rng, const SearchConfig &config,
                     std::vector<std::string> *applied = nullptr);
std::pair<AdaptiveModel, AdaptiveModel> crossover(const AdaptiveModel &a, const AdaptiveModel &b, Rng &rng,
                                                  const SearchConfig &config, std::string *applied = nullptr);
// Throws std::invalid_argument when m exceeds the available indices.
std::size_t tournament_select(std::span<const double> losses, std::size_t m, Rng &rng,
                              std::optional<std::size_t> excluded = std::nullopt);

enum class EaVariant { FThenQigs, FQ };

struct SearchResult {
  EvaluatedModel best;
  std::vector<AuditRecord> audit;
  std::vector<double> best_trace; // best loss after initialization and each iteration
  std::vector<EvaluatedModel> population;
  double eta = 0.0;
  std::optional<QigsResult> qigs;
  std::optional<EvaluatedModel> best_fixed; // ea-f-then-qigs: winner before Q tuning
};

SearchResult evolve(EaVariant variant, const SearchConfig &config, const Slice &train, const Slice &valid);
SearchResult random_search(const SearchConfig &config, const Slice &train, const Slice &valid);

} // namespace gamevo
