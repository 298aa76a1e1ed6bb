#pragma once

// Search-space genome: covariates, feature engineering, basis specifications,
// additive effects, formulae and their adaptive counterparts.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gamevo {

enum class CovariateKind { Numeric, Cyclic, Categorical };

struct Covariate {
  std::string name;
  CovariateKind kind = CovariateKind::Numeric;
  double period = 0.0; // Cyclic only
  int modalities = 0;  // Categorical only: values in {0 (default), 1..modalities}

  bool operator==(const Covariate &) const = default;

  static Covariate numeric(std::string name) { return {std::move(name), CovariateKind::Numeric, 0.0, 0}; }
  static Covariate cyclic(std::string name, double period) {
    return {std::move(name), CovariateKind::Cyclic, period, 0};
  }
  static Covariate categorical(std::string name, int m) {
    return {std::move(name), CovariateKind::Categorical, 0.0, m};
  }
};

class CovariateRegistry {
public:
  CovariateRegistry() = default;
  explicit CovariateRegistry(std::vector<Covariate> covariates);

  // Throws std::invalid_argument on duplicate names or bad parameters.
  void add(Covariate covariate);
  const Covariate *find(const std::string &name) const;
  const Covariate &at(const std::string &name) const;
  const std::vector<Covariate> &all() const { return covariates_; }
  std::size_t size() const { return covariates_.size(); }
  bool empty() const { return covariates_.empty(); }

private:
  std::vector<Covariate> covariates_;
};

// Feature engineering variants.
struct Identity {
  bool operator==(const Identity &) const = default;
};
struct ExpSmooth {
  double alpha = 0.0;
  bool operator==(const ExpSmooth &) const = default;
};
struct CategorySelect {
  std::vector<bool> selected; // bit j-1 set <=> modality j kept
  bool operator==(const CategorySelect &) const = default;
};
struct LagSet {
  std::vector<int> offsets; // in time steps of the source frame
  bool operator==(const LagSet &) const = default;
};
struct DaySet {
  std::vector<int> days; // kept modality codes, e.g. weekday 1..7
  bool operator==(const DaySet &) const = default;
};

using FeatureEngineering = std::variant<Identity, ExpSmooth, CategorySelect, LagSet, DaySet>;

// True when the engineered value is categorical regardless of the source kind.
bool engineering_is_categorical(const FeatureEngineering &eng);
// True when the engineered value is necessarily numeric.
bool engineering_is_numeric(const FeatureEngineering &eng);
std::string engineering_tag(const FeatureEngineering &eng);

enum class BasisFamily { Linear, CubicSpline, CyclicSpline, Categorical, TensorProduct };

std::string family_name(BasisFamily family);

struct Marginal {
  BasisFamily family = BasisFamily::CubicSpline;
  int size = 10;
  bool operator==(const Marginal &) const = default;
};

struct BasisSpec {
  BasisFamily family = BasisFamily::CubicSpline;
  int size = 10;                   // q_k for univariate families (1 for linear, m for categorical)
  std::vector<Marginal> marginals; // tensor products only, one per covariate

  bool operator==(const BasisSpec &) const = default;

  static BasisSpec linear() { return {BasisFamily::Linear, 1, {}}; }
  static BasisSpec cubic(int q) { return {BasisFamily::CubicSpline, q, {}}; }
  static BasisSpec cyclic(int q) { return {BasisFamily::CyclicSpline, q, {}}; }
  static BasisSpec categorical(int m) { return {BasisFamily::Categorical, m, {}}; }
  static BasisSpec tensor(Marginal a, Marginal b) {
    return {BasisFamily::TensorProduct, a.size * b.size, {a, b}};
  }
};

struct Effect {
  std::vector<std::string> covariates;         // J_k, one or two names
  std::vector<FeatureEngineering> engineering; // one per covariate
  BasisSpec basis;

  bool operator==(const Effect &) const = default;

  bool bivariate() const { return covariates.size() == 2; }

  static Effect univariate(std::string name, BasisSpec basis, FeatureEngineering eng = Identity{}) {
    return {{std::move(name)}, {std::move(eng)}, std::move(basis)};
  }
  static Effect tensor(std::string a, std::string b, Marginal ma, Marginal mb,
                       FeatureEngineering ea = Identity{}, FeatureEngineering eb = Identity{}) {
    return {{std::move(a), std::move(b)}, {std::move(ea), std::move(eb)}, BasisSpec::tensor(ma, mb)};
  }
};

// Ordered effect list; the global intercept is implicit.
struct Formula {
  std::vector<Effect> effects;
  bool operator==(const Formula &) const = default;
  std::size_t size() const { return effects.size(); }
};

// A formula with the diagonal of the adaptation matrix Q. An absent q_diag is
// the fixed setting (weights frozen at one).
struct AdaptiveModel {
  Formula formula;
  std::optional<std::vector<double>> q_diag;
  bool operator==(const AdaptiveModel &) const = default;
  bool adaptive() const { return q_diag.has_value(); }
};

// Identifies the engineered covariate tuple of an effect. Basis family and size
// are ignored; covariate order is not significant.
std::string canonical_signature(const Effect &effect);

struct Violation {
  std::vector<std::size_t> effects; // offending effect indices, may be empty
  std::string message;
  bool operator==(const Violation &) const = default;
};

// Checks every type invariant; an empty result means valid. With a registry the
// covariate names, kinds and modality counts are checked as well.
std::vector<Violation> validate(const AdaptiveModel &model, const CovariateRegistry *registry = nullptr);
std::vector<Violation> validate(const Formula &formula, const CovariateRegistry *registry = nullptr);
std::vector<Violation> validate_effect(const Effect &effect, const CovariateRegistry *registry = nullptr);

inline bool is_valid(const AdaptiveModel &model, const CovariateRegistry *registry = nullptr) {
  return validate(model, registry).empty();
}

std::string to_string(const Violation &violation);

} // namespace gamevo
