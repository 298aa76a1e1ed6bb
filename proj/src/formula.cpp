#include "gamevo/formula.hpp"

#include "gamevo/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace gamevo {

CovariateRegistry::CovariateRegistry(std::vector<Covariate> covariates) {
  for (auto &c : covariates) {
    add(std::move(c));
  }
}

void CovariateRegistry::add(Covariate covariate) {
  if (covariate.name.empty()) {
    throw std::invalid_argument("covariate name must not be empty");
  }
  if (find(covariate.name)) {
    throw std::invalid_argument("duplicate covariate name: " + covariate.name);
  }
  if (covariate.kind == CovariateKind::Categorical && covariate.modalities < 2) {
    throw std::invalid_argument("categorical covariate " + covariate.name + " needs at least 2 modalities");
  }
  if (covariate.kind == CovariateKind::Cyclic && !(covariate.period > 0.0)) {
    throw std::invalid_argument("cyclic covariate " + covariate.name + " needs a positive period");
  }
  covariates_.push_back(std::move(covariate));
}

const Covariate *CovariateRegistry::find(const std::string &name) const {
  for (const auto &c : covariates_) {
    if (c.name == name) {
      return &c;
    }
  }
  return nullptr;
}

const Covariate &CovariateRegistry::at(const std::string &name) const {
  if (const Covariate *c = find(name)) {
    return *c;
  }
  throw std::out_of_range("unknown covariate: " + name);
}

bool engineering_is_categorical(const FeatureEngineering &eng) {
  return std::holds_alternative<CategorySelect>(eng) || std::holds_alternative<DaySet>(eng);
}

bool engineering_is_numeric(const FeatureEngineering &eng) {
  return std::holds_alternative<ExpSmooth>(eng) || std::holds_alternative<LagSet>(eng);
}

namespace {

template <typename T> std::string join_ints(const std::vector<T> &values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string bits(const std::vector<bool> &v) {
  std::string out;
  for (bool b : v) out += b ? '1' : '0';
  return out;
}

bool is_spline(BasisFamily f) { return f == BasisFamily::CubicSpline || f == BasisFamily::CyclicSpline; }

} // namespace

std::string engineering_tag(const FeatureEngineering &eng) {
  struct Visitor {
    std::string operator()(const Identity &) const { return "id"; }
    std::string operator()(const ExpSmooth &e) const { return "ema(" + format_double(e.alpha) + ")"; }
    std::string operator()(const CategorySelect &e) const { return "sel(" + bits(e.selected) + ")"; }
    std::string operator()(const LagSet &e) const { return "lag(" + join_ints(e.offsets) + ")"; }
    std::string operator()(const DaySet &e) const { return "days(" + join_ints(e.days) + ")"; }
  };
  return std::visit(Visitor{}, eng);
}

std::string family_name(BasisFamily family) {
  switch (family) {
  case BasisFamily::Linear: return "linear";
  case BasisFamily::CubicSpline: return "cubic-spline";
  case BasisFamily::CyclicSpline: return "cyclic-cubic-spline";
  case BasisFamily::Categorical: return "categorical-indicator";
  case BasisFamily::TensorProduct: return "tensor-product";
  }
  return "?";
}

std::string canonical_signature(const Effect &effect) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < effect.covariates.size(); ++i) {
    const std::string eng = i < effect.engineering.size() ? engineering_tag(effect.engineering[i]) : "id";
    parts.push_back(effect.covariates[i] + ":" + eng);
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '&';
    out += parts[i];
  }
  return out;
}

namespace {

void check_engineering(const FeatureEngineering &eng, const std::string &name, int modalities, bool categorical_slot,
                       std::vector<std::string> &issues) {
  if (const auto *e = std::get_if<ExpSmooth>(&eng)) {
    if (!(e->alpha >= 0.0 && e->alpha <= 1.0)) {
      issues.push_back("alpha of " + name + " outside [0,1]");
    }
    if (categorical_slot) {
      issues.push_back("exp-smooth applied to categorical slot " + name);
    }
  } else if (const auto *e = std::get_if<CategorySelect>(&eng)) {
    if (std::none_of(e->selected.begin(), e->selected.end(), [](bool b) { return b; })) {
      issues.push_back("category selection of " + name + " has no set bit");
    }
    if (modalities > 0 && static_cast<int>(e->selected.size()) != modalities) {
      issues.push_back("category selection of " + name + " has length " + std::to_string(e->selected.size()) +
                       ", expected " + std::to_string(modalities));
    }
    if (!categorical_slot) {
      issues.push_back("category selection applied to numeric slot " + name);
    }
  } else if (const auto *e = std::get_if<LagSet>(&eng)) {
    if (e->offsets.empty()) {
      issues.push_back("lag set of " + name + " is empty");
    }
    std::set<int> seen;
    for (int o : e->offsets) {
      if (o < 0) issues.push_back("negative lag offset on " + name);
      if (!seen.insert(o).second) issues.push_back("duplicate lag offset on " + name);
    }
    if (categorical_slot) {
      issues.push_back("lag set applied to categorical slot " + name);
    }
  } else if (const auto *e = std::get_if<DaySet>(&eng)) {
    if (e->days.empty()) {
      issues.push_back("day set of " + name + " is empty");
    }
    std::set<int> seen;
    for (int d : e->days) {
      if (d < 1 || (modalities > 0 && d > modalities)) issues.push_back("day code out of range on " + name);
      if (!seen.insert(d).second) issues.push_back("duplicate day code on " + name);
    }
    if (!categorical_slot) {
      issues.push_back("day set applied to numeric slot " + name);
    }
  }
}

void check_against_registry(const std::string &name, bool categorical_slot, int size, BasisFamily family,
                            const CovariateRegistry &registry, std::vector<std::string> &issues) {
  const Covariate *c = registry.find(name);
  if (!c) {
    issues.push_back("unknown covariate " + name);
    return;
  }
  const bool is_cat = c->kind == CovariateKind::Categorical;
  if (is_cat != categorical_slot) {
    issues.push_back("basis " + family_name(family) + " incompatible with covariate " + name);
  }
  if (is_cat && size != c->modalities) {
    issues.push_back("categorical basis size " + std::to_string(size) + " for " + name + " with " +
                     std::to_string(c->modalities) + " modalities");
  }
}

} // namespace

std::vector<Violation> validate_effect(const Effect &effect, const CovariateRegistry *registry) {
  std::vector<std::string> issues;
  const std::size_t arity = effect.covariates.size();
  if (arity < 1 || arity > 2) {
    issues.push_back("effect must reference 1 or 2 covariates");
  }
  if (effect.engineering.size() != arity) {
    issues.push_back("one feature engineering per covariate required");
  }
  const BasisSpec &b = effect.basis;
  if (arity == 1 && effect.engineering.size() == 1) {
    const std::string &name = effect.covariates[0];
    const auto &eng = effect.engineering[0];
    const bool cat_slot = b.family == BasisFamily::Categorical;
    switch (b.family) {
    case BasisFamily::Linear:
      if (b.size != 1) issues.push_back("linear basis must have size 1");
      break;
    case BasisFamily::CubicSpline:
    case BasisFamily::CyclicSpline:
      if (b.size < 3) issues.push_back("spline basis size must be >= 3");
      break;
    case BasisFamily::Categorical:
      if (b.size < 2) issues.push_back("categorical basis needs m >= 2");
      break;
    case BasisFamily::TensorProduct:
      issues.push_back("tensor product requires a bi-variate effect");
      break;
    }
    if (!b.marginals.empty()) {
      issues.push_back("univariate basis must not carry marginals");
    }
    check_engineering(eng, name, cat_slot ? b.size : 0, cat_slot, issues);
    if (registry && b.family != BasisFamily::TensorProduct) {
      check_against_registry(name, cat_slot, b.size, b.family, *registry, issues);
    }
  } else if (arity == 2 && effect.engineering.size() == 2) {
    if (effect.covariates[0] == effect.covariates[1]) {
      issues.push_back("bi-variate effect needs two distinct covariates");
    }
    if (b.family != BasisFamily::TensorProduct || b.marginals.size() != 2) {
      issues.push_back("bi-variate effect requires a two-marginal tensor product");
    } else {
      int categorical = 0;
      for (std::size_t i = 0; i < 2; ++i) {
        const Marginal &m = b.marginals[i];
        const bool cat_slot = m.family == BasisFamily::Categorical;
        categorical += cat_slot ? 1 : 0;
        if (m.family == BasisFamily::Linear || m.family == BasisFamily::TensorProduct) {
          issues.push_back("tensor marginal must be a spline or categorical basis");
        }
        if (is_spline(m.family) && m.size < 3) {
          issues.push_back("tensor marginal size must be >= 3");
        }
        if (cat_slot && m.size < 2) {
          issues.push_back("categorical marginal needs m >= 2");
        }
        check_engineering(effect.engineering[i], effect.covariates[i], cat_slot ? m.size : 0, cat_slot, issues);
        if (const auto *lag = std::get_if<LagSet>(&effect.engineering[i]); lag && lag->offsets.size() != 1) {
          issues.push_back("lag set inside a tensor product must have exactly one offset");
        }
        if (registry) {
          check_against_registry(effect.covariates[i], cat_slot, m.size, m.family, *registry, issues);
        }
      }
      if (categorical == 2) {
        issues.push_back("bi-variate effect on two categorical covariates");
      }
      if (b.size != b.marginals[0].size * b.marginals[1].size) {
        issues.push_back("tensor size must equal the product of marginal sizes");
      }
    }
  }
  std::vector<Violation> out;
  for (auto &msg : issues) {
    out.push_back({{}, std::move(msg)});
  }
  return out;
}

std::vector<Violation> validate(const Formula &formula, const CovariateRegistry *registry) {
  std::vector<Violation> out;
  if (formula.effects.empty()) {
    out.push_back({{}, "K >= 1 required: formula has no effect"});
  }
  for (std::size_t k = 0; k < formula.effects.size(); ++k) {
    for (auto &v : validate_effect(formula.effects[k], registry)) {
      v.effects = {k};
      v.message = "effect " + std::to_string(k) + ": " + v.message;
      out.push_back(std::move(v));
    }
  }
  std::map<std::string, std::vector<std::size_t>> by_signature;
  for (std::size_t k = 0; k < formula.effects.size(); ++k) {
    by_signature[canonical_signature(formula.effects[k])].push_back(k);
  }
  std::vector<std::vector<std::size_t>> dups;
  for (auto &[sig, idx] : by_signature) {
    if (idx.size() > 1) dups.push_back(idx);
  }
  std::sort(dups.begin(), dups.end());
  for (auto &idx : dups) {
    std::string list;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i) list += ',';
      list += std::to_string(idx[i]);
    }
    out.push_back({idx, "duplicate signature at indices " + list});
  }
  return out;
}

std::vector<Violation> validate(const AdaptiveModel &model, const CovariateRegistry *registry) {
  auto out = validate(model.formula, registry);
  if (model.q_diag) {
    const auto &q = *model.q_diag;
    if (q.size() != model.formula.effects.size()) {
      out.push_back({{}, "Q dimension: q_diag has " + std::to_string(q.size()) + " entries for K = " +
                             std::to_string(model.formula.effects.size())});
    }
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (!(q[k] >= 0.0) || !std::isfinite(q[k])) {
        out.push_back({{k}, "q_diag entry " + std::to_string(k) + " must be finite and >= 0"});
      }
    }
  }
  return out;
}

std::string to_string(const Violation &violation) { return violation.message; }

} // namespace gamevo
