#include "gamevo/search.hpp"

#include "gamevo/dsl.hpp"
#include "gamevo/error.hpp"
#include "gamevo/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>
#include <thread>

namespace gamevo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool contains(const std::vector<std::string> &list, const std::string &name) {
  return std::find(list.begin(), list.end(), name) != list.end();
}

double log_uniform(Rng &rng, double lo, double hi) {
  const double a = std::log10(lo), b = std::log10(hi);
  return std::pow(10.0, a + (b - a) * uniform01(rng));
}

double uniform_real(Rng &rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

// Families from `allowed` usable on a numeric covariate of the given kind.
std::vector<BasisFamily> families_for(const Covariate &c, const std::vector<BasisFamily> &allowed, bool tensor) {
  std::vector<BasisFamily> out;
  for (BasisFamily f : allowed) {
    if (f == BasisFamily::Linear && tensor) continue;
    if (f == BasisFamily::CyclicSpline && c.kind != CovariateKind::Cyclic) continue;
    if (f == BasisFamily::Categorical || f == BasisFamily::TensorProduct) continue;
    out.push_back(f);
  }
  return out;
}

int spline_size(const SearchConfig &cfg, Rng &rng, BasisFamily f, bool tensor) {
  if (f == BasisFamily::Linear) return 1;
  const int lo = std::max(3, cfg.k_min);
  const int hi = std::max(lo, tensor ? cfg.te_k_max : cfg.k_max);
  return uniform_int(rng, lo, hi);
}

CategorySelect random_selection(Rng &rng, int m) {
  CategorySelect s;
  s.selected.assign(static_cast<std::size_t>(m), false);
  for (auto &&b : s.selected) b = uniform01(rng) < 0.5;
  if (std::none_of(s.selected.begin(), s.selected.end(), [](bool b) { return b; })) {
    s.selected[uniform_index(rng, s.selected.size())] = true;
  }
  return s;
}

std::vector<std::vector<int>> usable_days(const SearchConfig &cfg, int m) {
  std::vector<std::vector<int>> out;
  for (const auto &list : cfg.day_lists) {
    if (!list.empty() && std::all_of(list.begin(), list.end(), [m](int d) { return d >= 1 && d <= m; })) {
      out.push_back(list);
    }
  }
  return out;
}

FeatureEngineering random_engineering(const SearchConfig &cfg, Rng &rng, const Covariate &c, bool tensor) {
  if (c.kind == CovariateKind::Categorical) {
    const auto days = contains(cfg.day_covariates, c.name) ? usable_days(cfg, c.modalities)
                                                           : std::vector<std::vector<int>>{};
    if (!days.empty() && uniform01(rng) < cfg.p_engineer) {
      return DaySet{days[uniform_index(rng, days.size())]};
    }
    if (uniform01(rng) < cfg.p_select) return random_selection(rng, c.modalities);
    return Identity{};
  }
  const bool smooth = contains(cfg.smoothable, c.name);
  const bool lagged = contains(cfg.lag_covariates, c.name) && !cfg.offset_lists.empty();
  if ((smooth || lagged) && uniform01(rng) < cfg.p_engineer) {
    if (smooth && (!lagged || uniform01(rng) < 0.5)) return ExpSmooth{uniform_real(rng, cfg.alpha_min, cfg.alpha_max)};
    const auto &list = cfg.offset_lists[uniform_index(rng, cfg.offset_lists.size())];
    if (tensor) return LagSet{{list[uniform_index(rng, list.size())]}};
    return LagSet{list};
  }
  return Identity{};
}

Marginal random_marginal(const SearchConfig &cfg, Rng &rng, const Covariate &c) {
  if (c.kind == CovariateKind::Categorical) return {BasisFamily::Categorical, c.modalities};
  auto fams = families_for(c, cfg.tensors, true);
  if (fams.empty()) fams.push_back(BasisFamily::CubicSpline);
  const BasisFamily f = fams[uniform_index(rng, fams.size())];
  return {f, spline_size(cfg, rng, f, true)};
}

BasisSpec random_univariate_basis(const SearchConfig &cfg, Rng &rng, const Covariate &c) {
  if (c.kind == CovariateKind::Categorical) return BasisSpec::categorical(c.modalities);
  auto fams = families_for(c, cfg.splines, false);
  if (fams.empty()) fams.push_back(BasisFamily::CubicSpline);
  const BasisFamily f = fams[uniform_index(rng, fams.size())];
  return {f, spline_size(cfg, rng, f, false), {}};
}

Effect random_univariate(const SearchConfig &cfg, Rng &rng, const Covariate &c) {
  return Effect::univariate(c.name, random_univariate_basis(cfg, rng, c), random_engineering(cfg, rng, c, false));
}

Effect random_tensor(const SearchConfig &cfg, Rng &rng, const Covariate &a, const Covariate &b) {
  return Effect::tensor(a.name, b.name, random_marginal(cfg, rng, a), random_marginal(cfg, rng, b),
                        random_engineering(cfg, rng, a, true), random_engineering(cfg, rng, b, true));
}

std::vector<const Covariate *> pool(const SearchConfig &cfg) {
  std::vector<const Covariate *> out;
  for (const auto &name : cfg.l_var()) out.push_back(&cfg.registry.at(name));
  return out;
}

std::set<std::string> signatures(const Formula &f) {
  std::set<std::string> out;
  for (const auto &e : f.effects) out.insert(canonical_signature(e));
  return out;
}

// Drops later effects whose signature repeats, keeping q aligned.
void drop_duplicates(AdaptiveModel &m) {
  std::set<std::string> seen;
  std::vector<Effect> effects;
  std::vector<double> q;
  for (std::size_t k = 0; k < m.formula.effects.size(); ++k) {
    if (!seen.insert(canonical_signature(m.formula.effects[k])).second) continue;
    effects.push_back(m.formula.effects[k]);
    if (m.q_diag && k < m.q_diag->size()) q.push_back((*m.q_diag)[k]);
  }
  m.formula.effects = std::move(effects);
  if (m.q_diag) m.q_diag = std::move(q);
}

void resync_q(AdaptiveModel &m, const SearchConfig &cfg, Rng &rng) {
  if (!m.q_diag) return;
  auto &q = *m.q_diag;
  q.resize(std::min(q.size(), m.formula.effects.size()));
  while (q.size() < m.formula.effects.size()) q.push_back(log_uniform(rng, cfg.q_min, cfg.q_max));
}

// Mutation sites.
enum class Site { Covariate, Basis, Engineering, Add, Remove, Q };

const char *site_name(Site s) {
  switch (s) {
  case Site::Covariate: return "change-covariate";
  case Site::Basis: return "change-basis";
  case Site::Engineering: return "change-engineering";
  case Site::Add: return "add-effect";
  case Site::Remove: return "remove-effect";
  case Site::Q: return "perturb-q";
  }
  return "?";
}

bool engineerable(const SearchConfig &cfg, const Covariate &c) {
  if (c.kind == CovariateKind::Categorical) return true;
  return contains(cfg.smoothable, c.name) || (contains(cfg.lag_covariates, c.name) && !cfg.offset_lists.empty());
}

// Returns false when the site cannot be applied to this model.
bool apply_site(Site site, AdaptiveModel &m, Rng &rng, const SearchConfig &cfg) {
  auto &effects = m.formula.effects;
  const auto vars = pool(cfg);
  switch (site) {
  case Site::Add: {
    if (effects.size() >= cfg.effective_k_max()) return false;
    const auto sigs = signatures(m.formula);
    for (int attempt = 0; attempt < 20; ++attempt) {
      Effect e = random_effect(cfg, rng);
      if (sigs.count(canonical_signature(e))) continue;
      effects.push_back(std::move(e));
      if (m.q_diag) m.q_diag->push_back(log_uniform(rng, cfg.q_min, cfg.q_max));
      return true;
    }
    return false;
  }
  case Site::Remove: {
    if (effects.size() < 2) return false;
    const std::size_t k = uniform_index(rng, effects.size());
    effects.erase(effects.begin() + static_cast<std::ptrdiff_t>(k));
    if (m.q_diag) m.q_diag->erase(m.q_diag->begin() + static_cast<std::ptrdiff_t>(k));
    return true;
  }
  case Site::Q: {
    if (!m.q_diag || m.q_diag->empty()) return false;
    auto &q = (*m.q_diag)[uniform_index(rng, m.q_diag->size())];
    const double z = std::normal_distribution<double>(0.0, 0.5)(rng);
    q = std::clamp(q * std::pow(10.0, z), cfg.q_min, cfg.q_max);
    return true;
  }
  default:
    break;
  }
  if (effects.empty()) return false;
  const std::size_t k = uniform_index(rng, effects.size());
  Effect &e = effects[k];
  const std::size_t slot = e.bivariate() ? uniform_index(rng, 2) : 0;
  const Covariate &cur = cfg.registry.at(e.covariates[slot]);
  if (site == Site::Covariate) {
    std::vector<const Covariate *> options;
    for (const Covariate *c : vars) {
      if (c->name == cur.name) continue;
      if (e.bivariate() && c->name == e.covariates[1 - slot]) continue;
      if (e.bivariate() && c->kind == CovariateKind::Categorical &&
          cfg.registry.at(e.covariates[1 - slot]).kind == CovariateKind::Categorical) {
        continue;
      }
      options.push_back(c);
    }
    if (options.empty()) return false;
    const Covariate &c = *options[uniform_index(rng, options.size())];
    if (!e.bivariate()) {
      e = random_univariate(cfg, rng, c);
    } else {
      e.covariates[slot] = c.name;
      e.engineering[slot] = random_engineering(cfg, rng, c, true);
      e.basis.marginals[slot] = random_marginal(cfg, rng, c);
      e.basis.size = e.basis.marginals[0].size * e.basis.marginals[1].size;
    }
    return true;
  }
  if (site == Site::Basis) {
    if (!e.bivariate()) {
      if (cur.kind == CovariateKind::Categorical) return false;
      const BasisSpec before = e.basis;
      for (int attempt = 0; attempt < 10 && e.basis == before; ++attempt) e.basis = random_univariate_basis(cfg, rng, cur);
      return !(e.basis == before);
    }
    if (cur.kind == CovariateKind::Categorical) return false;
    e.basis.marginals[slot] = random_marginal(cfg, rng, cur);
    e.basis.size = e.basis.marginals[0].size * e.basis.marginals[1].size;
    return true;
  }
  // Engineering.
  if (!engineerable(cfg, cur)) return false;
  auto &eng = e.engineering[slot];
  if (auto *s = std::get_if<ExpSmooth>(&eng); s && uniform01(rng) < 0.5) {
    s->alpha = uniform_real(rng, cfg.alpha_min, cfg.alpha_max);
  } else if (auto *sel = std::get_if<CategorySelect>(&eng); sel && uniform01(rng) < 0.5) {
    const std::size_t j = uniform_index(rng, sel->selected.size());
    sel->selected[j] = !sel->selected[j];
    if (std::none_of(sel->selected.begin(), sel->selected.end(), [](bool b) { return b; })) sel->selected[j] = true;
  } else {
    eng = random_engineering(cfg, rng, cur, e.bivariate());
  }
  return true;
}

template <class Fn> void parallel_for(std::size_t n, unsigned jobs, Fn &&fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> workers;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  for (unsigned w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto &t : workers) t.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::size_t argmin(const std::vector<EvaluatedModel> &pop) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i) {
    if (pop[i].loss < pop[best].loss) best = i;
  }
  return best;
}

std::size_t argmax(const std::vector<EvaluatedModel> &pop) {
  std::size_t worst = 0;
  for (std::size_t i = 1; i < pop.size(); ++i) {
    if (pop[i].loss > pop[worst].loss) worst = i;
  }
  return worst;
}

AuditRecord record_of(const EvaluatedModel &e, std::size_t iteration, std::size_t slot, bool with_time,
                      double wall_ms) {
  AuditRecord r;
  r.iteration = iteration;
  r.slot = slot;
  r.lineage = e.lineage;
  r.child = serialize(e.model);
  r.loss = e.loss;
  r.rmse = e.rmse_valid;
  r.edf = e.edf;
  r.failed = e.failed;
  r.diagnostic = e.diagnostic;
  if (with_time) r.wall_ms = wall_ms;
  return r;
}

struct Timed {
  EvaluatedModel model;
  double wall_ms = 0.0;
};

double resolve_eta(const SearchConfig &cfg, const Slice &valid) {
  if (cfg.eta) return *cfg.eta;
  const auto y = valid.target();
  return default_eta(y);
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

} // namespace

void SearchConfig::validate() const {
  if (population < 2) throw std::invalid_argument("population must be at least 2");
  if (budget < population) throw std::invalid_argument("budget must be at least the population size");
  if (tournament < 1 || tournament > population - 1) {
    throw std::invalid_argument("tournament size must lie in [1, population - 1]");
  }
  if (!(p_bivar >= 0.0 && p_bivar <= 1.0)) throw std::invalid_argument("p_bivar must lie in [0,1]");
  if (k_min < 3 || k_max < k_min || te_k_max < 3) throw std::invalid_argument("invalid basis size bounds");
  if (!(alpha_min >= 0.0 && alpha_min <= alpha_max && alpha_max <= 1.0)) {
    throw std::invalid_argument("invalid smoothing coefficient bounds");
  }
  if (!(q_min > 0.0 && q_min <= q_max)) throw std::invalid_argument("invalid Q bounds");
  if (!(sigma_min > 0.0 && sigma_min <= sigma_max)) throw std::invalid_argument("invalid sigma bounds");
  if (registry.empty()) throw std::invalid_argument("empty covariate registry");
  for (const auto &name : variables) {
    if (!registry.find(name)) throw std::invalid_argument("unknown covariate " + name);
  }
  if (l_var().empty()) throw std::invalid_argument("no covariate to search over");
  if (splines.empty()) throw std::invalid_argument("empty spline family list");
  for (const auto &list : offset_lists) {
    if (list.empty()) throw std::invalid_argument("empty offset list");
    for (int o : list) {
      if (o < 0) throw std::invalid_argument("negative lag offset");
    }
  }
  if (qigs_in_loop < 0 || qigs_iterations < 0) throw std::invalid_argument("negative Q_IGS iteration count");
  if (!(q0 > 0.0)) throw std::invalid_argument("q0 must be positive");
  if (eta && !(*eta >= 0.0)) throw std::invalid_argument("eta must be non-negative");
}

std::vector<std::string> SearchConfig::l_var() const {
  if (!variables.empty()) return variables;
  std::vector<std::string> out;
  for (const auto &c : registry.all()) out.push_back(c.name);
  return out;
}

std::size_t SearchConfig::effective_k_max() const {
  return k_max_effects ? k_max_effects : l_var().size();
}

nlohmann::json to_json(const AuditRecord &r) {
  nlohmann::json j;
  j["iteration"] = r.iteration;
  j["slot"] = r.slot;
  j["parents"] = r.lineage.parents;
  j["operators"] = r.lineage.operators;
  j["child"] = r.child;
  j["loss"] = number_or_null(r.loss);
  j["rmse"] = number_or_null(r.rmse);
  j["edf"] = number_or_null(r.edf);
  j["failed"] = r.failed;
  j["diagnostic"] = r.diagnostic;
  j["replaced"] = r.replaced ? nlohmann::json(*r.replaced) : nlohmann::json(nullptr);
  if (r.wall_ms) j["wall_ms"] = *r.wall_ms;
  return j;
}

void write_audit_log(const std::vector<AuditRecord> &records, std::ostream &out) {
  for (const auto &r : records) out << to_json(r).dump() << '\n';
}

double default_eta(std::span<const double> y) {
  if (y.empty()) return 0.0;
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  return std::sqrt(var) / 5000.0;
}

EvaluatedModel evaluate_fitted(std::shared_ptr<const FittedGam> fitted, const AdaptiveModel &model,
                               const Slice &valid, double eta, const Slice *warmup) {
  EvaluatedModel out;
  out.model = model;
  out.fitted = fitted;
  try {
    KalmanState state;
    if (warmup && model.q_diag) kalman_forecast(*fitted, model.q_diag, *warmup, &state);
    const auto forecast = kalman_forecast(*fitted, model.q_diag, valid, model.q_diag ? &state : nullptr).forecast;
    const auto y = valid.target();
    out.rmse_valid = metrics(y, forecast).rmse;
    out.edf = fitted->edf;
    out.loss = out.rmse_valid + eta * out.edf;
    if (!std::isfinite(out.loss)) throw NumericError("non-finite validation loss");
  } catch (const std::exception &err) {
    out.failed = true;
    out.diagnostic = err.what();
    out.loss = out.rmse_valid = kInf;
    out.edf = 0.0;
  }
  return out;
}

EvaluatedModel evaluate(const AdaptiveModel &model, const Slice &train, const Slice &valid, double eta,
                        const FitOptions &options, int qigs_iterations) {
  std::shared_ptr<const FittedGam> fitted;
  try {
    fitted = std::make_shared<const FittedGam>(fit(model.formula, train, options));
  } catch (const std::exception &err) {
    EvaluatedModel out;
    out.model = model;
    out.failed = true;
    out.diagnostic = err.what();
    out.loss = out.rmse_valid = kInf;
    out.edf = 0.0;
    return out;
  }
  AdaptiveModel scored = model;
  if (scored.q_diag && qigs_iterations > 0) {
    try {
      scored.q_diag = q_igs(*fitted, train, *scored.q_diag, qigs_iterations).q;
    } catch (const NumericError &) {
      // keep the proposed q
    }
  }
  return evaluate_fitted(fitted, scored, valid, eta, &train);
}

Effect random_effect(const SearchConfig &cfg, Rng &rng) {
  const auto vars = pool(cfg);
  std::size_t numeric = 0;
  for (const Covariate *c : vars) numeric += c->kind != CovariateKind::Categorical;
  if (vars.size() >= 2 && numeric >= 1 && uniform01(rng) < cfg.p_bivar) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      const std::size_t i = uniform_index(rng, vars.size());
      std::size_t j = uniform_index(rng, vars.size() - 1);
      if (j >= i) ++j;
      const Covariate &a = *vars[i], &b = *vars[j];
      if (a.kind == CovariateKind::Categorical && b.kind == CovariateKind::Categorical) continue;
      return random_tensor(cfg, rng, a, b);
    }
  }
  return random_univariate(cfg, rng, *vars[uniform_index(rng, vars.size())]);
}

AdaptiveModel generate_model(const SearchConfig &cfg, Rng &rng) {
  AdaptiveModel m;
  const std::size_t k_max = std::max<std::size_t>(1, cfg.effective_k_max());
  const std::size_t k = 1 + uniform_index(rng, k_max);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < k; ++i) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      Effect e = random_effect(cfg, rng);
      if (!seen.insert(canonical_signature(e)).second) continue;
      m.formula.effects.push_back(std::move(e));
      break;
    }
  }
  if (cfg.kalman) {
    (void)uniform_real(rng, cfg.sigma_min, cfg.sigma_max);
    std::vector<double> q;
    for (std::size_t i = 0; i < m.formula.effects.size(); ++i) q.push_back(log_uniform(rng, cfg.q_min, cfg.q_max));
    m.q_diag = std::move(q);
  }
  return m;
}

AdaptiveModel mutate(const AdaptiveModel &model, Rng &rng, const SearchConfig &cfg, std::vector<std::string> *applied) {
  const std::vector<Site> all{Site::Covariate, Site::Basis, Site::Engineering, Site::Add, Site::Remove, Site::Q};
  for (int attempt = 0; attempt < 100; ++attempt) {
    AdaptiveModel m = model;
    std::vector<Site> remaining = all;
    const int sites = 1 + std::binomial_distribution<int>(3, 0.2)(rng);
    std::vector<std::string> names;
    for (int s = 0; s < sites && !remaining.empty();) {
      const std::size_t idx = uniform_index(rng, remaining.size());
      const Site site = remaining[idx];
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(idx));
      if (!apply_site(site, m, rng, cfg)) continue;
      names.push_back(std::string("mutate:") + site_name(site));
      ++s;
    }
    if (names.empty()) continue;
    resync_q(m, cfg, rng);
    if (!is_valid(m, &cfg.registry)) continue;
    if (applied) applied->insert(applied->end(), names.begin(), names.end());
    return m;
  }
  if (applied) applied->push_back("mutate:regenerate");
  return generate_model(cfg, rng);
}

std::pair<AdaptiveModel, AdaptiveModel> crossover(const AdaptiveModel &a, const AdaptiveModel &b, Rng &rng,
                                                  const SearchConfig &cfg, std::string *applied) {
  const std::size_t kmin = std::min(a.formula.size(), b.formula.size());
  std::size_t lo = uniform_index(rng, kmin + 1), hi = uniform_index(rng, kmin + 1);
  if (lo > hi) std::swap(lo, hi);
  auto splice = [&](const AdaptiveModel &x, const AdaptiveModel &y) {
    AdaptiveModel c;
    const auto &ex = x.formula.effects, &ey = y.formula.effects;
    for (std::size_t i = 0; i < ex.size(); ++i) c.formula.effects.push_back(i >= lo && i < hi ? ey[i] : ex[i]);
    if (x.q_diag) {
      std::vector<double> q;
      for (std::size_t i = 0; i < x.q_diag->size(); ++i) {
        const bool take = i >= lo && i < hi && y.q_diag && i < y.q_diag->size();
        q.push_back(take ? (*y.q_diag)[i] : (*x.q_diag)[i]);
      }
      c.q_diag = std::move(q);
    }
    drop_duplicates(c);
    if (c.formula.effects.empty()) {
      const auto &src = uniform01(rng) < 0.5 ? x : y;
      if (!src.formula.effects.empty()) {
        c.formula.effects.push_back(src.formula.effects[uniform_index(rng, src.formula.effects.size())]);
      }
    }
    resync_q(c, cfg, rng);
    return c;
  };
  auto ab = splice(a, b);
  auto ba = splice(b, a);
  if (applied) *applied = "crossover(" + std::to_string(lo) + "," + std::to_string(hi) + ")";
  return {std::move(ab), std::move(ba)};
}

std::size_t tournament_select(std::span<const double> losses, std::size_t m, Rng &rng,
                              std::optional<std::size_t> excluded) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (!excluded || *excluded != i) candidates.push_back(i);
  }
  if (m < 1 || m > candidates.size()) throw std::invalid_argument("tournament size exceeds the candidate pool");
  for (std::size_t i = 0; i < m; ++i) {
    std::swap(candidates[i], candidates[i + uniform_index(rng, candidates.size() - i)]);
  }
  auto key = [&](std::size_t i) { return std::isnan(losses[i]) ? kInf : losses[i]; };
  std::size_t best = candidates[0];
  for (std::size_t i = 1; i < m; ++i) {
    const std::size_t c = candidates[i];
    if (key(c) < key(best) || (key(c) == key(best) && c < best)) best = c;
  }
  return best;
}

SearchResult evolve(EaVariant variant, const SearchConfig &config, const Slice &train, const Slice &valid) {
  config.validate();
  SearchConfig cfg = config;
  cfg.kalman = variant == EaVariant::FQ;
  SearchResult out;
  out.eta = resolve_eta(cfg, valid);
  const std::size_t M = cfg.population;
  const int in_loop = cfg.kalman ? cfg.qigs_in_loop : 0;
  Rng master(derive_seed(cfg.seed, {0xEAULL}));

  auto run = [&](const AdaptiveModel &m) {
    const auto t0 = std::chrono::steady_clock::now();
    Timed t{evaluate(m, train, valid, out.eta, cfg.fit, in_loop), 0.0};
    t.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return t;
  };

  std::vector<AdaptiveModel> initial(M);
  std::vector<Lineage> lineages(M, Lineage{{}, {"generate"}});
  for (std::size_t i = 0; i < M; ++i) {
    Rng rng(derive_seed(cfg.seed, {0, i}));
    initial[i] = generate_model(cfg, rng);
  }
  if (cfg.preset) {
    const std::size_t slot = uniform_index(master, M);
    AdaptiveModel p = *cfg.preset;
    if (cfg.kalman && !p.q_diag) p.q_diag = std::vector<double>(p.formula.size(), cfg.q0);
    if (!cfg.kalman) p.q_diag.reset();
    initial[slot] = std::move(p);
    lineages[slot].operators = {"preset"};
  }
  std::vector<Timed> first(M);
  parallel_for(M, cfg.jobs, [&](std::size_t i) { first[i] = run(initial[i]); });
  std::vector<EvaluatedModel> pop(M);
  for (std::size_t i = 0; i < M; ++i) {
    pop[i] = std::move(first[i].model);
    pop[i].lineage = lineages[i];
    out.audit.push_back(record_of(pop[i], 0, i, cfg.log_wall_time, first[i].wall_ms));
  }
  out.best_trace.push_back(pop[argmin(pop)].loss);

  std::size_t spent = M;
  for (std::size_t it = 1; spent < cfg.budget; ++it) {
    std::vector<double> losses;
    for (const auto &p : pop) losses.push_back(p.loss);
    const std::size_t ja = tournament_select(losses, cfg.tournament, master);
    const std::size_t jb = tournament_select(losses, cfg.tournament, master, ja);
    std::string cross;
    auto [c1, c2] = crossover(pop[ja].model, pop[jb].model, master, cfg, &cross);
    const std::size_t count = std::min<std::size_t>(2, cfg.budget - spent);
    std::vector<AdaptiveModel> children{std::move(c1), std::move(c2)};
    children.resize(count);
    std::vector<Lineage> lin(count);
    for (std::size_t s = 0; s < count; ++s) {
      Rng rng(derive_seed(cfg.seed, {it, s}));
      lin[s].parents = {static_cast<long>(ja), static_cast<long>(jb)};
      lin[s].operators = {cross};
      children[s] = mutate(children[s], rng, cfg, &lin[s].operators);
    }
    std::vector<Timed> evaluated(count);
    parallel_for(count, cfg.jobs, [&](std::size_t s) { evaluated[s] = run(children[s]); });
    for (std::size_t s = 0; s < count; ++s) {
      EvaluatedModel e = std::move(evaluated[s].model);
      e.lineage = lin[s];
      AuditRecord rec = record_of(e, it, s, cfg.log_wall_time, evaluated[s].wall_ms);
      const std::size_t worst = argmax(pop);
      if (e.loss < pop[worst].loss) {
        rec.replaced = worst;
        pop[worst] = std::move(e);
      }
      out.audit.push_back(std::move(rec));
    }
    spent += count;
    out.best_trace.push_back(pop[argmin(pop)].loss);
  }
  out.best = pop[argmin(pop)];
  if (variant == EaVariant::FThenQigs && out.best.fitted) {
    out.best_fixed = out.best;
    const std::vector<double> q0(out.best.model.formula.size(), cfg.q0);
    try {
      out.qigs = q_igs(*out.best.fitted, train, q0, cfg.qigs_iterations, cfg.qigs);
      AdaptiveModel tuned = out.best.model;
      tuned.q_diag = out.qigs->q;
      EvaluatedModel e = evaluate_fitted(out.best.fitted, tuned, valid, out.eta, &train);
      e.lineage = out.best.lineage;
      e.lineage.operators.push_back("q-igs");
      out.best = std::move(e);
    } catch (const NumericError &err) {
      out.best.diagnostic = std::string("Q_IGS failed: ") + err.what();
    }
  }
  out.population = std::move(pop);
  return out;
}

SearchResult random_search(const SearchConfig &config, const Slice &train, const Slice &valid) {
  config.validate();
  SearchResult out;
  out.eta = resolve_eta(config, valid);
  const std::size_t T = config.budget;
  std::vector<AdaptiveModel> models(T);
  for (std::size_t i = 0; i < T; ++i) {
    Rng rng(derive_seed(config.seed, {0, i}));
    models[i] = generate_model(config, rng);
  }
  std::vector<Timed> evaluated(T);
  parallel_for(T, config.jobs, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    evaluated[i].model = evaluate(models[i], train, valid, out.eta, config.fit, config.kalman ? config.qigs_in_loop : 0);
    evaluated[i].wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  });
  std::vector<EvaluatedModel> all;
  double best = kInf;
  for (std::size_t i = 0; i < T; ++i) {
    EvaluatedModel e = std::move(evaluated[i].model);
    e.lineage.operators = {"generate"};
    out.audit.push_back(record_of(e, 0, i, config.log_wall_time, evaluated[i].wall_ms));
    best = std::min(best, e.loss);
    out.best_trace.push_back(best);
    all.push_back(std::move(e));
  }
  out.best = all[argmin(all)];
  return out;
}

} // namespace gamevo
