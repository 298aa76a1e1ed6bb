#include "gamevo/presets.hpp"

#include <stdexcept>

namespace gamevo {

Formula sota_formula(int h, const SotaOptions &o) {
  if (h < 0 || h > 23) throw std::invalid_argument("hour must lie in 0..23");
  Formula f;
  f.effects.push_back(Effect::univariate(o.temperature, BasisSpec::cubic(o.spline_size)));
  f.effects.push_back(Effect::univariate(o.temperature, BasisSpec::cubic(o.spline_size), ExpSmooth{o.alpha}));
  f.effects.push_back(Effect::univariate(o.cloud, BasisSpec::cubic(o.spline_size)));
  f.effects.push_back(Effect::univariate(o.wind, BasisSpec::cubic(o.spline_size)));
  f.effects.push_back(Effect::univariate("Day", BasisSpec::categorical(7)));
  f.effects.push_back(Effect::univariate("Break", BasisSpec::categorical(o.break_modalities)));
  f.effects.push_back(Effect::univariate("PosYear", BasisSpec::cyclic(o.spline_size)));
  return f;
}

std::vector<Preset> presets(const SotaOptions &options) {
  return {{"sota", [options](int h) { return sota_formula(h, options); },
           "hand-crafted hourly load model: temperature, smoothed temperature, cloud cover, wind, "
           "day of week, school break and position in the year"}};
}

Preset find_preset(const std::string &name, const SotaOptions &options) {
  for (auto &p : presets(options)) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown preset " + name);
}

std::size_t seed_population_with(const Formula &preset, std::vector<AdaptiveModel> &population, Rng &rng, bool kalman,
                                 double q0) {
  if (population.empty()) throw std::invalid_argument("empty population");
  const std::size_t slot = uniform_index(rng, population.size());
  AdaptiveModel m;
  m.formula = preset;
  if (kalman) m.q_diag = std::vector<double>(preset.size(), q0);
  population[slot] = std::move(m);
  return slot;
}

} // namespace gamevo
