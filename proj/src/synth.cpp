#include "gamevo/synth.hpp"

#include "gamevo/calendar.hpp"
#include "gamevo/error.hpp"
#include "gamevo/features.hpp"

#include <cmath>
#include <numbers>

namespace gamevo {

CovariateRegistry synth_registry() {
  return CovariateRegistry({Covariate::numeric("Temp"), Covariate::numeric("Cloud"), Covariate::numeric("Wind"),
                            Covariate::cyclic("PosYear", 1.0), Covariate::categorical("Day", 7),
                            Covariate::categorical("Month", 12), Covariate::categorical("Weekend", 2),
                            Covariate::numeric("Noise")});
}

std::vector<SynthEffect> default_synth_effects() {
  constexpr double pi = std::numbers::pi;
  return {
      {Effect::univariate("Temp", BasisSpec::cubic(10)), [](double t) { return 0.08 * (t - 16.0) * (t - 16.0); }},
      {Effect::univariate("Day", BasisSpec::categorical(7)),
       [](double d) {
         static const double by_day[8] = {0.0, 1.0, 1.5, 1.5, 1.2, 0.5, -4.0, -6.0};
         return by_day[static_cast<int>(d)];
       }},
      {Effect::univariate("PosYear", BasisSpec::cyclic(10)), [pi](double p) { return 3.0 * std::cos(2.0 * pi * p); }},
  };
}

SynthResult synth_generate(const SynthSpec &spec, std::uint64_t seed) {
  if (spec.n < 2) throw DataError("synthetic dataset needs at least 2 rows");
  constexpr double pi = std::numbers::pi;
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t n = spec.n;
  std::vector<std::int64_t> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = spec.start + static_cast<std::int64_t>(i) * spec.step;

  auto data = std::make_shared<TimeDataset>(ts, spec.offset_seconds, std::vector<double>(n, 0.0));
  data->add_calendar();
  const auto &pos = data->column("PosYear").values;
  const double hours_per_step = static_cast<double>(spec.step) / 3600.0;
  const double temp_phi = std::pow(0.8, hours_per_step / 24.0);

  std::vector<double> temp(n), cloud(n), wind(n), noise(n);
  double a = 0.0, c = 0.0, w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a = temp_phi * a + std::sqrt(1.0 - temp_phi * temp_phi) * 3.0 * gauss(rng);
    c = 0.7 * c + 0.7 * gauss(rng);
    w = 0.6 * w + 0.8 * gauss(rng);
    temp[i] = 12.0 - 8.0 * std::cos(2.0 * pi * (pos[i] - 0.05)) + a;
    cloud[i] = 1.0 / (1.0 + std::exp(-c));
    wind[i] = 4.0 + 2.0 * std::abs(w);
    noise[i] = gauss(rng);
  }
  // Rebuild with the final target once the covariates exist.
  std::vector<SynthEffect> effects = spec.effects.empty() ? default_synth_effects() : spec.effects;
  TimeDataset probe = *data;
  probe.add_column(Covariate::numeric("Temp"), temp);
  probe.add_column(Covariate::numeric("Cloud"), cloud);
  probe.add_column(Covariate::numeric("Wind"), wind);
  probe.add_column(Covariate::numeric("Noise"), noise);

  SynthResult out;
  const std::size_t k = effects.size();
  out.theta = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  if (spec.drift) {
    const Drift &d = *spec.drift;
    if (d.effect >= k || d.end < d.start) throw DataError("invalid drift schedule");
    for (std::size_t i = 0; i < n; ++i) {
      double v = d.from;
      if (i >= d.end) {
        v = d.to;
      } else if (i >= d.start) {
        v = d.from + (d.to - d.from) * static_cast<double>(i - d.start) / static_cast<double>(d.end - d.start);
      }
      out.theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d.effect)) = v;
    }
  }
  out.signal.assign(n, spec.level);
  for (std::size_t e = 0; e < k; ++e) {
    const Effect &eff = effects[e].effect;
    if (eff.bivariate()) throw DataError("synthetic effects must be univariate");
    const auto cols = engineer(probe, eff.covariates[0], eff.engineering[0]);
    std::vector<double> g(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += g[i] = effects[e].fn(cols[0].values[i]);
    mean /= static_cast<double>(n);
    // Weights scale the centered effect; the level stays put.
    for (std::size_t i = 0; i < n; ++i) {
      out.signal[i] += mean + out.theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e)) * (g[i] - mean);
    }
    out.generating.formula.effects.push_back(eff);
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = out.signal[i] + spec.noise_sigma * gauss(rng);

  auto final = std::make_shared<TimeDataset>(ts, spec.offset_seconds, y);
  for (const auto &col : probe.columns()) final->add_column(col.covariate, col.values);
  out.data = final;
  return out;
}

} // namespace gamevo
