#pragma once

// Synthetic load-like datasets generated from a known additive formula, used
// as ground truth for recovery and adaptation experiments.

#include "gamevo/dataset.hpp"
#include "gamevo/formula.hpp"
#include "gamevo/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace gamevo {

struct SynthEffect {
  Effect effect;                     // univariate
  std::function<double(double)> fn;  // applied to the engineered covariate value
};

struct Drift {
  std::size_t effect = 0;
  std::size_t start = 0; // first drifting row
  std::size_t end = 0;   // row where the target weight is reached; held afterwards
  double from = 1.0;
  double to = 1.5;
};

struct SynthSpec {
  std::size_t n = 2000;
  std::int64_t start = 1483228800; // 2017-01-01T00:00:00Z
  std::int64_t step = 86400;
  int offset_seconds = 0;
  double level = 50.0;
  double noise_sigma = 1.0;
  std::vector<SynthEffect> effects; // empty: default three-effect generator
  std::optional<Drift> drift;
};

struct SynthResult {
  DatasetPtr data;
  AdaptiveModel generating;
  Eigen::MatrixXd theta;       // n x K weight schedule
  std::vector<double> signal;  // noise-free target
};

// Registry of the generated frame: Temp, Cloud, Wind (numeric), PosYear
// (cyclic, 1), Day (7), Month (12), Weekend (2), Noise (numeric decoy).
CovariateRegistry synth_registry();

// s(Temp) + cat(Day) + s(PosYear, cc) with fixed true functions.
std::vector<SynthEffect> default_synth_effects();

SynthResult synth_generate(const SynthSpec &spec, std::uint64_t seed);

} // namespace gamevo
