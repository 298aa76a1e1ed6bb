#pragma once

// Built-in reference formulae.

#include "gamevo/formula.hpp"
#include "gamevo/rng.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gamevo {

struct SotaOptions {
  double alpha = 0.95; // smoothing of the lagged-temperature term
  int spline_size = 10;
  int break_modalities = 5;
  std::string temperature = "Temp";
  std::string cloud = "Cloud";
  std::string wind = "Wind";
};

// s(T) + s(smooth T) + s(C) + s(W) + cat(Day) + cat(Break) + cc(PosYear).
// The structure does not depend on the hour; hours select rows instead.
// Throws std::invalid_argument when h is outside 0..23.
Formula sota_formula(int h, const SotaOptions &options = {});

struct Preset {
  std::string name;
  std::function<Formula(int)> formula;
  std::string doc;
};

std::vector<Preset> presets(const SotaOptions &options = {});
// Throws std::invalid_argument for an unknown name.
Preset find_preset(const std::string &name, const SotaOptions &options = {});

// Replaces one uniformly chosen member with the preset. With `kalman` a missing
// q_diag is filled with q0; without it any q_diag is dropped. Returns the slot.
std::size_t seed_population_with(const Formula &preset, std::vector<AdaptiveModel> &population, Rng &rng,
                                 bool kalman = false, double q0 = 1e-6);

} // namespace gamevo
