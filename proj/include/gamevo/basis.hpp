#pragma once

// Design blocks and penalty matrices for the basis families.
//
// Splines are P-splines: B-splines of degree min(3, q-1) on equally spaced
// knots with a second-order difference penalty. Cyclic splines wrap both the
// knots and the difference operator. Smooth blocks are column-centered over
// the training rows and their last column is dropped.

#include "gamevo/formula.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace gamevo {

struct BasisOptions {
  bool quantile_knots = false;
};

// Everything needed to re-evaluate a block at new covariate values.
struct BasisEvaluator {
  BasisFamily family = BasisFamily::Linear;
  int size = 1;   // raw columns for splines, m for categorical
  int degree = 3; // splines
  double lo = 0.0, hi = 1.0;
  std::vector<double> knots;             // cubic spline knot vector (size + degree + 1)
  std::vector<int> levels;               // categorical: one column per level
  int reference = 0;                     // categorical: dropped level, 0 when none
  int modalities = 0;                    // categorical
  std::vector<BasisEvaluator> marginals; // tensor products
  std::vector<double> means;             // column centering, empty when uncentered
  bool drop_last = false;

  std::size_t raw_columns() const;
  std::size_t columns() const;

  // One input span per marginal (a single span for univariate families).
  // Unseen categorical levels give zero rows and are counted in `unseen`.
  Eigen::MatrixXd evaluate(const std::vector<std::span<const double>> &inputs, std::size_t *unseen = nullptr) const;
  Eigen::MatrixXd evaluate(std::span<const double> values, std::size_t *unseen = nullptr) const;
  Eigen::MatrixXd evaluate_raw(const std::vector<std::span<const double>> &inputs,
                               std::size_t *unseen = nullptr) const;
};

struct BasisBlock {
  Eigen::MatrixXd design;                // n x p
  std::vector<Eigen::MatrixXd> penalties; // each p x p; empty when unpenalized
  BasisEvaluator evaluator;
  bool centered = false;

  std::size_t columns() const { return static_cast<std::size_t>(design.cols()); }
  // Sum of the penalties (zero matrix when unpenalized).
  Eigen::MatrixXd penalty() const;
};

// Second-order difference penalty D^T D on q coefficients; cyclic wraps D.
Eigen::MatrixXd difference_penalty(int q, bool cyclic);

// Uncentered block; `period` > 0 fixes the cyclic window to [0, period).
BasisBlock raw_univariate(BasisFamily family, int q, std::span<const double> values, double period = 0.0,
                          const BasisOptions &options = {});

// Centered univariate block (linear, cubic or cyclic).
BasisBlock build_univariate(BasisFamily family, int q, std::span<const double> values, double period = 0.0,
                            const BasisOptions &options = {});

// Indicator columns for observed levels. When 0 does not occur the most
// frequent level (lowest on ties) is the dropped reference.
BasisBlock build_categorical(int m, std::span<const double> values);

// One indicator per observed non-zero level with an identity penalty, used as
// a tensor marginal.
BasisBlock raw_indicator(int m, std::span<const double> values);

// Row-wise products in row-major (iA, iB) column order, penalties S_A x I and
// I x S_B. The result is uncentered.
BasisBlock tensor_product(const BasisBlock &a, const BasisBlock &b);

// Subtracts training column means and optionally drops the last column.
BasisBlock center(BasisBlock block, bool drop_last = true);

// Row-major multi-index (1-based) of flat index i (1-based) over dims.
std::vector<int> flatten_index(std::size_t i, std::span<const int> dims);

nlohmann::json to_json(const BasisEvaluator &evaluator);
BasisEvaluator evaluator_from_json(const nlohmann::json &j);

} // namespace gamevo
