#pragma once

// Penalized least-squares fitting of additive formulae with GCV smoothing
// parameter selection.

#include "gamevo/basis.hpp"
#include "gamevo/dataset.hpp"
#include "gamevo/formula.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace gamevo {

struct FitOptions {
  BasisOptions basis;
  double log10_lambda_min = -6.0;
  double log10_lambda_max = 6.0;
  double log10_lambda_step = 0.5;
  int max_passes = 3;
  // Smallest accepted eigenvalue ratio of the Jacobi-scaled G + sum S_j.
  double identifiability_tol = 1e-11;
};

// Re-evaluation state and column span of one effect.
struct EffectTerm {
  std::vector<BasisEvaluator> blocks; // one per engineered column (lag sets give several)
  std::size_t start = 0;              // first design column, the intercept being column 0
  std::size_t count = 0;
};

struct PenaltyTerm {
  std::size_t effect = 0;
  std::size_t start = 0;
  Eigen::MatrixXd matrix; // normalized, count x count of the effect span
};

struct DesignMatrix {
  Eigen::MatrixXd X; // n x p, column-major, intercept first
  std::vector<EffectTerm> effects;
  std::vector<PenaltyTerm> penalties;
  std::size_t unseen = 0;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }
};

DesignMatrix design_matrix(const Formula &formula, const Slice &train, const FitOptions &options = {});

// Columns of one effect evaluated on `rows` using stored anchors.
Eigen::MatrixXd effect_design(const Effect &effect, const EffectTerm &term, const Slice &rows,
                              std::size_t *unseen = nullptr);

// X^T X, X^T y and y^T y cached for repeated penalized solves.
class PenalizedSystem {
public:
  PenalizedSystem(const DesignMatrix &design, std::span<const double> y);

  struct Solution {
    Eigen::VectorXd beta;
    double rss = 0.0;
    double edf = 0.0;
    double gcv = 0.0;
    int jitter_steps = 0;
  };

  // Throws NumericError when the system stays singular after jitter.
  Solution solve(std::span<const double> lambdas) const;
  // Penalty sum for the given smoothing parameters.
  Eigen::MatrixXd penalty(std::span<const double> lambdas) const;
  // Throws NumericError naming the effect span when G + sum S_j is singular.
  void check_identifiable(double tol) const;

  std::size_t rows() const { return n_; }
  std::size_t cols() const { return p_; }
  std::size_t penalty_count() const { return design_.penalties.size(); }
  const Eigen::MatrixXd &gram() const { return gram_; }

private:
  const DesignMatrix &design_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd xty_;
  std::size_t n_, p_;
};

// V = n RSS / (n - tr A)^2. Throws NumericError when n <= tr A.
double gcv_score(const PenalizedSystem &system, std::span<const double> lambdas);

// tr(X (X^T X + lambda S)^-1 X^T) through the eigenvalues of R^-T S R^-1;
// lambda may be +infinity. Throws NumericError when X is rank deficient.
double edf(const Eigen::MatrixXd &X, const Eigen::MatrixXd &S, double lambda = 1.0);

struct FittedGam {
  Formula formula;
  std::vector<EffectTerm> effects;
  Eigen::VectorXd beta;
  std::vector<double> lambdas;            // one per penalty
  std::vector<std::size_t> lambda_effect; // owning effect of each lambda
  double edf = 0.0;
  double gcv = 0.0;
  double rss = 0.0;
  bool converged = true;
  std::size_t n_train = 0;
  Eigen::VectorXd fitted; // training fitted values
  std::vector<std::string> warnings;

  double intercept() const { return beta.size() ? beta[0] : 0.0; }
  std::size_t columns() const { return static_cast<std::size_t>(beta.size()); }
};

FittedGam fit(const Formula &formula, const Slice &train, const FitOptions &options = {});

struct Prediction {
  std::vector<double> values;
  Eigen::MatrixXd contributions; // n x K
  std::size_t unseen = 0;
};

// intercept + contributions summed left to right.
Prediction predict_fixed(const FittedGam &fitted, const Slice &rows);

} // namespace gamevo
