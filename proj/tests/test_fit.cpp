#include "gamevo/dsl.hpp"
#include "gamevo/error.hpp"
#include "gamevo/fit.hpp"
#include "gamevo/metrics.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace gamevo;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index p, Rng &rng) {
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = 2.0 * uniform01(rng) - 1.0;
  }
  return x;
}

// Dense influence matrix oracle.
double brute_gcv(const Eigen::MatrixXd &x, const Eigen::MatrixXd &s, const Eigen::VectorXd &y) {
  const Eigen::MatrixXd h = x.transpose() * x + s;
  const Eigen::MatrixXd a = x * h.partialPivLu().solve(x.transpose());
  const double n = static_cast<double>(x.rows());
  const double rss = (y - a * y).squaredNorm();
  const double tr = a.trace();
  return n * rss / ((n - tr) * (n - tr));
}

} // namespace

TEST(Edf, UnpenalizedEqualsColumnCount) {
  Rng rng(1);
  for (Eigen::Index p : {1, 3, 8, 25}) {
    const Eigen::MatrixXd x = random_matrix(100, p, rng);
    EXPECT_NEAR(edf(x, Eigen::MatrixXd::Zero(p, p)), static_cast<double>(p), 1e-8);
  }
}

TEST(Edf, InfiniteLambdaLeavesTheNullSpace) {
  Rng rng(2);
  const auto x = fixtures::uniform_values(400, rng);
  const BasisBlock raw = raw_univariate(BasisFamily::CubicSpline, 10, x);
  EXPECT_NEAR(edf(raw.design, raw.penalty(), std::numeric_limits<double>::infinity()), 2.0, 1e-6);
  EXPECT_NEAR(edf(raw.design, raw.penalty(), 1e12), 2.0, 1e-5);

  const BasisBlock c = build_univariate(BasisFamily::CubicSpline, 10, x);
  Eigen::MatrixXd full(400, 10);
  full.col(0).setOnes();
  full.rightCols(9) = c.design;
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(10, 10);
  s.bottomRightCorner(9, 9) = c.penalty();
  EXPECT_NEAR(edf(full, s, std::numeric_limits<double>::infinity()), 2.0, 1e-6);
}

TEST(Edf, MatchesDenseTrace) {
  Rng rng(3);
  const Eigen::MatrixXd x = random_matrix(80, 6, rng);
  const Eigen::MatrixXd d = random_matrix(4, 6, rng);
  const Eigen::MatrixXd s = d.transpose() * d;
  for (double lambda : {1e-3, 0.1, 1.0, 30.0}) {
    const Eigen::MatrixXd a = x * (x.transpose() * x + lambda * s).inverse() * x.transpose();
    EXPECT_NEAR(edf(x, s, lambda), a.trace(), 1e-9);
  }
}

TEST(Design, ColumnArithmetic) {
  Rng rng(4);
  const std::size_t n = 300;
  auto d = std::make_shared<TimeDataset>(fixtures::daily(n), 0, fixtures::uniform_values(n, rng));
  d->add_calendar();
  d->add_column(Covariate::numeric("Temp"), fixtures::uniform_values(n, rng, -5, 30));
  const Formula f = parse_formula("s(Temp, bs=cr, k=10) + cat(Day, m=7)");
  const DesignMatrix dm = design_matrix(f, all_rows(d));
  EXPECT_EQ(dm.cols(), 16u);
  ASSERT_EQ(dm.effects.size(), 2u);
  EXPECT_EQ(dm.effects[0].start, 1u);
  EXPECT_EQ(dm.effects[0].count, 9u);
  EXPECT_EQ(dm.effects[1].start, 10u);
  EXPECT_EQ(dm.effects[1].count, 6u);
}

TEST(Gcv, MatchesDenseInfluenceMatrix) {
  const auto b = fixtures::sin_bench(500, 0, 0.1, 7);
  const Formula f = parse_formula("s(x, bs=cr, k=20)");
  const DesignMatrix dm = design_matrix(f, b.train);
  const auto y = b.train.target();
  const PenalizedSystem sys(dm, y);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  Rng rng(8);
  for (int i = 0; i < 10; ++i) {
    const double lambda = std::pow(10.0, -4.0 + 8.0 * uniform01(rng));
    const std::vector<double> l{lambda};
    const double v = gcv_score(sys, l);
    const double ref = brute_gcv(dm.X, sys.penalty(l), yv);
    EXPECT_LE(std::abs(v - ref), 1e-8 * ref) << lambda;
  }
}

TEST(Fit, SinBenchmark) {
  const auto b = fixtures::sin_bench(500, 500, 0.1, 9);
  const FittedGam g = fit(parse_formula("s(x, bs=cr, k=20)"), b.train);
  const auto y = b.train.target();
  std::vector<double> fitted(g.fitted.data(), g.fitted.data() + g.fitted.size());
  EXPECT_LE(metrics(y, fitted).rmse, 0.11);
  EXPECT_GT(g.edf, 3.0);
  EXPECT_LT(g.edf, 15.0);
  const Prediction p = predict_fixed(g, b.valid);
  EXPECT_LE(metrics(b.valid.target(), p.values).rmse, 0.12);
}

TEST(Fit, PredictReproducesTrainingFit) {
  const auto b = fixtures::sin_bench(200, 0, 0.2, 10);
  const FittedGam g = fit(parse_formula("s(x, bs=cr, k=8) "), b.train);
  const Prediction p = predict_fixed(g, b.train);
  for (std::size_t i = 0; i < p.values.size(); ++i) EXPECT_NEAR(p.values[i], g.fitted[static_cast<Eigen::Index>(i)], 1e-9);
  double sum = g.intercept();
  for (Eigen::Index k = 0; k < p.contributions.cols(); ++k) sum += p.contributions(0, k);
  EXPECT_NEAR(sum, p.values[0], 1e-12);
}

TEST(Fit, GcvSelectionIsAGridMinimumAlongEachAxis) {
  const auto b = fixtures::sin_bench(300, 0, 0.3, 12);
  const Formula f = parse_formula("s(x, bs=cr, k=15)");
  const FittedGam g = fit(f, b.train);
  const DesignMatrix dm = design_matrix(f, b.train);
  const auto y = b.train.target();
  const PenalizedSystem sys(dm, y);
  ASSERT_EQ(g.lambdas.size(), 1u);
  for (double e = -6.0; e <= 6.0; e += 0.5) {
    const std::vector<double> l{std::pow(10.0, e)};
    EXPECT_GE(gcv_score(sys, l), g.gcv - 1e-12);
  }
}

TEST(Fit, DuplicatedCovariateIsStructurallySingular) {
  Rng rng(13);
  const std::size_t n = 200;
  auto d = std::make_shared<TimeDataset>(fixtures::daily(n), 0, fixtures::uniform_values(n, rng));
  const auto x = fixtures::uniform_values(n, rng);
  d->add_column(Covariate::numeric("a"), x);
  d->add_column(Covariate::numeric("b"), x);
  try {
    fit(parse_formula("lin(a) + lin(b)"), all_rows(d));
    FAIL();
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("effect 1"), std::string::npos) << e.what();
  }
}

TEST(Fit, GcvUndefinedWhenEdfReachesN) {
  Rng rng(14);
  const std::size_t n = 6;
  auto d = std::make_shared<TimeDataset>(fixtures::daily(n), 0, fixtures::uniform_values(n, rng));
  d->add_column(Covariate::numeric("a"), fixtures::uniform_values(n, rng));
  const Formula f = parse_formula("s(a, bs=cr, k=6)");
  const DesignMatrix dm = design_matrix(f, all_rows(d));
  const auto y = all_rows(d).target();
  const PenalizedSystem sys(dm, y);
  const std::vector<double> tiny{0.0};
  EXPECT_THROW(gcv_score(sys, tiny), NumericError);
}

TEST(Fit, EmptyDataIsRejected) {
  const auto b = fixtures::sin_bench(10, 0, 0.1, 1);
  EXPECT_THROW(fit(parse_formula("s(x, bs=cr, k=5)"), Slice{b.data, {}}), DataError);
}
