#include "gamevo/adapt.hpp"
#include "gamevo/dsl.hpp"
#include "gamevo/error.hpp"
#include "gamevo/metrics.hpp"
#include "gamevo/synth.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gamevo;

TEST(Kalman, ZeroQIsTheFixedModel) {
  SynthSpec spec;
  spec.n = 10000;
  spec.step = 3600;
  const auto s = synth_generate(spec, 5);
  const Slice all = all_rows(s.data);
  const FittedGam g = fit(s.generating.formula, Slice{s.data, fixtures::iota(0, 3000)});
  const auto fixed = predict_fixed(g, all);
  const std::vector<double> zeros(g.formula.size(), 0.0);
  const auto adaptive = kalman_forecast(g, zeros, all);
  ASSERT_EQ(adaptive.forecast.size(), 10000u);
  for (std::size_t i = 0; i < fixed.values.size(); ++i) ASSERT_EQ(adaptive.forecast[i], fixed.values[i]) << i;
  EXPECT_EQ(adaptive.theta, Eigen::MatrixXd::Ones(10000, static_cast<Eigen::Index>(g.formula.size())));
}

TEST(Kalman, ConstantFeatureIsRecursiveLeastSquares) {
  Rng rng(3);
  std::normal_distribution<double> noise(0.0, 2.0);
  const double p0 = 1e4, theta0 = 1.0;
  KalmanState st = KalmanState::initial(std::vector<double>{0.0});
  st.P(0, 0) = p0;
  const std::vector<double> f{1.0};
  double sum = 0.0;
  for (int t = 1; t <= 2000; ++t) {
    const double y = 7.5 + noise(rng);
    kalman_update(st, f, y);
    sum += y;
    const double batch = (theta0 / p0 + sum) / (1.0 / p0 + t);
    ASSERT_NEAR(st.theta[0], batch, 1e-6) << t;
    ASSERT_NEAR(st.P(0, 0), 1.0 / (1.0 / p0 + t), 1e-6);
  }
}

TEST(Kalman, ForecastPrecedesObservation) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(5, 2);
  KalmanState st = KalmanState::initial(std::vector<double>{0.1, 0.1});
  std::vector<int> events;
  run_filter(
      c, 0.0, st,
      [&](std::size_t t) {
        events.push_back(-static_cast<int>(t) - 1);
        return 3.0;
      },
      [&](std::size_t t, double) { events.push_back(static_cast<int>(t) + 1); });
  EXPECT_EQ(events, (std::vector<int>{1, -1, 2, -2, 3, -3, 4, -4, 5, -5}));
}

TEST(Kalman, RejectsNonFiniteInput) {
  KalmanState st = KalmanState::initial(std::vector<double>{0.1});
  EXPECT_THROW(kalman_update(st, std::vector<double>{1.0}, std::nan("")), NumericError);
  EXPECT_THROW(kalman_update(st, std::vector<double>{INFINITY}, 1.0), NumericError);
  EXPECT_THROW(kalman_update(st, std::vector<double>{1.0, 2.0}, 1.0), DataError);
}

TEST(Kalman, CovarianceStaysSymmetricPositive) {
  Rng rng(8);
  KalmanState st = KalmanState::initial(std::vector<double>{1e-2, 1e-3, 1e-1});
  for (int t = 0; t < 5000; ++t) {
    const std::vector<double> f{uniform01(rng) * 10.0, uniform01(rng) - 0.5, 3.0 * uniform01(rng)};
    kalman_update(st, f, uniform01(rng));
  }
  EXPECT_EQ(st.P, st.P.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(st.P);
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
}

TEST(Kalman, TracksADrift) {
  SynthSpec spec;
  spec.n = 2000;
  spec.drift = Drift{0, 1200, 1500, 1.0, 1.5};
  const auto s = synth_generate(spec, 21);
  const FittedGam g = fit(s.generating.formula, Slice{s.data, fixtures::iota(0, 1200)});
  const Slice test{s.data, fixtures::iota(1200, 2000)};
  const std::vector<double> q(g.formula.size(), 1e-4);
  KalmanState st;
  kalman_forecast(g, q, Slice{s.data, fixtures::iota(0, 1200)}, &st);
  const auto adaptive = kalman_forecast(g, q, test, &st);
  const auto y = test.target();
  EXPECT_LT(metrics(y, adaptive.forecast).rmse, metrics(y, adaptive.fixed.values).rmse);
}

TEST(Qigs, TraceIsNonIncreasing) {
  SynthSpec spec;
  spec.n = 800;
  spec.drift = Drift{2, 200, 700, 1.0, 0.5};
  const auto s = synth_generate(spec, 4);
  const Slice train{s.data, fixtures::iota(0, 800)};
  const FittedGam g = fit(s.generating.formula, train);
  const auto r = q_igs(g, train, std::vector<double>(3, 1e-6), 20);
  ASSERT_EQ(r.trace.size(), static_cast<std::size_t>(r.iterations) + 1);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
  const Prediction p = predict_fixed(g, train);
  EXPECT_DOUBLE_EQ(r.trace.back(), one_step_rmse(p.contributions, g.intercept(), train.target(), r.q));
}

TEST(Qigs, SingleEffectFindsTheGridOptimum) {
  Rng rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t n = 1500;
  const double qstar = 1e-3;
  Eigen::MatrixXd c(static_cast<Eigen::Index>(n), 1);
  std::vector<double> y(n);
  double theta = 1.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double f = 2.0 + std::sin(0.05 * static_cast<double>(t));
    c(static_cast<Eigen::Index>(t), 0) = f;
    theta += std::sqrt(qstar) * gauss(rng);
    y[t] = 10.0 + theta * f + gauss(rng);
  }
  const double q0 = 1e-6;
  const int iterations = 20;
  const auto r = q_igs(c, 10.0, y, {q0}, iterations);
  double grid_best = INFINITY;
  for (int j = -2 * iterations; j <= 2 * iterations; ++j) {
    const double q = q0 * std::pow(10.0, j);
    grid_best = std::min(grid_best, one_step_rmse(c, 10.0, y, std::vector<double>{q}));
  }
  EXPECT_LE(r.trace.back(), grid_best * (1.0 + 1e-12));
  EXPECT_GE(r.q[0], qstar / 100.0);
  EXPECT_LE(r.q[0], qstar * 100.0);
}

TEST(Qigs, Preconditions) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(3, 1);
  const std::vector<double> y{1, 2, 3};
  EXPECT_THROW(q_igs(c, 0.0, y, {}, 5), DataError);
  EXPECT_THROW(q_igs(c, 0.0, y, {0.0}, 5), DataError);
  EXPECT_THROW(q_igs(c, 0.0, y, {1e-3}, 0), DataError);
}
