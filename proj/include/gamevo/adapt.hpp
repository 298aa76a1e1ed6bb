#pragma once

// State-space adaptation of fitted effect weights: a sigma^2-normalized Kalman
// filter over theta with random-walk dynamics, and a coordinate grid search
// for the diagonal of Q.

#include "gamevo/fit.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace gamevo {

struct KalmanState {
  Eigen::VectorXd theta;
  Eigen::MatrixXd P;
  Eigen::VectorXd q;

  // theta = 1, P = 0.
  static KalmanState initial(std::span<const double> q_diag);
  std::size_t dim() const { return static_cast<std::size_t>(theta.size()); }
};

// theta^T f summed left to right from 0.
double kalman_predict(const KalmanState &state, std::span<const double> f);
// Time update P += diag(q) followed by the measurement update with y.
void kalman_update(KalmanState &state, std::span<const double> f, double y);
// One-step-ahead forecast emitted before y is consumed, then the update.
double kalman_step(KalmanState &state, std::span<const double> f, double y);

struct FilterTrace {
  std::vector<double> forecast; // intercept + theta_t^T f_t
  Eigen::MatrixXd theta;        // row t: weights used for forecast t
};

// Runs the filter over contribution rows. `observe(t)` is called only after
// forecast t has been emitted through `on_forecast` (when given).
FilterTrace run_filter(const Eigen::MatrixXd &contributions, double intercept, KalmanState &state,
                       const std::function<double(std::size_t)> &observe,
                       const std::function<void(std::size_t, double)> &on_forecast = {});

struct AdaptiveForecast {
  std::vector<double> forecast;
  Eigen::MatrixXd theta;
  Prediction fixed;
};

// Without q_diag the forecasts are the fixed predictions and theta stays 1.
AdaptiveForecast kalman_forecast(const FittedGam &fitted, const std::optional<std::vector<double>> &q_diag,
                                 const Slice &rows, KalmanState *state = nullptr);

// RMSE of one-step-ahead forecasts on precomputed contributions.
double one_step_rmse(const Eigen::MatrixXd &contributions, double intercept, std::span<const double> y,
                     std::span<const double> q_diag);

struct QigsOptions {
  std::vector<double> multipliers{1e-2, 1e-1, 1.0, 10.0, 1e2};
};

struct QigsResult {
  std::vector<double> q;
  std::vector<double> trace; // objective before the first and after each iteration
  int iterations = 0;
};

QigsResult q_igs(const FittedGam &fitted, const Slice &train, std::vector<double> q0, int iterations,
                 const QigsOptions &options = {});
// Same search on precomputed training contributions.
QigsResult q_igs(const Eigen::MatrixXd &contributions, double intercept, std::span<const double> y,
                 std::vector<double> q0, int iterations, const QigsOptions &options = {});

// timestamp,theta_1..theta_K
void write_theta_csv(const Slice &rows, const Eigen::MatrixXd &theta, std::ostream &out);

} // namespace gamevo
