#include "gamevo/adapt.hpp"

#include "gamevo/calendar.hpp"
#include "gamevo/error.hpp"
#include "gamevo/kernels.hpp"
#include "gamevo/text.hpp"

#include <cmath>

namespace gamevo {

KalmanState KalmanState::initial(std::span<const double> q_diag) {
  const auto k = static_cast<Eigen::Index>(q_diag.size());
  KalmanState s;
  s.theta = Eigen::VectorXd::Ones(k);
  s.P = Eigen::MatrixXd::Zero(k, k);
  s.q = Eigen::Map<const Eigen::VectorXd>(q_diag.data(), k);
  return s;
}

double kalman_predict(const KalmanState &state, std::span<const double> f) {
  if (f.size() != state.dim()) throw DataError("feature vector length does not match the state");
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += state.theta[static_cast<Eigen::Index>(k)] * f[k];
  return s;
}

void kalman_update(KalmanState &state, std::span<const double> f, double y) {
  const auto k = static_cast<Eigen::Index>(state.dim());
  if (static_cast<Eigen::Index>(f.size()) != k) throw DataError("feature vector length does not match the state");
  if (!std::isfinite(y)) throw NumericError("non-finite observation");
  const Eigen::Map<const Eigen::VectorXd> fv(f.data(), k);
  if (!fv.allFinite()) throw NumericError("non-finite effect contribution");
  state.P.diagonal() += state.q;
  const double e = y - kalman_predict(state, f);
  const Eigen::VectorXd u = state.P * fv;
  const double s = fv.dot(u) + 1.0;
  const Eigen::VectorXd gain = u / s;
  state.theta += gain * e;
  // Joseph form (I - k f^T) P (I - k f^T)^T + k k^T, expanded.
  state.P += -gain * u.transpose() - u * gain.transpose() + (s * gain) * gain.transpose();
  state.P = 0.5 * (state.P + state.P.transpose()).eval();
}

double kalman_step(KalmanState &state, std::span<const double> f, double y) {
  const double forecast = kalman_predict(state, f);
  kalman_update(state, f, y);
  return forecast;
}

FilterTrace run_filter(const Eigen::MatrixXd &contributions, double intercept, KalmanState &state,
                       const std::function<double(std::size_t)> &observe,
                       const std::function<void(std::size_t, double)> &on_forecast) {
  const std::size_t n = static_cast<std::size_t>(contributions.rows());
  const auto k = contributions.cols();
  FilterTrace out;
  out.forecast.resize(n);
  out.theta.resize(static_cast<Eigen::Index>(n), k);
  std::vector<double> f(static_cast<std::size_t>(k));
  for (std::size_t t = 0; t < n; ++t) {
    for (Eigen::Index j = 0; j < k; ++j) f[j] = contributions(static_cast<Eigen::Index>(t), j);
    out.theta.row(static_cast<Eigen::Index>(t)) = state.theta.transpose();
    out.forecast[t] = intercept + kalman_predict(state, f);
    if (on_forecast) on_forecast(t, out.forecast[t]);
    const double y = observe(t);
    kalman_update(state, f, y - intercept);
  }
  return out;
}

AdaptiveForecast kalman_forecast(const FittedGam &fitted, const std::optional<std::vector<double>> &q_diag,
                                 const Slice &rows, KalmanState *state) {
  AdaptiveForecast out;
  out.fixed = predict_fixed(fitted, rows);
  const auto k = static_cast<Eigen::Index>(fitted.formula.effects.size());
  if (!q_diag) {
    out.forecast = out.fixed.values;
    out.theta = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(rows.size()), k);
    return out;
  }
  if (static_cast<Eigen::Index>(q_diag->size()) != k) throw DataError("q_diag length does not match K");
  KalmanState local = KalmanState::initial(*q_diag);
  KalmanState &st = state ? *state : local;
  if (state && state->dim() == 0) *state = local;
  const std::vector<double> y = rows.target();
  auto trace = run_filter(out.fixed.contributions, fitted.intercept(), st, [&](std::size_t t) { return y[t]; });
  out.forecast = std::move(trace.forecast);
  out.theta = std::move(trace.theta);
  return out;
}

double one_step_rmse(const Eigen::MatrixXd &contributions, double intercept, std::span<const double> y,
                     std::span<const double> q_diag) {
  KalmanState st = KalmanState::initial(q_diag);
  const auto trace = run_filter(contributions, intercept, st, [&](std::size_t t) { return y[t]; });
  const double sq = kernels::squared_distance(y, trace.forecast);
  return std::sqrt(sq / static_cast<double>(y.size()));
}

QigsResult q_igs(const Eigen::MatrixXd &contributions, double intercept, std::span<const double> y,
                 std::vector<double> q0, int iterations, const QigsOptions &options) {
  if (q0.empty()) throw DataError("q_igs requires K >= 1");
  if (iterations < 1) throw DataError("q_igs requires at least one iteration");
  for (double q : q0) {
    if (!(q > 0.0)) throw DataError("q_igs requires positive initial values");
  }
  QigsResult out;
  out.q = std::move(q0);
  double best = one_step_rmse(contributions, intercept, y, out.q);
  out.trace.push_back(best);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (std::size_t j = 0; j < out.q.size(); ++j) {
      const double base = out.q[j];
      double best_value = base;
      for (double m : options.multipliers) {
        if (m == 1.0) continue;
        std::vector<double> cand = out.q;
        cand[j] = base * m;
        double v = std::numeric_limits<double>::infinity();
        try {
          v = one_step_rmse(contributions, intercept, y, cand);
        } catch (const NumericError &) {
        }
        if (v < best) {
          best = v;
          best_value = cand[j];
        }
      }
      if (best_value != base) {
        out.q[j] = best_value;
        changed = true;
      }
    }
    out.trace.push_back(best);
    out.iterations = it + 1;
    if (!changed) break;
  }
  return out;
}

QigsResult q_igs(const FittedGam &fitted, const Slice &train, std::vector<double> q0, int iterations,
                 const QigsOptions &options) {
  const Prediction p = predict_fixed(fitted, train);
  const std::vector<double> y = train.target();
  return q_igs(p.contributions, fitted.intercept(), y, std::move(q0), iterations, options);
}

void write_theta_csv(const Slice &rows, const Eigen::MatrixXd &theta, std::ostream &out) {
  out << "timestamp";
  for (Eigen::Index k = 0; k < theta.cols(); ++k) out << ",theta_" << (k + 1);
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << format_iso8601(rows.timestamp(i), rows.data->offset_seconds());
    for (Eigen::Index k = 0; k < theta.cols(); ++k) out << ',' << format_double(theta(static_cast<Eigen::Index>(i), k));
    out << '\n';
  }
}

} // namespace gamevo
