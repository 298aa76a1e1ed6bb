#include "gamevo/fit.hpp"

#include "gamevo/error.hpp"
#include "gamevo/features.hpp"
#include "gamevo/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <map>

namespace gamevo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<double>> engineered_rows(const Slice &rows, const std::string &name,
                                                 const FeatureEngineering &eng, std::vector<EngineeredColumn> *meta) {
  auto cols = engineer(*rows.data, name, eng);
  std::vector<std::vector<double>> out;
  for (const auto &c : cols) out.push_back(rows.gather(c.values));
  if (meta) *meta = std::move(cols);
  return out;
}

std::vector<BasisBlock> build_effect(const Effect &e, const Slice &train, const BasisOptions &options) {
  std::vector<BasisBlock> blocks;
  if (!e.bivariate()) {
    std::vector<EngineeredColumn> meta;
    const auto cols = engineered_rows(train, e.covariates[0], e.engineering[0], &meta);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (e.basis.family == BasisFamily::Categorical) {
        blocks.push_back(build_categorical(e.basis.size, cols[i]));
      } else {
        const double period = e.basis.family == BasisFamily::CyclicSpline ? meta[i].period : 0.0;
        blocks.push_back(build_univariate(e.basis.family, e.basis.size, cols[i], period, options));
      }
    }
    return blocks;
  }
  std::vector<BasisBlock> marginals;
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<EngineeredColumn> meta;
    const auto cols = engineered_rows(train, e.covariates[i], e.engineering[i], &meta);
    const Marginal &m = e.basis.marginals.at(i);
    if (m.family == BasisFamily::Categorical) {
      marginals.push_back(raw_indicator(m.size, cols[0]));
    } else {
      const double period = m.family == BasisFamily::CyclicSpline ? meta[0].period : 0.0;
      marginals.push_back(raw_univariate(m.family, m.size, cols[0], period, options));
    }
  }
  blocks.push_back(center(tensor_product(marginals[0], marginals[1]), true));
  return blocks;
}

void gemv(const Eigen::MatrixXd &x, const double *beta, double *out) {
  kernels::active().gemv(x.data(), static_cast<std::size_t>(x.rows()), static_cast<std::size_t>(x.cols()), beta, out);
}

std::string span_text(const EffectTerm &t, std::size_t k) {
  return "effect " + std::to_string(k) + " (columns " + std::to_string(t.start) + "-" +
         std::to_string(t.start + t.count - 1) + ")";
}

} // namespace

DesignMatrix design_matrix(const Formula &formula, const Slice &train, const FitOptions &options) {
  if (!train.data || train.empty()) throw DataError("design matrix on empty data");
  const auto n = static_cast<Eigen::Index>(train.size());
  std::vector<std::vector<BasisBlock>> blocks;
  std::size_t p = 1;
  for (std::size_t k = 0; k < formula.effects.size(); ++k) {
    try {
      blocks.push_back(build_effect(formula.effects[k], train, options.basis));
    } catch (const DataError &err) {
      throw DataError("effect " + std::to_string(k) + ": " + err.what());
    }
    for (const auto &b : blocks.back()) p += b.columns();
  }
  DesignMatrix d;
  d.X.resize(n, static_cast<Eigen::Index>(p));
  d.X.col(0).setOnes();
  std::size_t col = 1;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    EffectTerm term;
    term.start = col;
    for (auto &b : blocks[k]) {
      const auto c = static_cast<Eigen::Index>(b.columns());
      d.X.middleCols(static_cast<Eigen::Index>(col), c) = b.design;
      for (auto &s : b.penalties) {
        d.penalties.push_back(PenaltyTerm{k, col, std::move(s)});
      }
      col += b.columns();
      term.blocks.push_back(std::move(b.evaluator));
    }
    term.count = col - term.start;
    d.effects.push_back(std::move(term));
  }
  // Scale each penalty to the Frobenius norm of its span's Gram block.
  for (auto &pt : d.penalties) {
    const auto c = pt.matrix.rows();
    const Eigen::MatrixXd xs = d.X.middleCols(static_cast<Eigen::Index>(pt.start), c);
    const double gn = (xs.transpose() * xs).norm();
    const double sn = pt.matrix.norm();
    if (sn > 0.0 && gn > 0.0) pt.matrix *= gn / sn;
  }
  std::erase_if(d.penalties, [](const PenaltyTerm &pt) { return !(pt.matrix.norm() > 0.0); });
  return d;
}

Eigen::MatrixXd effect_design(const Effect &effect, const EffectTerm &term, const Slice &rows, std::size_t *unseen) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(term.count));
  if (!effect.bivariate()) {
    const auto cols = engineered_rows(rows, effect.covariates[0], effect.engineering[0], nullptr);
    if (cols.size() != term.blocks.size()) throw DataError("effect engineering does not match fitted state");
    Eigen::Index c = 0;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const Eigen::MatrixXd m = term.blocks[i].evaluate(cols[i], unseen);
      out.middleCols(c, m.cols()) = m;
      c += m.cols();
    }
    return out;
  }
  const auto a = engineered_rows(rows, effect.covariates[0], effect.engineering[0], nullptr);
  const auto b = engineered_rows(rows, effect.covariates[1], effect.engineering[1], nullptr);
  out = term.blocks.at(0).evaluate({std::span<const double>(a[0]), std::span<const double>(b[0])}, unseen);
  return out;
}

PenalizedSystem::PenalizedSystem(const DesignMatrix &design, std::span<const double> y)
    : design_(design), n_(design.rows()), p_(design.cols()) {
  if (y.size() != n_) throw DataError("target length does not match design rows");
  y_ = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  gram_.resize(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(p_));
  xty_.resize(static_cast<Eigen::Index>(p_));
  const auto &k = kernels::active();
  k.gram(design.X.data(), n_, p_, gram_.data());
  k.gemv_t(design.X.data(), n_, p_, y_.data(), xty_.data());
}

Eigen::MatrixXd PenalizedSystem::penalty(std::span<const double> lambdas) const {
  if (lambdas.size() != design_.penalties.size()) throw DataError("lambda count does not match penalty count");
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(p_));
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    const auto &pt = design_.penalties[j];
    const auto c = pt.matrix.rows();
    s.block(static_cast<Eigen::Index>(pt.start), static_cast<Eigen::Index>(pt.start), c, c) += lambdas[j] * pt.matrix;
  }
  return s;
}

PenalizedSystem::Solution PenalizedSystem::solve(std::span<const double> lambdas) const {
  const Eigen::MatrixXd h = gram_ + penalty(lambdas);
  const double mean_diag = h.diagonal().mean();
  for (int step = 0; step <= 5; ++step) {
    Eigen::MatrixXd hj = h;
    if (step > 0) hj.diagonal().array() += mean_diag * 1e-10 * std::pow(10.0, step - 1);
    Eigen::LLT<Eigen::MatrixXd> llt(hj);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::MatrixXd &l = llt.matrixLLT();
    bool weak = false;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      if (!(l(i, i) * l(i, i) > 1e-14 * hj(i, i))) weak = true;
    }
    if (weak) continue;
    Solution s;
    s.beta = llt.solve(xty_);
    if (!s.beta.allFinite()) continue;
    Eigen::VectorXd fitted(static_cast<Eigen::Index>(n_));
    gemv(design_.X, s.beta.data(), fitted.data());
    s.rss = kernels::active().squared_distance(y_.data(), fitted.data(), n_);
    s.edf = llt.solve(gram_).trace();
    const double denom = static_cast<double>(n_) - s.edf;
    s.gcv = denom > 0.0 ? static_cast<double>(n_) * s.rss / (denom * denom) : kInf;
    s.jitter_steps = step;
    return s;
  }
  // Name the span with the weakest diagonal as the offender.
  std::size_t worst = 0;
  double worst_ratio = kInf;
  for (std::size_t k = 0; k < design_.effects.size(); ++k) {
    const auto &t = design_.effects[k];
    for (std::size_t c = t.start; c < t.start + t.count; ++c) {
      const double r = h(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
      if (r < worst_ratio) {
        worst_ratio = r;
        worst = k;
      }
    }
  }
  if (design_.effects.empty()) throw NumericError("singular system: intercept");
  throw NumericError("singular system at " + span_text(design_.effects[worst], worst));
}

void PenalizedSystem::check_identifiable(double tol) const {
  Eigen::MatrixXd m = gram_;
  for (const auto &pt : design_.penalties) {
    const auto c = pt.matrix.rows();
    m.block(static_cast<Eigen::Index>(pt.start), static_cast<Eigen::Index>(pt.start), c, c) += pt.matrix;
  }
  const Eigen::Index p = m.rows();
  Eigen::VectorXd scale(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(m(i, i) > 0.0)) {
      for (std::size_t k = 0; k < design_.effects.size(); ++k) {
        const auto &t = design_.effects[k];
        if (static_cast<std::size_t>(i) >= t.start && static_cast<std::size_t>(i) < t.start + t.count) {
          throw NumericError("singular system: " + span_text(t, k) + " has an all-zero column");
        }
      }
      throw NumericError("singular system: intercept column is zero");
    }
    scale(i) = 1.0 / std::sqrt(m(i, i));
  }
  const Eigen::MatrixXd scaled = scale.asDiagonal() * m * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled);
  if (eig.info() != Eigen::Success) throw NumericError("eigen decomposition failed in identifiability check");
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(p - 1);
  if (lo > tol * hi) return;
  const Eigen::VectorXd v = eig.eigenvectors().col(0);
  double best = v(0) * v(0);
  std::string who = "intercept";
  for (std::size_t k = 0; k < design_.effects.size(); ++k) {
    const auto &t = design_.effects[k];
    const double w = v.segment(static_cast<Eigen::Index>(t.start), static_cast<Eigen::Index>(t.count)).squaredNorm();
    if (w > best) {
      best = w;
      who = span_text(t, k);
    }
  }
  throw NumericError("singular system: " + who + " is not identifiable");
}

double gcv_score(const PenalizedSystem &system, std::span<const double> lambdas) {
  const auto s = system.solve(lambdas);
  if (!(static_cast<double>(system.rows()) - s.edf > 1e-8 * static_cast<double>(system.rows()))) {
    throw NumericError("degenerate GCV: n <= tr(A)");
  }
  return s.gcv;
}

double edf(const Eigen::MatrixXd &X, const Eigen::MatrixXd &S, double lambda) {
  const Eigen::Index p = X.cols();
  if (X.rows() < p) throw NumericError("edf: fewer rows than columns");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  const double rmax = r.diagonal().cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < p; ++i) {
    if (!(std::abs(r(i, i)) > 1e-12 * rmax)) throw NumericError("edf: rank-deficient design");
  }
  const Eigen::MatrixXd rt = r.transpose();
  const Eigen::MatrixXd w = rt.triangularView<Eigen::Lower>().solve(S);
  Eigen::MatrixXd m = rt.triangularView<Eigen::Lower>().solve(w.transpose());
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd e = eig.eigenvalues();
  const double emax = std::max(e.cwiseAbs().maxCoeff(), 0.0);
  double out = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) {
    const double ei = e(i) <= 1e-10 * emax ? 0.0 : e(i);
    if (ei == 0.0) {
      out += 1.0;
    } else if (std::isfinite(lambda)) {
      out += 1.0 / (1.0 + lambda * ei);
    }
  }
  return out;
}

FittedGam fit(const Formula &formula, const Slice &train, const FitOptions &options) {
  DesignMatrix design = design_matrix(formula, train, options);
  const std::vector<double> y = train.target();
  PenalizedSystem system(design, y);
  FittedGam out;
  out.formula = formula;
  out.n_train = design.rows();
  if (design.rows() <= design.cols()) {
    out.warnings.push_back("n = " + std::to_string(design.rows()) + " does not exceed " +
                           std::to_string(design.cols()) + " columns");
  }
  system.check_identifiable(options.identifiability_tol);

  const std::size_t j_count = design.penalties.size();
  const int grid = static_cast<int>(std::lround((options.log10_lambda_max - options.log10_lambda_min) /
                                                options.log10_lambda_step)) + 1;
  auto lambda_at = [&](int g) { return std::pow(10.0, options.log10_lambda_min + g * options.log10_lambda_step); };
  int start = static_cast<int>(std::lround(-options.log10_lambda_min / options.log10_lambda_step));
  start = std::clamp(start, 0, grid - 1);
  std::vector<int> idx(j_count, start);
  std::map<std::vector<int>, double> cache;
  auto score = [&](const std::vector<int> &at) {
    if (auto it = cache.find(at); it != cache.end()) return it->second;
    std::vector<double> l(at.size());
    for (std::size_t j = 0; j < at.size(); ++j) l[j] = lambda_at(at[j]);
    double v = kInf;
    try {
      v = system.solve(l).gcv;
    } catch (const NumericError &) {
    }
    cache.emplace(at, v);
    return v;
  };
  out.converged = true;
  if (j_count > 0) {
    out.converged = false;
    for (int pass = 0; pass < options.max_passes; ++pass) {
      bool moved = false;
      for (std::size_t j = 0; j < j_count; ++j) {
        std::vector<int> probe = idx;
        int best_g = idx[j];
        double best_v = kInf;
        for (int g = 0; g < grid; ++g) {
          probe[j] = g;
          const double v = score(probe);
          if (v <= best_v) {
            best_v = v;
            best_g = g;
          }
        }
        if (best_g != idx[j]) {
          idx[j] = best_g;
          moved = true;
        }
      }
      if (!moved) {
        out.converged = true;
        break;
      }
    }
  }
  out.lambdas.resize(j_count);
  for (std::size_t j = 0; j < j_count; ++j) {
    out.lambdas[j] = lambda_at(idx[j]);
    out.lambda_effect.push_back(design.penalties[j].effect);
  }
  const auto sol = system.solve(out.lambdas);
  out.beta = sol.beta;
  out.rss = sol.rss;
  out.edf = sol.edf;
  out.gcv = sol.gcv;
  if (sol.jitter_steps > 0) out.warnings.push_back("jitter applied to the normal equations");
  out.fitted.resize(static_cast<Eigen::Index>(design.rows()));
  gemv(design.X, out.beta.data(), out.fitted.data());
  out.effects = std::move(design.effects);
  return out;
}

Prediction predict_fixed(const FittedGam &fitted, const Slice &rows) {
  Prediction out;
  const std::size_t n = rows.size();
  const std::size_t k_count = fitted.formula.effects.size();
  out.contributions.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k_count));
  for (std::size_t k = 0; k < k_count; ++k) {
    const auto &term = fitted.effects[k];
    const Eigen::MatrixXd d = effect_design(fitted.formula.effects[k], term, rows, &out.unseen);
    gemv(d, fitted.beta.data() + term.start, out.contributions.col(static_cast<Eigen::Index>(k)).data());
  }
  out.values.resize(n);
  const double b0 = fitted.intercept();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) s += out.contributions(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    out.values[i] = b0 + s;
  }
  return out;
}

} // namespace gamevo
