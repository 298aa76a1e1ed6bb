#include "gamevo/basis.hpp"

#include "gamevo/error.hpp"
#include "gamevo/kernels.hpp"
#include "gamevo/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gamevo {
namespace {

int spline_degree(int q) { return std::min(3, q - 1); }

std::size_t distinct_count(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

// Nonzero B-spline values of degree d on span s (t[s] <= x < t[s+1]).
void nonzero_basis(const std::vector<double> &t, int d, int s, double x, double *n) {
  double left[4], right[4];
  n[0] = 1.0;
  for (int r = 1; r <= d; ++r) {
    left[r] = x - t[s + 1 - r];
    right[r] = t[s + r] - x;
    double saved = 0.0;
    for (int k = 0; k < r; ++k) {
      const double temp = n[k] / (right[k + 1] + left[r - k]);
      n[k] = saved + right[k + 1] * temp;
      saved = left[r - k] * temp;
    }
    n[r] = saved;
  }
}

int find_span(const std::vector<double> &t, int d, int q, double x) {
  const auto first = t.begin() + d;
  const auto last = t.begin() + q; // t[q] is the right end of the range
  const auto it = std::upper_bound(first, last, x);
  const int s = static_cast<int>(it - t.begin()) - 1;
  return std::clamp(s, d, q - 1);
}

// Cubic spline row with linear extrapolation outside [lo, hi].
void spline_row(const BasisEvaluator &e, double x, double *row) {
  const int d = e.degree;
  const auto &t = e.knots;
  const double xe = std::clamp(x, e.lo, e.hi);
  const int s = find_span(t, d, e.size, xe);
  double n[4];
  nonzero_basis(t, d, s, xe, n);
  for (int r = 0; r <= d; ++r) row[s - d + r] = n[r];
  if (x != xe) {
    double nm[4];
    nonzero_basis(t, d - 1, s, xe, nm);
    const int first = s - d + 1;
    for (int j = s - d; j <= s; ++j) {
      const double bj = j >= first ? nm[j - first] : 0.0;
      const double bj1 = j + 1 <= s ? nm[j + 1 - first] : 0.0;
      const double der = d * (bj / (t[j + d] - t[j]) - bj1 / (t[j + d + 1] - t[j + 1]));
      row[j] += (x - xe) * der;
    }
  }
}

// Cardinal B-spline of degree d supported on [0, d+1).
double cardinal(int d, double u) {
  if (u < 0.0 || u >= d + 1) return 0.0;
  if (d == 0) return 1.0;
  return (u * cardinal(d - 1, u) + (d + 1 - u) * cardinal(d - 1, u - 1.0)) / d;
}

void cyclic_row(const BasisEvaluator &e, double x, double *row) {
  const int q = e.size;
  const double h = (e.hi - e.lo) / q;
  double u = std::fmod((x - e.lo) / h, static_cast<double>(q));
  if (u < 0.0) u += q;
  for (int j = 0; j < q; ++j) {
    double v = u - j;
    if (v < 0.0) v += q;
    row[j] = cardinal(e.degree, v);
  }
}

int category_code(double v, int m) {
  if (!(v >= 0.0) || v != std::floor(v) || v > m) {
    throw DataError("categorical value " + format_double(v) + " outside 0.." + std::to_string(m));
  }
  return static_cast<int>(v);
}

std::vector<double> spline_knots(int q, int d, double lo, double hi, std::span<const double> values,
                                 const BasisOptions &options) {
  const int intervals = q - d;
  std::vector<double> breaks(intervals + 1);
  if (options.quantile_knots) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    for (int k = 0; k <= intervals; ++k) {
      const double pos = static_cast<double>(k) / intervals * (v.size() - 1);
      const auto i = static_cast<std::size_t>(pos);
      const double frac = pos - i;
      breaks[k] = i + 1 < v.size() ? v[i] * (1 - frac) + v[i + 1] * frac : v.back();
    }
    for (int k = 1; k <= intervals; ++k) {
      if (!(breaks[k] > breaks[k - 1])) throw DataError("quantile knots are not distinct");
    }
  } else {
    const double h = (hi - lo) / intervals;
    for (int k = 0; k <= intervals; ++k) breaks[k] = lo + k * h;
    breaks[intervals] = hi;
  }
  const double h0 = breaks[1] - breaks[0];
  const double h1 = breaks[intervals] - breaks[intervals - 1];
  std::vector<double> t(q + d + 1);
  for (int j = 0; j <= q + d; ++j) {
    if (j < d) {
      t[j] = lo - (d - j) * h0;
    } else if (j <= q) {
      t[j] = breaks[j - d];
    } else {
      t[j] = hi + (j - q) * h1;
    }
  }
  return t;
}

} // namespace

std::size_t BasisEvaluator::raw_columns() const {
  switch (family) {
  case BasisFamily::Linear: return 1;
  case BasisFamily::CubicSpline:
  case BasisFamily::CyclicSpline: return static_cast<std::size_t>(size);
  case BasisFamily::Categorical: return levels.size();
  case BasisFamily::TensorProduct: {
    std::size_t p = 1;
    for (const auto &m : marginals) p *= m.columns();
    return p;
  }
  }
  return 0;
}

std::size_t BasisEvaluator::columns() const { return raw_columns() - (drop_last ? 1 : 0); }

Eigen::MatrixXd BasisEvaluator::evaluate_raw(const std::vector<std::span<const double>> &inputs,
                                             std::size_t *unseen) const {
  const std::size_t arity = family == BasisFamily::TensorProduct ? marginals.size() : 1;
  if (inputs.size() != arity) throw DataError("basis evaluation expects " + std::to_string(arity) + " inputs");
  const std::size_t n = inputs[0].size();
  for (const auto &in : inputs) {
    if (in.size() != n) throw DataError("basis inputs differ in length");
  }
  const std::size_t p = raw_columns();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::vector<double> row(p);
  switch (family) {
  case BasisFamily::Linear:
    for (std::size_t i = 0; i < n; ++i) out(i, 0) = inputs[0][i];
    break;
  case BasisFamily::CubicSpline:
  case BasisFamily::CyclicSpline:
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(row.begin(), row.end(), 0.0);
      if (family == BasisFamily::CubicSpline) {
        spline_row(*this, inputs[0][i], row.data());
      } else {
        cyclic_row(*this, inputs[0][i], row.data());
      }
      for (std::size_t j = 0; j < p; ++j) out(i, j) = row[j];
    }
    break;
  case BasisFamily::Categorical:
    for (std::size_t i = 0; i < n; ++i) {
      const int code = category_code(inputs[0][i], modalities);
      const auto it = std::find(levels.begin(), levels.end(), code);
      if (it != levels.end()) {
        out(i, it - levels.begin()) = 1.0;
      } else if (code != 0 && code != reference && unseen) {
        ++*unseen;
      }
    }
    break;
  case BasisFamily::TensorProduct: {
    const Eigen::MatrixXd a = marginals[0].evaluate({inputs[0]}, unseen);
    const Eigen::MatrixXd b = marginals[1].evaluate({inputs[1]}, unseen);
    const auto &k = kernels::active();
    for (Eigen::Index ia = 0; ia < a.cols(); ++ia) {
      for (Eigen::Index ib = 0; ib < b.cols(); ++ib) {
        k.hadamard(a.col(ia).data(), b.col(ib).data(), out.col(ia * b.cols() + ib).data(), n);
      }
    }
    break;
  }
  }
  return out;
}

Eigen::MatrixXd BasisEvaluator::evaluate(const std::vector<std::span<const double>> &inputs,
                                         std::size_t *unseen) const {
  Eigen::MatrixXd raw = evaluate_raw(inputs, unseen);
  if (!means.empty()) {
    for (Eigen::Index j = 0; j < raw.cols(); ++j) raw.col(j).array() -= means[j];
  }
  if (drop_last) return raw.leftCols(raw.cols() - 1);
  return raw;
}

Eigen::MatrixXd BasisEvaluator::evaluate(std::span<const double> values, std::size_t *unseen) const {
  return evaluate(std::vector<std::span<const double>>{values}, unseen);
}

Eigen::MatrixXd BasisBlock::penalty() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(design.cols(), design.cols());
  for (const auto &p : penalties) s += p;
  return s;
}

Eigen::MatrixXd difference_penalty(int q, bool cyclic) {
  const int rows = cyclic ? q : q - 2;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(std::max(rows, 0), q);
  for (int r = 0; r < rows; ++r) {
    if (cyclic) {
      d(r, (r + q - 1) % q) += 1.0;
      d(r, r) += -2.0;
      d(r, (r + 1) % q) += 1.0;
    } else {
      d(r, r) = 1.0;
      d(r, r + 1) = -2.0;
      d(r, r + 2) = 1.0;
    }
  }
  return d.transpose() * d;
}

BasisBlock raw_univariate(BasisFamily family, int q, std::span<const double> values, double period,
                          const BasisOptions &options) {
  if (values.empty()) throw DataError("basis construction on empty data");
  BasisBlock block;
  BasisEvaluator &e = block.evaluator;
  e.family = family;
  const std::size_t distinct = distinct_count(values);
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  switch (family) {
  case BasisFamily::Linear:
    if (distinct < 2) throw DataError("linear effect needs at least 2 distinct values");
    e.size = 1;
    break;
  case BasisFamily::CubicSpline:
  case BasisFamily::CyclicSpline:
    if (q < 3) throw DataError("spline basis size must be >= 3");
    if (distinct < static_cast<std::size_t>(q)) {
      throw DataError("fewer distinct values (" + std::to_string(distinct) + ") than basis size " +
                      std::to_string(q));
    }
    e.size = q;
    e.degree = spline_degree(q);
    if (family == BasisFamily::CyclicSpline && period > 0.0) {
      e.lo = 0.0;
      e.hi = period;
    } else {
      e.lo = *mn;
      e.hi = *mx;
    }
    if (family == BasisFamily::CubicSpline) e.knots = spline_knots(q, e.degree, e.lo, e.hi, values, options);
    block.penalties.push_back(difference_penalty(q, family == BasisFamily::CyclicSpline));
    break;
  default:
    throw std::invalid_argument("raw_univariate: unsupported family " + family_name(family));
  }
  block.design = e.evaluate_raw({values});
  return block;
}

BasisBlock build_univariate(BasisFamily family, int q, std::span<const double> values, double period,
                            const BasisOptions &options) {
  BasisBlock raw = raw_univariate(family, q, values, period, options);
  return center(std::move(raw), family != BasisFamily::Linear);
}

BasisBlock build_categorical(int m, std::span<const double> values) {
  if (values.empty()) throw DataError("basis construction on empty data");
  std::map<int, std::size_t> counts;
  for (double v : values) ++counts[category_code(v, m)];
  if (counts.size() < 2) throw DataError("fewer than 2 observed levels");
  BasisBlock block;
  BasisEvaluator &e = block.evaluator;
  e.family = BasisFamily::Categorical;
  e.size = m;
  e.modalities = m;
  if (!counts.count(0)) {
    std::size_t best = 0;
    for (const auto &[level, c] : counts) {
      if (c > best) {
        best = c;
        e.reference = level;
      }
    }
  }
  for (const auto &[level, c] : counts) {
    if (level != 0 && level != e.reference) e.levels.push_back(level);
  }
  block.design = e.evaluate_raw({values});
  return block;
}

BasisBlock raw_indicator(int m, std::span<const double> values) {
  if (values.empty()) throw DataError("basis construction on empty data");
  std::map<int, std::size_t> counts;
  for (double v : values) ++counts[category_code(v, m)];
  BasisBlock block;
  BasisEvaluator &e = block.evaluator;
  e.family = BasisFamily::Categorical;
  e.size = m;
  e.modalities = m;
  for (const auto &[level, c] : counts) {
    if (level != 0) e.levels.push_back(level);
  }
  if (e.levels.empty()) throw DataError("fewer than 2 observed levels");
  block.design = e.evaluate_raw({values});
  block.penalties.push_back(Eigen::MatrixXd::Identity(block.design.cols(), block.design.cols()));
  return block;
}

BasisBlock tensor_product(const BasisBlock &a, const BasisBlock &b) {
  if (a.design.rows() != b.design.rows()) {
    throw DataError("tensor product of blocks with " + std::to_string(a.design.rows()) + " and " +
                    std::to_string(b.design.rows()) + " rows");
  }
  const Eigen::Index n = a.design.rows(), pa = a.design.cols(), pb = b.design.cols();
  BasisBlock out;
  out.design.resize(n, pa * pb);
  const auto &k = kernels::active();
  for (Eigen::Index ia = 0; ia < pa; ++ia) {
    for (Eigen::Index ib = 0; ib < pb; ++ib) {
      k.hadamard(a.design.col(ia).data(), b.design.col(ib).data(), out.design.col(ia * pb + ib).data(),
                 static_cast<std::size_t>(n));
    }
  }
  const Eigen::MatrixXd ia_id = Eigen::MatrixXd::Identity(pa, pa);
  const Eigen::MatrixXd ib_id = Eigen::MatrixXd::Identity(pb, pb);
  auto kron = [](const Eigen::MatrixXd &x, const Eigen::MatrixXd &y) {
    Eigen::MatrixXd r(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        r.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
      }
    }
    return r;
  };
  for (const auto &s : a.penalties) {
    if (s.norm() > 0.0) out.penalties.push_back(kron(s, ib_id));
  }
  for (const auto &s : b.penalties) {
    if (s.norm() > 0.0) out.penalties.push_back(kron(ia_id, s));
  }
  BasisEvaluator &e = out.evaluator;
  e.family = BasisFamily::TensorProduct;
  e.size = static_cast<int>(pa * pb);
  e.marginals = {a.evaluator, b.evaluator};
  return out;
}

BasisBlock center(BasisBlock block, bool drop_last) {
  const Eigen::Index n = block.design.rows();
  const Eigen::Index p = block.design.cols();
  auto &means = block.evaluator.means;
  means.resize(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    means[j] = block.design.col(j).sum() / static_cast<double>(n);
    block.design.col(j).array() -= means[j];
  }
  if (drop_last && p > 1) {
    block.evaluator.drop_last = true;
    block.design.conservativeResize(n, p - 1);
    for (auto &s : block.penalties) s = s.topLeftCorner(p - 1, p - 1).eval();
  }
  block.centered = true;
  return block;
}

std::vector<int> flatten_index(std::size_t i, std::span<const int> dims) {
  std::size_t total = 1;
  for (int q : dims) {
    if (q < 1) throw std::out_of_range("flatten_index: dimension < 1");
    total *= static_cast<std::size_t>(q);
  }
  if (dims.empty() || i < 1 || i > total) throw std::out_of_range("flatten_index: index out of range");
  std::vector<int> out(dims.size());
  std::size_t r = i - 1;
  for (std::size_t l = dims.size(); l-- > 0;) {
    out[l] = static_cast<int>(r % dims[l]) + 1;
    r /= dims[l];
  }
  return out;
}

nlohmann::json to_json(const BasisEvaluator &e) {
  nlohmann::json j;
  j["family"] = family_name(e.family);
  j["size"] = e.size;
  switch (e.family) {
  case BasisFamily::CubicSpline:
  case BasisFamily::CyclicSpline:
    j["degree"] = e.degree;
    j["lo"] = e.lo;
    j["hi"] = e.hi;
    if (!e.knots.empty()) j["knots"] = e.knots;
    break;
  case BasisFamily::Categorical:
    j["modalities"] = e.modalities;
    j["levels"] = e.levels;
    j["reference"] = e.reference;
    break;
  case BasisFamily::TensorProduct:
    j["marginals"] = nlohmann::json::array();
    for (const auto &m : e.marginals) j["marginals"].push_back(to_json(m));
    break;
  case BasisFamily::Linear: break;
  }
  if (!e.means.empty()) j["means"] = e.means;
  j["drop_last"] = e.drop_last;
  return j;
}

BasisEvaluator evaluator_from_json(const nlohmann::json &j) {
  BasisEvaluator e;
  const std::string family = j.at("family").get<std::string>();
  bool found = false;
  for (BasisFamily f : {BasisFamily::Linear, BasisFamily::CubicSpline, BasisFamily::CyclicSpline,
                        BasisFamily::Categorical, BasisFamily::TensorProduct}) {
    if (family_name(f) == family) {
      e.family = f;
      found = true;
    }
  }
  if (!found) throw DataError("unknown basis family '" + family + "'");
  e.size = j.at("size").get<int>();
  e.degree = j.value("degree", 3);
  e.lo = j.value("lo", 0.0);
  e.hi = j.value("hi", 1.0);
  if (j.contains("knots")) e.knots = j.at("knots").get<std::vector<double>>();
  e.modalities = j.value("modalities", 0);
  if (j.contains("levels")) e.levels = j.at("levels").get<std::vector<int>>();
  e.reference = j.value("reference", 0);
  if (j.contains("marginals")) {
    for (const auto &m : j.at("marginals")) e.marginals.push_back(evaluator_from_json(m));
  }
  if (j.contains("means")) e.means = j.at("means").get<std::vector<double>>();
  e.drop_last = j.value("drop_last", false);
  return e;
}

} // namespace gamevo
