#include "gamevo/basis.hpp"
#include "gamevo/error.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <functional>

using namespace gamevo;

namespace {

Eigen::Index rank_of(const Eigen::MatrixXd &m) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-10);
  return lu.rank();
}

// Row-major enumeration of every multi-index by nested loops.
std::vector<std::vector<int>> enumerate(const std::vector<int> &dims) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(dims.size());
  std::function<void(std::size_t)> rec = [&](std::size_t d) {
    if (d == dims.size()) {
      out.push_back(cur);
      return;
    }
    for (int i = 1; i <= dims[d]; ++i) {
      cur[d] = i;
      rec(d + 1);
    }
  };
  rec(0);
  return out;
}

} // namespace

TEST(Spline, RawBlockIsAPartitionOfUnity) {
  Rng rng(1);
  const auto x = fixtures::uniform_values(300, rng, -3.0, 7.0);
  for (int q : {3, 4, 5, 10, 20}) {
    const BasisBlock b = raw_univariate(BasisFamily::CubicSpline, q, x);
    ASSERT_EQ(b.columns(), static_cast<std::size_t>(q));
    const Eigen::VectorXd sums = b.design.rowwise().sum();
    for (Eigen::Index i = 0; i < sums.size(); ++i) EXPECT_NEAR(sums[i], 1.0, 1e-12);
    EXPECT_GE(b.design.minCoeff(), -1e-15);
  }
}

TEST(Spline, CenteredCubicShape) {
  Rng rng(2);
  const auto x = fixtures::uniform_values(500, rng);
  const BasisBlock b = build_univariate(BasisFamily::CubicSpline, 10, x);
  EXPECT_EQ(b.columns(), 9u);
  EXPECT_EQ(rank_of(b.penalty()), 8);
  const Eigen::VectorXd means = b.design.colwise().mean();
  EXPECT_LT(means.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Spline, EvaluatorReproducesTrainingDesign) {
  Rng rng(3);
  const auto x = fixtures::uniform_values(200, rng, 5.0, 9.0);
  for (auto f : {BasisFamily::CubicSpline, BasisFamily::CyclicSpline, BasisFamily::Linear}) {
    const BasisBlock b = build_univariate(f, 8, x, f == BasisFamily::CyclicSpline ? 0.0 : 0.0);
    const Eigen::MatrixXd again = b.evaluator.evaluate(std::span<const double>(x));
    EXPECT_LT((again - b.design).cwiseAbs().maxCoeff(), 1e-12) << family_name(f);
    const BasisEvaluator back = evaluator_from_json(to_json(b.evaluator));
    EXPECT_LT((back.evaluate(std::span<const double>(x)) - b.design).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Spline, ExtrapolatesLinearly) {
  std::vector<double> x;
  for (int i = 0; i <= 100; ++i) x.push_back(i / 100.0);
  const BasisBlock b = raw_univariate(BasisFamily::CubicSpline, 8, x);
  const std::vector<double> out{1.5, 2.0, 2.5};
  const Eigen::MatrixXd e = b.evaluator.evaluate_raw({std::span<const double>(out)});
  const Eigen::VectorXd d1 = e.row(1) - e.row(0), d2 = e.row(2) - e.row(1);
  EXPECT_LT((d1 - d2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Cyclic, WrapsAtThePeriod) {
  Rng rng(4);
  auto x = fixtures::uniform_values(400, rng, 0.0, 24.0);
  const BasisBlock b = raw_univariate(BasisFamily::CyclicSpline, 12, x, 24.0);
  const std::vector<double> ends{0.0, 24.0 - 1e-9, 12.0, 36.0};
  const Eigen::MatrixXd e = b.evaluator.evaluate_raw({std::span<const double>(ends)});
  EXPECT_LT((e.row(0) - e.row(1)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((e.row(2) - e.row(3)).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::VectorXd sums = e.rowwise().sum();
  for (Eigen::Index i = 0; i < sums.size(); ++i) EXPECT_NEAR(sums[i], 1.0, 1e-12);
}

TEST(Cyclic, PenaltyIsCirculant) {
  const Eigen::MatrixXd s = difference_penalty(6, true);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) EXPECT_DOUBLE_EQ(s(i, j), s((i + 1) % 6, (j + 1) % 6));
  }
  EXPECT_EQ(rank_of(s), 5);
  EXPECT_EQ(rank_of(difference_penalty(6, false)), 4);
}

TEST(Categorical, ReferenceLevelAndColumns) {
  const std::vector<double> v{1, 2, 3, 1, 1};
  const BasisBlock b = build_categorical(3, v);
  ASSERT_EQ(b.columns(), 2u);
  EXPECT_EQ(b.evaluator.reference, 1);
  const std::vector<double> two{2};
  const Eigen::MatrixXd row = b.evaluator.evaluate_raw({std::span<const double>(two)});
  EXPECT_EQ(row(0, 0), 1.0);
  EXPECT_EQ(row(0, 1), 0.0);
}

TEST(Categorical, ZeroIsTheDefaultReference) {
  const std::vector<double> v{0, 2, 3, 0, 3, 3};
  const BasisBlock b = build_categorical(4, v);
  EXPECT_EQ(b.evaluator.reference, 0);
  EXPECT_EQ(b.evaluator.levels, (std::vector<int>{2, 3}));
}

TEST(Categorical, UnseenLevelsGiveZeroRows) {
  const std::vector<double> v{1, 2, 1, 2};
  const BasisBlock b = build_categorical(4, v);
  const std::vector<double> probe{3, 2, 0};
  std::size_t unseen = 0;
  const Eigen::MatrixXd e = b.evaluator.evaluate(std::span<const double>(probe), &unseen);
  EXPECT_EQ(unseen, 1u);
  EXPECT_EQ(e.row(0).sum(), 0.0);
  EXPECT_EQ(e.row(2).sum(), 0.0);
  const std::vector<double> bad{5};
  EXPECT_THROW(b.evaluator.evaluate(std::span<const double>(bad)), DataError);
}

TEST(Categorical, NeedsTwoLevels) {
  const std::vector<double> v{2, 2, 2};
  try {
    build_categorical(3, v);
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("fewer than 2 observed levels"), std::string::npos);
  }
}

TEST(Flatten, HandExamples) {
  const std::vector<int> d23{2, 3};
  EXPECT_EQ(flatten_index(1, d23), (std::vector<int>{1, 1}));
  EXPECT_EQ(flatten_index(5, d23), (std::vector<int>{2, 2}));
  EXPECT_EQ(flatten_index(6, d23), (std::vector<int>{2, 3}));
  const std::vector<int> d234{2, 3, 4};
  EXPECT_EQ(flatten_index(24, d234), (std::vector<int>{2, 3, 4}));
  EXPECT_THROW(flatten_index(0, d23), std::out_of_range);
  EXPECT_THROW(flatten_index(7, d23), std::out_of_range);
}

TEST(Flatten, MatchesNestedLoopsForSmallShapes) {
  const std::vector<std::vector<int>> shapes{{1}, {7}, {1, 5}, {5, 1}, {3, 4, 5}, {2, 2, 2, 2}, {1, 3, 1, 2}};
  for (const auto &dims : shapes) {
    const auto all = enumerate(dims);
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(flatten_index(i + 1, dims), all[i]);
  }
}

TEST(Tensor, ColumnOrderAndPenalties) {
  Rng rng(5);
  const auto x = fixtures::uniform_values(100, rng), z = fixtures::uniform_values(100, rng);
  const BasisBlock a = raw_univariate(BasisFamily::CubicSpline, 4, x);
  const BasisBlock b = raw_univariate(BasisFamily::CubicSpline, 5, z);
  const BasisBlock t = tensor_product(a, b);
  ASSERT_EQ(t.columns(), 20u);
  for (int ia = 0; ia < 4; ++ia) {
    for (int ib = 0; ib < 5; ++ib) {
      const Eigen::VectorXd expect = a.design.col(ia).cwiseProduct(b.design.col(ib));
      EXPECT_LT((t.design.col(ia * 5 + ib) - expect).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
  ASSERT_EQ(t.penalties.size(), 2u);
  const Eigen::MatrixXd sa = difference_penalty(4, false), sb = difference_penalty(5, false);
  for (int r = 0; r < 20; ++r) {
    for (int c = 0; c < 20; ++c) {
      EXPECT_DOUBLE_EQ(t.penalties[0](r, c), sa(r / 5, c / 5) * (r % 5 == c % 5 ? 1.0 : 0.0));
      EXPECT_DOUBLE_EQ(t.penalties[1](r, c), (r / 5 == c / 5 ? 1.0 : 0.0) * sb(r % 5, c % 5));
    }
  }
  const BasisBlock centered = center(t, true);
  EXPECT_EQ(centered.columns(), 19u);
  const std::vector<std::span<const double>> in{x, z};
  EXPECT_LT((centered.evaluator.evaluate(in) - centered.design).cwiseAbs().maxCoeff(), 1e-12);
}
