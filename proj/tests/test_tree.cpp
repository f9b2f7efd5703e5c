#include <gtest/gtest.h>

#include <random>

#include "hpcpred/tree.hpp"
#include "oracles.hpp"

using namespace hpcpred;

namespace {

struct SmallSet {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

// Up to 200 rows by up to 4 features; some columns are coarsely rounded so
// duplicate values and constant stretches occur.
SmallSet small_dataset(std::uint64_t seed, bool binary) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0, 1);
  const auto n = static_cast<Eigen::Index>(20 + rng() % 181);
  const auto p = static_cast<Eigen::Index>(1 + rng() % 4);
  SmallSet s;
  s.X.resize(n, p);
  s.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double v = z(rng);
      s.X(i, j) = j % 2 ? std::round(v * 2) : v;
    }
    const double signal = s.X(i, 0) + (p > 1 ? 0.5 * s.X(i, 1) : 0);
    s.y(i) = binary ? (signal + 0.7 * z(rng) > 0 ? 1.0 : 0.0) : 3 * signal + z(rng);
  }
  return s;
}

// Rows of the training sample reaching each node.
std::vector<std::vector<std::size_t>> node_rows(const DecisionTree& t, const Eigen::MatrixXd& X) {
  std::vector<std::vector<std::size_t>> rows(t.nodes.size());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    int k = 0;
    for (;;) {
      rows[static_cast<std::size_t>(k)].push_back(static_cast<std::size_t>(i));
      const auto& nd = t.nodes[static_cast<std::size_t>(k)];
      if (nd.is_leaf()) break;
      k = X(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
  }
  return rows;
}

void check_against_oracle(const DecisionTree& t, const SmallSet& s, bool gini) {
  const auto rows = node_rows(t, s.X);
  for (std::size_t k = 0; k < t.nodes.size(); ++k) {
    const auto& nd = t.nodes[k];
    ASSERT_EQ(nd.n_samples, rows[k].size());
    const auto best = oracle::exhaustive_split(s.X, s.y, rows[k], gini);
    const double scale = std::max(1.0, static_cast<double>(rows[k].size()) * std::max(1.0, s.y.cwiseAbs().maxCoeff()));
    if (nd.is_leaf()) {
      if (nd.impurity > 0 && rows[k].size() >= 2) EXPECT_LE(best.decrease, 1e-9 * scale);
      continue;
    }
    EXPECT_GT(nd.impurity_decrease, 0);
    EXPECT_NEAR(nd.impurity_decrease, best.decrease, 1e-9 * scale) << "node " << k;
    // Impurity decrease as recomputed for the split the tree actually made.
    std::vector<double> left, right;
    for (auto r : rows[k])
      (s.X(static_cast<Eigen::Index>(r), nd.feature) <= nd.threshold ? left : right).push_back(s.y(static_cast<Eigen::Index>(r)));
    std::vector<double> all(left);
    all.insert(all.end(), right.begin(), right.end());
    auto imp = [&](const std::vector<double>& v) { return gini ? oracle::weighted_gini(v) : oracle::weighted_mse(v); };
    EXPECT_NEAR(imp(all) - imp(left) - imp(right), best.decrease, 1e-9 * scale) << "node " << k;
  }
}

}  // namespace

TEST(Cart, OneSplitSeparable) {
  Eigen::MatrixXd X(4, 1);
  X << -2, -1, 1, 2;
  Eigen::VectorXd y(4);
  y << 0, 0, 1, 1;
  const auto t = fit_cart_regression(X, y);
  ASSERT_EQ(t.nodes.size(), 3u);
  EXPECT_GT(t.nodes[0].threshold, -1);
  EXPECT_LT(t.nodes[0].threshold, 1);
  EXPECT_TRUE(t.predict(X) == y);
}

TEST(Cart, PureRootIsSingleLeaf) {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 3);
  const auto t = fit_cart_regression(X, Eigen::VectorXd::Constant(10, 5.0));
  EXPECT_EQ(t.nodes.size(), 1u);
  EXPECT_TRUE((t.predict(Eigen::MatrixXd::Random(4, 3)).array() == 5.0).all());
}

TEST(Cart, MemorizesDistinctRows) {
  const auto s = small_dataset(3, false);
  const auto t = fit_cart_regression(s.X, s.y);
  EXPECT_LT((t.predict(s.X) - s.y).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Cart, ThresholdTiesGoLeft) {
  DecisionTree t;
  t.n_features = 1;
  t.nodes = {TreeNode{0, 1.0, 1, 2}, TreeNode{}, TreeNode{}};
  t.nodes[1].value = 10;
  t.nodes[2].value = 20;
  Eigen::MatrixXd X(2, 1);
  X << 1.0, 1.0000001;
  const auto p = t.predict(X);
  EXPECT_EQ(p(0), 10);
  EXPECT_EQ(p(1), 20);
}

TEST(Cart, MaxDepthRespected) {
  const auto s = small_dataset(4, false);
  const auto t = fit_cart_regression(s.X, s.y, CartParams{2, 2});
  EXPECT_LE(t.depth(), 2);
}

TEST(Cart, GiniValues) {
  EXPECT_EQ(gini_impurity(0, 3), 0);
  EXPECT_EQ(gini_impurity(2, 2), 0.5);
}

TEST(Cart, ClassifierTiesToZero) {
  Eigen::MatrixXd X(2, 1);
  X << 1, 1;
  Eigen::VectorXd y(2);
  y << 0, 1;
  const auto t = fit_cart_classifier(X, y);
  EXPECT_EQ(t.predict(X)(0), 0);
  EXPECT_EQ(t.predict_value(X)(0), 0.5);
}

TEST(CartOracle, RegressionMatchesExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = small_dataset(seed, false);
    check_against_oracle(fit_cart_regression(s.X, s.y), s, false);
  }
}

TEST(CartOracle, ClassifierMatchesExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = small_dataset(seed + 1000, true);
    check_against_oracle(fit_cart_classifier(s.X, s.y), s, true);
  }
}

TEST(CartProperty, LeafMeansAndGiniRange) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = small_dataset(seed + 50, false);
    const auto t = fit_cart_regression(s.X, s.y, CartParams{3, 2});
    const auto rows = node_rows(t, s.X);
    for (std::size_t k = 0; k < t.nodes.size(); ++k) {
      if (!t.nodes[k].is_leaf()) continue;
      std::vector<double> v;
      for (auto r : rows[k]) v.push_back(s.y(static_cast<Eigen::Index>(r)));
      EXPECT_NEAR(t.nodes[k].value, oracle::mean(v), 1e-9 * std::max(1.0, std::abs(oracle::mean(v))));
    }
    const auto c = small_dataset(seed + 80, true);
    const auto tc = fit_cart_classifier(c.X, c.y);
    for (const auto& nd : tc.nodes) {
      EXPECT_GE(nd.impurity, 0);
      EXPECT_LE(nd.impurity, 0.5);
    }
  }
}

TEST(CartProperty, ScaleEquivariance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = small_dataset(seed + 90, false);
    auto X2 = s.X;
    const double c = 0.001 + static_cast<double>(seed) * 7.3;
    X2.col(0) *= c;
    const auto a = fit_cart_regression(s.X, s.y);
    const auto b = fit_cart_regression(X2, s.y);
    EXPECT_LT((a.predict(s.X) - b.predict(X2)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Cart, BootstrapSampleWeightsRepeats) {
  Eigen::MatrixXd X(3, 1);
  X << 0, 1, 2;
  Eigen::VectorXd y(3);
  y << 0, 3, 6;
  std::vector<std::size_t> sample = {2, 2, 2};
  const auto t = fit_tree(X, y, TreeParams{}, sample);
  EXPECT_EQ(t.nodes.size(), 1u);
  EXPECT_EQ(t.nodes[0].value, 6);
  EXPECT_EQ(t.nodes[0].n_samples, 3u);
}
