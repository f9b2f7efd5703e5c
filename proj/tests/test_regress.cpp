#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hpcpred/error.hpp"
#include "hpcpred/linear.hpp"
#include "hpcpred/metrics.hpp"
#include "oracles.hpp"

using namespace hpcpred;

namespace {

Eigen::VectorXd full_coef(const LinearModel& m) {
  Eigen::VectorXd v(m.coef.size() + 1);
  v(0) = m.intercept;
  v.tail(m.coef.size()) = m.coef;
  return v;
}

using oracle::standardize;

double kkt_residual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const LinearModel& m, double alpha,
                    double l1) {
  return oracle::elastic_net_kkt(X, y, m.intercept, m.coef, alpha, l1);
}

std::vector<std::size_t> support(const Eigen::VectorXd& w) {
  std::vector<std::size_t> s;
  for (Eigen::Index j = 0; j < w.size(); ++j)
    if (w(j) != 0) s.push_back(static_cast<std::size_t>(j));
  return s;
}

oracle::Problem planted(std::uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0, 1);
  oracle::Problem p;
  p.X.resize(200, 10);
  for (Eigen::Index i = 0; i < 200; ++i)
    for (Eigen::Index j = 0; j < 10; ++j) p.X(i, j) = z(rng);
  p.X = standardize(p.X);
  p.w = Eigen::VectorXd::Zero(10);
  p.w(1) = 3;
  p.w(4) = -2;
  p.w(7) = 2.5;
  p.y = p.X * p.w;
  for (Eigen::Index i = 0; i < 200; ++i) p.y(i) += noise * z(rng);
  return p;
}

}  // namespace

// ---- OLS -------------------------------------------------------------------

TEST(Ols, NoiselessLine) {
  Eigen::MatrixXd X(3, 1);
  X << 1, 2, 3;
  Eigen::VectorXd y(3);
  y << 2, 4, 6;
  const auto m = fit_ols(X, y);
  EXPECT_NEAR(m.intercept, 0, 1e-12);
  EXPECT_NEAR(m.coef(0), 2, 1e-12);
}

TEST(Ols, ConstantTarget) {
  const auto p = oracle::random_problem(1, 30, 3);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 4.25);
  const auto m = fit_ols(p.X, y);
  EXPECT_NEAR(m.intercept, 4.25, 1e-12);
  EXPECT_LT(m.coef.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Ols, MatchesNormalEquations) {
  const auto p = oracle::random_problem(2, 50, 5);
  const auto m = fit_ols(p.X, p.y);
  EXPECT_LT((full_coef(m) - oracle::normal_equations(p.X, p.y)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Ols, RankDeficientNamesColumns) {
  auto p = oracle::random_problem(3, 40, 3);
  p.X.col(2) = 2 * p.X.col(0);
  try {
    fit_ols(p.X, p.y);
    FAIL() << "expected RankDeficient";
  } catch (const RankDeficient& e) {
    ASSERT_EQ(e.columns().size(), 1u);
    EXPECT_TRUE(e.columns()[0] == 0 || e.columns()[0] == 2);
  }
}

TEST(Ols, RequiresMoreRowsThanColumns) {
  const auto p = oracle::random_problem(4, 3, 3);
  EXPECT_THROW(fit_ols(p.X, p.y), Error);
}

TEST(OlsProperty, ResidualOrthogonality) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto p = oracle::random_problem(seed + 100, 80, 6);
    p.X = standardize(p.X);
    const auto m = fit_ols(p.X, p.y);
    const Eigen::VectorXd r = p.y - m.predict(p.X);
    EXPECT_LE((p.X.transpose() * r).cwiseAbs().maxCoeff(), 1e-8 * 80);
    EXPECT_LE(std::abs(r.sum()), 1e-8 * 80);
  }
}

TEST(Linear, PredictArithmeticAndSchema) {
  LinearModel m;
  m.intercept = 1;
  m.coef = Eigen::VectorXd::Constant(1, 2);
  Eigen::MatrixXd X(1, 1);
  X << 3;
  EXPECT_EQ(m.predict(X)(0), 7);
  EXPECT_THROW(m.predict(Eigen::MatrixXd::Zero(1, 2)), SchemaMismatch);
}

// ---- Ridge -----------------------------------------------------------------

TEST(Ridge, OneDimensionalClosedForm) {
  Eigen::MatrixXd X(3, 1);
  X << -1, 0, 1;
  Eigen::VectorXd y(3);
  y << -2, 0, 2;
  const auto m = fit_ridge(X, y, 0.5);
  EXPECT_NEAR(m.coef(0), 1.6, 1e-12);
  EXPECT_NEAR(m.intercept, 0, 1e-12);
}

TEST(Ridge, ZeroPenaltyEqualsOls) {
  const auto p = oracle::random_problem(5, 60, 4);
  EXPECT_LT((full_coef(fit_ridge(p.X, p.y, 0)) - full_coef(fit_ols(p.X, p.y))).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Ridge, HugePenaltyShrinksToMean) {
  const auto p = oracle::random_problem(6, 60, 4);
  const auto m = fit_ridge(p.X, p.y, 1e12);
  EXPECT_LT(m.coef.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(m.intercept, p.y.mean(), 1e-6);
}

TEST(Ridge, MatchesRegularizedNormalEquations) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = oracle::random_problem(seed + 200, 40, 5);
    const auto m = fit_ridge(p.X, p.y, 0.5);
    EXPECT_LT((full_coef(m) - oracle::normal_equations(p.X, p.y, 0.5)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(RidgeProperty, NormShrinksWithAlpha) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = oracle::random_problem(seed + 300, 50, 5);
    double prev = 1e300;
    for (double a : {0.0, 0.1, 0.5, 1.0, 5.0, 50.0, 500.0}) {
      const double nrm = fit_ridge(p.X, p.y, a).coef.norm();
      EXPECT_LE(nrm, prev + 1e-12);
      prev = nrm;
    }
  }
}

// ---- LARS / lasso ----------------------------------------------------------

TEST(Lars, ConstantTargetGivesEmptyModel) {
  const auto p = oracle::random_problem(7, 50, 4);
  const auto m = fit_lasso_lars_ic(standardize(p.X), Eigen::VectorXd::Constant(50, 3.0));
  EXPECT_EQ(m.coef.cwiseAbs().maxCoeff(), 0);
  EXPECT_EQ(m.intercept, 3.0);
  EXPECT_EQ(m.metadata.at("path_degenerate"), "true");
}

TEST(Lars, OrthonormalPathIsSoftThresholding) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z(0, 1);
  const Eigen::Index n = 40, p = 5;
  Eigen::MatrixXd A(n, p + 1);
  A.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 1; j <= p; ++j) A(i, j) = z(rng);
  const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ() * Eigen::MatrixXd::Identity(n, p + 1);
  const Eigen::MatrixXd X = Q.rightCols(p);  // orthonormal and orthogonal to 1
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = 2 + z(rng);
  y += X * (Eigen::VectorXd(p) << 5, -3, 1, 0.5, -4).finished();
  const Eigen::VectorXd ols = X.transpose() * (y.array() - y.mean()).matrix();
  const auto path = lars_lasso_path(X, y);
  ASSERT_GE(path.size(), 2u);
  for (const auto& knot : path) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const double b = ols(j);
      const double soft = (b > 0 ? 1 : -1) * std::max(0.0, std::abs(b) - knot.lambda);
      EXPECT_NEAR(knot.coef(j), soft, 1e-6);
    }
    EXPECT_NEAR(knot.alpha * static_cast<double>(n), knot.lambda, 1e-9 * std::max(1.0, knot.lambda));
  }
}

TEST(Lars, PlantedSupportContainedInSelection) {
  const auto p = planted(2024, 0.1);
  const auto m = fit_lasso_lars_ic(p.X, p.y, InformationCriterion::kAic);
  const auto s = support(m.coef);
  for (std::size_t j : {1u, 4u, 7u}) EXPECT_NE(std::find(s.begin(), s.end(), j), s.end());
  const auto b = fit_lasso_lars_ic(p.X, p.y, InformationCriterion::kBic);
  EXPECT_LE(support(b.coef).size(), s.size());
}

TEST(Lars, InformationCriterionFormula) {
  EXPECT_NEAR(information_criterion(50, 100, 3, InformationCriterion::kAic), 100 * std::log(0.5) + 2 * 4, 1e-12);
  EXPECT_NEAR(information_criterion(50, 100, 3, InformationCriterion::kBic),
              100 * std::log(0.5) + std::log(100.0) * 4, 1e-12);
}

TEST(LarsProperty, ActiveSetGrowsOneAtATime) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = planted(seed + 500, 1.0);
    const auto path = lars_lasso_path(p.X, p.y);
    ASSERT_FALSE(path.empty());
    EXPECT_TRUE(path.front().active.empty());
    for (std::size_t k = 1; k < path.size(); ++k) {
      const auto a = path[k - 1].active.size();
      const auto b = path[k].active.size();
      EXPECT_TRUE(b == a + 1 || b + 1 == a) << "knot " << k;
      EXPECT_LE(path[k].lambda, path[k - 1].lambda);
    }
  }
}

// ---- Elastic net -----------------------------------------------------------

TEST(ElasticNet, ZeroAlphaMatchesOls) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = oracle::random_problem(seed + 600, 100, 4);
    p.X = standardize(p.X);
    const auto en = fit_elastic_net(p.X, p.y, 0.0, 0.5);
    EXPECT_LT((full_coef(en) - full_coef(fit_ols(p.X, p.y))).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ElasticNet, KktOnFixedAlphas) {
  const auto p = planted(77, 0.5);
  for (double alpha : {1e-3, 0.01, 0.1, 0.5, 1.0, 5.0}) {
    const auto m = fit_elastic_net(p.X, p.y, alpha, 0.5);
    EXPECT_LE(kkt_residual(p.X, p.y, m, alpha, 0.5), 1e-4) << "alpha " << alpha;
  }
}

TEST(ElasticNet, AlphaMaxZeroesEverything) {
  const auto p = planted(78, 0.5);
  const double amax = elastic_net_alpha_max(p.X, p.y, 0.5);
  EXPECT_EQ(fit_elastic_net(p.X, p.y, amax * 1.0001, 0.5).coef.cwiseAbs().maxCoeff(), 0);
  EXPECT_GT(fit_elastic_net(p.X, p.y, amax * 0.9, 0.5).coef.cwiseAbs().maxCoeff(), 0);
  const auto grid = elastic_net_alpha_grid(amax, 100, 1e-3);
  ASSERT_EQ(grid.size(), 100u);
  EXPECT_DOUBLE_EQ(grid.front(), amax);
  EXPECT_NEAR(grid.back(), amax * 1e-3, 1e-12 * amax);
}

TEST(ElasticNet, PlantedRelevance) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> z(0, 1);
  Eigen::MatrixXd X(300, 2);
  Eigen::VectorXd y(300);
  for (Eigen::Index i = 0; i < 300; ++i) {
    X(i, 0) = z(rng);
    X(i, 1) = z(rng);
    y(i) = 2 * X(i, 0) + 0.3 * z(rng);
  }
  X = standardize(X);
  const auto m = fit_elastic_net_cv(X, y, 0.5);
  EXPECT_LT(std::abs(m.coef(1)), std::abs(m.coef(0)) / 10);
}

TEST(ElasticNet, IterationCapReportsNonConvergence) {
  const auto p = planted(79, 0.5);
  ElasticNetOptions opt;
  opt.max_iter = 1;
  opt.tol = 1e-14;
  EXPECT_THROW(fit_elastic_net(p.X, p.y, 0.01, 0.5, opt), NonConvergence);
}

TEST(ElasticNetProperty, CvSolutionsSatisfyKkt) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto p = oracle::random_problem(seed + 700, 60 + static_cast<Eigen::Index>(seed % 5) * 20,
                                    2 + static_cast<Eigen::Index>(seed % 6), 1.0);
    p.X = standardize(p.X);
    const auto m = fit_elastic_net_cv(p.X, p.y, 0.5);
    EXPECT_LE(kkt_residual(p.X, p.y, m, m.hyperparameters.at("alpha"), 0.5), 1e-4) << "seed " << seed;
  }
}

// ---- R squared -------------------------------------------------------------

TEST(RSquared, Examples) {
  Eigen::VectorXd t(3), p(3);
  t << 1, 2, 3;
  p << 1, 2, 2;
  EXPECT_EQ(r_squared(t, p), 0.5);
  EXPECT_EQ(r_squared(t, t), 1.0);
  EXPECT_EQ(r_squared(t, Eigen::VectorXd::Constant(3, 2.0)), 0.0);
  EXPECT_THROW(r_squared(Eigen::VectorXd::Constant(3, 1.0), t), ConstantTarget);
  EXPECT_THROW(r_squared(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 1.0)), Error);
}

TEST(RSquared, CanBeNegative) {
  Eigen::VectorXd t(3), p(3);
  t << 1, 2, 3;
  p << 3, 2, 1;
  EXPECT_LT(r_squared(t, p), 0);
}
