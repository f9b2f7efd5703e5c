#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "hpcpred/tree.hpp"

namespace hpcpred {

struct LogisticModel {
  double intercept = 0;
  Eigen::VectorXd weights;
  double l2_strength = 1.0;
  std::size_t iterations = 0;
  double gradient_norm = 0;

  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
  // Class 1 iff probability > 0.5.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

struct LogisticOptions {
  double gradient_tol = 1e-6;
  std::size_t max_iter = 200;
};

// Minimizes sum_i [log(1 + e^{z_i}) - y_i z_i] + (l2/2)||w||^2, z = b + Xw,
// by damped Newton steps. Throws NonConvergence.
LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           double l2_strength = 1.0, const LogisticOptions& opt = {});

// The objective above, evaluated at (intercept, weights).
double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double intercept,
                          const Eigen::VectorXd& weights, double l2_strength);

struct GaussianNBModel {
  Eigen::Vector2d priors;
  Eigen::MatrixXd means;      // 2 x p
  Eigen::MatrixXd variances;  // 2 x p, floored
  double variance_floor = 0;

  // Unnormalized log posterior per class: n x 2.
  Eigen::MatrixXd joint_log_likelihood(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
  // argmax, ties to class 0.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// Per-class ML means/variances; variances floored at 1e-9 * max_j var(X_j).
// Throws SingleClass.
GaussianNBModel fit_gnb(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

struct ForestParams {
  std::size_t n_trees = 100;
  std::optional<int> max_depth;
  bool bootstrap = true;
  std::optional<std::size_t> max_features;  // nullopt: ceil(sqrt(p))
  std::uint64_t seed = 42;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
  std::size_t max_features = 0;
  bool bootstrap = true;

  // Mean of the trees' leaf class-1 fractions.
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
  // Majority vote of the trees' classes, ties to 0.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

ForestModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const ForestParams& params = {});

}  // namespace hpcpred
