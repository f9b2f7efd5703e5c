#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace hpcpred {

// y = intercept + X * coef.
struct LinearModel {
  double intercept = 0;
  Eigen::VectorXd coef;
  std::vector<std::string> columns;
  std::string algorithm;
  std::map<std::string, double> hyperparameters;
  std::map<std::string, std::string> metadata;
  double fit_time_s = 0;

  // Throws SchemaMismatch when the column count differs.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

// Least squares with an unpenalized intercept. Requires n > p; throws
// RankDeficient naming the unresolvable columns.
LinearModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// Minimizes ||y - a0 - Xw||^2 + alpha ||w||^2.
LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha = 0.5);

// ---- LARS / lasso ----------------------------------------------------------

enum class InformationCriterion { kAic, kBic };

// One knot of the lasso path. `alpha` is in the (1/2n)||r||^2 + alpha||w||_1
// parameterization; `lambda` = n * alpha is the absolute correlation level.
struct LarsKnot {
  double lambda = 0;
  double alpha = 0;
  Eigen::VectorXd coef;
  std::vector<std::size_t> active;
};

// Lasso regularization path by the LARS homotopy on centered data, from the
// empty model down to lambda = 0 (or until the active set cannot grow).
std::vector<LarsKnot> lars_lasso_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// n ln(RSS/n) + penalty * k with k = nonzeros + 1; penalty 2 (AIC) or ln n (BIC).
double information_criterion(double rss, std::size_t n, std::size_t nonzero,
                             InformationCriterion ic);

// Picks the path knot minimizing the criterion (first knot on ties). When no
// column correlates with y the empty model is returned with metadata
// "path_degenerate" = "true".
LinearModel fit_lasso_lars_ic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              InformationCriterion ic = InformationCriterion::kAic);

// ---- elastic net -----------------------------------------------------------

struct ElasticNetOptions {
  double tol = 1e-6;          // max coefficient change, target-scaled units
  std::size_t max_iter = 10000;  // coordinate sweeps
};

// Minimizes (1/2n)||y - a0 - Xw||^2 + alpha*l1_ratio*||w||_1
//           + (alpha/2)(1 - l1_ratio)||w||^2 by cyclic coordinate descent.
// Throws NonConvergence.
LinearModel fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                            double l1_ratio = 0.5, const ElasticNetOptions& opt = {});

struct ElasticNetCvOptions {
  std::size_t n_alphas = 100;
  double eps = 1e-3;  // alpha_min = eps * alpha_max
  std::size_t folds = 5;
  ElasticNetOptions cd;
};

// Smallest alpha for which every coefficient is zero.
double elastic_net_alpha_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l1_ratio);
std::vector<double> elastic_net_alpha_grid(double alpha_max, std::size_t n_alphas, double eps);

// Alpha chosen by k-fold (contiguous folds) cross-validated MSE over a
// geometric grid, then refit on all rows. Chosen alpha is stored in
// hyperparameters["alpha"].
LinearModel fit_elastic_net_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               double l1_ratio = 0.5, const ElasticNetCvOptions& opt = {});

}  // namespace hpcpred
