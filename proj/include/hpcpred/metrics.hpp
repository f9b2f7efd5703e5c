#pragma once

#include <Eigen/Dense>

namespace hpcpred {

// 1 - SS_res / SS_tot. Throws ConstantTarget when y_true has no spread, and
// Error for fewer than two points or mismatched lengths.
double r_squared(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
double mean_squared_error(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

// Binary metrics; class 1 is the positive class.
double accuracy(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
double precision(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
double recall(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
// 2PR / (P + R); 0 when P + R == 0.
double f1_score(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

}  // namespace hpcpred
