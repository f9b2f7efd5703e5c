#include <cmath>

#include "hpcpred/error.hpp"
#include "hpcpred/linear.hpp"

namespace hpcpred {

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != coef.size())
    throw SchemaMismatch("linear model expects " + std::to_string(coef.size()) + " columns, got " +
                         std::to_string(X.cols()));
  return (X * coef).array() + intercept;
}

namespace {

void check_finite(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw Error("X and y row counts differ");
  if (!X.allFinite() || !y.allFinite()) throw Error("non-finite input to linear fit");
}

}  // namespace

LinearModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_finite(X, y);
  const auto n = X.rows();
  const auto p = X.cols();
  if (n <= p) throw Error("ols: need more rows than columns");

  const Eigen::RowVectorXd xbar = X.colwise().mean();
  const double ybar = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - xbar;
  const Eigen::VectorXd yc = y.array() - ybar;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xc);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::vector<std::size_t> bad;
    const auto& perm = qr.colsPermutation().indices();
    for (auto k = qr.rank(); k < p; ++k) bad.push_back(static_cast<std::size_t>(perm(k)));
    std::string msg = "ols: singular normal system; unresolvable columns:";
    for (auto b : bad) msg += " " + std::to_string(b);
    throw RankDeficient(msg, std::move(bad));
  }

  LinearModel m;
  m.algorithm = "LinearRegression";
  m.coef = qr.solve(yc);
  m.intercept = ybar - xbar.dot(m.coef);
  return m;
}

LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw Error("ridge: alpha must be finite and >= 0");
  if (alpha == 0) {
    auto m = fit_ols(X, y);
    m.algorithm = "Ridge";
    m.hyperparameters["alpha"] = 0;
    return m;
  }
  check_finite(X, y);
  const Eigen::RowVectorXd xbar = X.colwise().mean();
  const double ybar = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - xbar;
  const Eigen::VectorXd yc = y.array() - ybar;

  Eigen::MatrixXd A = Xc.transpose() * Xc;
  A.diagonal().array() += alpha;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  LinearModel m;
  m.algorithm = "Ridge";
  m.hyperparameters["alpha"] = alpha;
  m.coef = ldlt.solve(Xc.transpose() * yc);
  m.intercept = ybar - xbar.dot(m.coef);
  return m;
}

}  // namespace hpcpred
