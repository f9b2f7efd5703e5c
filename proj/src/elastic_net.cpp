#include <algorithm>
#include <cmath>
#include <limits>

#include "hpcpred/error.hpp"
#include "hpcpred/linear.hpp"
#include "hpcpred/util.hpp"

namespace hpcpred {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Centered second moments of the rows in [rows]; the target is divided by
// its standard deviation so the coordinate tolerance is scale-free.
struct Moments {
  Eigen::RowVectorXd xbar;
  double ybar = 0;
  double yscale = 1;
  Eigen::MatrixXd gram;  // Xc'Xc / n
  Eigen::VectorXd corr;  // Xc'yc / (n * yscale)
};

Moments moments(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(X.rows());
  Moments m;
  m.xbar = X.colwise().mean();
  m.ybar = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - m.xbar;
  const Eigen::VectorXd yc = y.array() - m.ybar;
  const double sd = std::sqrt(yc.squaredNorm() / n);
  m.yscale = sd > 0 ? sd : 1.0;
  m.gram = Xc.transpose() * Xc / n;
  m.corr = Xc.transpose() * yc / (n * m.yscale);
  return m;
}

// Cyclic coordinate descent for
//   (1/2) w'Gw - c'w + l1 ||w||_1 + (l2/2) ||w||^2
// starting from (and updating) w.
void coordinate_descent(const Eigen::MatrixXd& G, const Eigen::VectorXd& c, double l1, double l2,
                        Eigen::VectorXd& w, const ElasticNetOptions& opt) {
  const auto p = G.cols();
  double max_change = 0;
  for (std::size_t sweep = 0; sweep < opt.max_iter; ++sweep) {
    Eigen::VectorXd Gw = G * w;
    max_change = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double denom = G(j, j) + l2;
      const double old = w(j);
      const double rho = c(j) - Gw(j) + G(j, j) * old;
      const double updated = denom > 0 ? soft_threshold(rho, l1) / denom : 0.0;
      if (updated != old) {
        Gw += (updated - old) * G.col(j);
        w(j) = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    if (max_change <= opt.tol) return;
  }
  throw NonConvergence("elastic net: coordinate descent did not converge in " +
                           std::to_string(opt.max_iter) + " sweeps",
                       max_change);
}

void check_inputs(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l1_ratio) {
  if (X.rows() != y.size()) throw Error("elastic net: X and y row counts differ");
  if (X.rows() < 2) throw Error("elastic net: need at least two rows");
  if (!(l1_ratio >= 0 && l1_ratio <= 1)) throw Error("elastic net: l1_ratio must lie in [0, 1]");
  if (!X.allFinite() || !y.allFinite()) throw Error("non-finite input to elastic net");
}

}  // namespace

LinearModel fit_elastic_net(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                            double l1_ratio, const ElasticNetOptions& opt) {
  check_inputs(X, y, l1_ratio);
  if (!(alpha >= 0)) throw Error("elastic net: alpha must be >= 0");
  const auto m = moments(X, y);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
  coordinate_descent(m.gram, m.corr, alpha * l1_ratio / m.yscale, alpha * (1 - l1_ratio), w, opt);

  LinearModel out;
  out.algorithm = "ElasticNet";
  out.coef = w * m.yscale;
  out.intercept = m.ybar - m.xbar.dot(out.coef);
  out.hyperparameters["alpha"] = alpha;
  out.hyperparameters["l1_ratio"] = l1_ratio;
  return out;
}

double elastic_net_alpha_max(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l1_ratio) {
  const double n = static_cast<double>(X.rows());
  const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double top = X.cols() > 0 ? (Xc.transpose() * yc).cwiseAbs().maxCoeff() : 0.0;
  return top / (n * std::max(l1_ratio, 1e-3));
}

std::vector<double> elastic_net_alpha_grid(double alpha_max, std::size_t n_alphas, double eps) {
  std::vector<double> grid(n_alphas);
  if (n_alphas == 1) {
    grid[0] = alpha_max;
    return grid;
  }
  const double lo = std::log10(alpha_max * eps);
  const double hi = std::log10(alpha_max);
  for (std::size_t i = 0; i < n_alphas; ++i)
    grid[i] = std::pow(10.0, hi + (lo - hi) * static_cast<double>(i) / static_cast<double>(n_alphas - 1));
  grid.front() = alpha_max;
  return grid;
}

LinearModel fit_elastic_net_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l1_ratio,
                               const ElasticNetCvOptions& opt) {
  check_inputs(X, y, l1_ratio);
  const auto n = X.rows();
  const auto p = X.cols();
  const auto k = static_cast<Eigen::Index>(opt.folds);
  if (k < 2 || k > n) throw Error("elastic net cv: folds must lie in [2, n]");

  LinearModel out;
  out.algorithm = "ENCV";
  out.hyperparameters["l1_ratio"] = l1_ratio;
  out.hyperparameters["folds"] = static_cast<double>(opt.folds);

  const double amax = elastic_net_alpha_max(X, y, l1_ratio);
  if (!(amax > 0)) {
    out.coef = Eigen::VectorXd::Zero(p);
    out.intercept = y.mean();
    out.hyperparameters["alpha"] = 0;
    out.metadata["path_degenerate"] = "true";
    return out;
  }
  const auto grid = elastic_net_alpha_grid(amax, opt.n_alphas, opt.eps);
  std::vector<double> cv_mse(grid.size(), 0.0);

  for (Eigen::Index f = 0; f < k; ++f) {
    const Eigen::Index lo = f * n / k;
    const Eigen::Index hi = (f + 1) * n / k;
    const Eigen::Index ntr = n - (hi - lo);
    Eigen::MatrixXd Xtr(ntr, p);
    Eigen::VectorXd ytr(ntr);
    Xtr.topRows(lo) = X.topRows(lo);
    Xtr.bottomRows(n - hi) = X.bottomRows(n - hi);
    ytr.head(lo) = y.head(lo);
    ytr.tail(n - hi) = y.tail(n - hi);
    const Eigen::MatrixXd Xte = X.middleRows(lo, hi - lo);
    const Eigen::VectorXd yte = y.segment(lo, hi - lo);

    const auto m = moments(Xtr, ytr);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    for (std::size_t a = 0; a < grid.size(); ++a) {
      coordinate_descent(m.gram, m.corr, grid[a] * l1_ratio / m.yscale, grid[a] * (1 - l1_ratio), w,
                         opt.cd);
      const Eigen::VectorXd coef = w * m.yscale;
      const Eigen::VectorXd pred =
          ((Xte.rowwise() - m.xbar) * coef).array() + m.ybar;
      cv_mse[a] += (yte - pred).squaredNorm() / static_cast<double>(hi - lo) / static_cast<double>(k);
    }
  }

  const auto best = static_cast<std::size_t>(
      std::distance(cv_mse.begin(), std::min_element(cv_mse.begin(), cv_mse.end())));

  const auto m = moments(X, y);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  for (std::size_t a = 0; a <= best; ++a)
    coordinate_descent(m.gram, m.corr, grid[a] * l1_ratio / m.yscale, grid[a] * (1 - l1_ratio), w,
                       opt.cd);
  out.coef = w * m.yscale;
  out.intercept = m.ybar - m.xbar.dot(out.coef);
  out.hyperparameters["alpha"] = grid[best];
  out.metadata["alpha_index"] = std::to_string(best);
  out.metadata["cv_mse"] = format_double(cv_mse[best]);
  return out;
}

}  // namespace hpcpred
