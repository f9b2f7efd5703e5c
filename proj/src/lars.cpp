#include <algorithm>
#include <cmath>
#include <limits>

#include "hpcpred/error.hpp"
#include "hpcpred/linear.hpp"

namespace hpcpred {

// Lasso homotopy. On the active set A with signs s the solution is
//   w_A(lambda) = G_A^{-1} (c_A - lambda s_A),  G = Xc'Xc, c = Xc'yc,
// linear in lambda. Between knots an inactive j has correlation
//   c_j(lambda) = a_j + lambda b_j
// and joins when |c_j| reaches lambda; an active coefficient leaves when it
// crosses zero. Each step moves to the largest such event below the
// current lambda.
std::vector<LarsKnot> lars_lasso_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() != y.size()) throw Error("lars: X and y row counts differ");
  const auto n = X.rows();
  const auto p = X.cols();
  const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const Eigen::MatrixXd gram = Xc.transpose() * Xc;
  const Eigen::VectorXd corr = Xc.transpose() * yc;

  std::vector<LarsKnot> path;
  auto push = [&](double lambda, const Eigen::VectorXd& w, const std::vector<std::size_t>& act) {
    path.push_back({lambda, lambda / static_cast<double>(n), w, act});
  };

  std::vector<bool> usable(static_cast<std::size_t>(p));
  const double max_diag = p > 0 ? gram.diagonal().maxCoeff() : 0.0;
  for (Eigen::Index j = 0; j < p; ++j) usable[j] = gram(j, j) > 1e-12 * std::max(1.0, max_diag);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  double lambda = 0;
  Eigen::Index first = -1;
  for (Eigen::Index j = 0; j < p; ++j)
    if (usable[j] && (first < 0 || std::abs(corr(j)) > lambda)) {
      lambda = std::abs(corr(j));
      first = j;
    }
  const double scale = std::max(lambda, std::sqrt(yc.squaredNorm() * std::max(max_diag, 0.0)));
  if (first < 0 || lambda <= 1e-13 * std::max(scale, 1e-300)) {
    push(0.0, w, {});
    return path;
  }
  push(lambda, w, {});

  std::vector<std::size_t> active = {static_cast<std::size_t>(first)};
  std::vector<double> sign = {corr(first) > 0 ? 1.0 : -1.0};
  const double eps = 1e-10 * lambda;
  const std::size_t max_active = static_cast<std::size_t>(std::min<Eigen::Index>(p, n - 1));

  for (std::size_t iter = 0; iter < 8 * static_cast<std::size_t>(p) + 8; ++iter) {
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd GA(k, k);
    Eigen::VectorXd cA(k), sA(k);
    for (Eigen::Index a = 0; a < k; ++a) {
      cA(a) = corr(active[a]);
      sA(a) = sign[a];
      for (Eigen::Index b = 0; b < k; ++b) GA(a, b) = gram(active[a], active[b]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(GA);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-13)) break;
    const Eigen::VectorXd pA = ldlt.solve(cA);
    const Eigen::VectorXd qA = ldlt.solve(sA);

    double next = 0;
    Eigen::Index join = -1;
    std::size_t drop = active.size();
    std::vector<bool> in_active(static_cast<std::size_t>(p), false);
    for (auto j : active) in_active[j] = true;

    if (active.size() < max_active) {
      for (Eigen::Index j = 0; j < p; ++j) {
        if (in_active[j] || !usable[j]) continue;
        double gp = 0, gq = 0;
        for (Eigen::Index a = 0; a < k; ++a) {
          gp += gram(j, active[a]) * pA(a);
          gq += gram(j, active[a]) * qA(a);
        }
        const double aj = corr(j) - gp;
        const double bj = gq;
        for (double cand : {aj / (1.0 - bj), -aj / (1.0 + bj)}) {
          if (std::isfinite(cand) && cand > eps && cand < lambda - eps && cand > next) {
            next = cand;
            join = j;
          }
        }
      }
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
      if (qA(a) == 0) continue;
      const double cand = pA(a) / qA(a);
      if (std::isfinite(cand) && cand > eps && cand < lambda - eps && cand >= next) {
        next = cand;
        drop = a;
        join = -1;
      }
    }

    const Eigen::VectorXd wA = pA - next * qA;
    w.setZero();
    for (Eigen::Index a = 0; a < k; ++a) w(active[a]) = wA(a);

    if (drop < active.size()) {
      w(active[drop]) = 0;
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
      sign.erase(sign.begin() + static_cast<std::ptrdiff_t>(drop));
      push(next, w, active);
    } else if (join >= 0) {
      push(next, w, active);
      double cj = corr(join);
      for (Eigen::Index a = 0; a < k; ++a) cj -= gram(join, active[a]) * wA(a);
      active.push_back(static_cast<std::size_t>(join));
      sign.push_back(cj > 0 ? 1.0 : -1.0);
    } else {
      push(0.0, w, active);
      break;
    }
    lambda = next;
    if (active.empty()) break;
  }
  return path;
}

double information_criterion(double rss, std::size_t n, std::size_t nonzero,
                             InformationCriterion ic) {
  const double nn = static_cast<double>(n);
  const double penalty = ic == InformationCriterion::kAic ? 2.0 : std::log(nn);
  const double safe = std::max(rss, std::numeric_limits<double>::min());
  return nn * std::log(safe / nn) + penalty * static_cast<double>(nonzero + 1);
}

LinearModel fit_lasso_lars_ic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              InformationCriterion ic) {
  if (X.rows() <= 2) throw Error("lasso-lars-ic: need more than two rows");
  if (!X.allFinite() || !y.allFinite()) throw Error("non-finite input to lasso-lars-ic");
  const auto path = lars_lasso_path(X, y);
  const Eigen::RowVectorXd xbar = X.colwise().mean();
  const double ybar = y.mean();
  const Eigen::MatrixXd Xc = X.rowwise() - xbar;
  const Eigen::VectorXd yc = y.array() - ybar;

  std::size_t best = 0;
  double best_ic = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double rss = (yc - Xc * path[k].coef).squaredNorm();
    const auto nnz = static_cast<std::size_t>((path[k].coef.array() != 0).count());
    const double v = information_criterion(rss, static_cast<std::size_t>(X.rows()), nnz, ic);
    if (v < best_ic) {
      best_ic = v;
      best = k;
    }
  }

  LinearModel m;
  m.algorithm = "LLIC";
  m.coef = path[best].coef;
  m.intercept = ybar - xbar.dot(m.coef);
  m.hyperparameters["alpha"] = path[best].alpha;
  m.metadata["criterion"] = ic == InformationCriterion::kAic ? "aic" : "bic";
  m.metadata["path_knots"] = std::to_string(path.size());
  if (path.size() == 1 && path.front().active.empty()) m.metadata["path_degenerate"] = "true";
  return m;
}

}  // namespace hpcpred
