#include "hpcpred/classify.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "hpcpred/error.hpp"
#include "hpcpred/util.hpp"

namespace hpcpred {

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_binary(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const char* who) {
  if (X.rows() != y.size()) throw Error(std::string(who) + ": X and y row counts differ");
  if (X.rows() < 1) throw Error(std::string(who) + ": need at least one row");
  if (!X.allFinite()) throw Error(std::string(who) + ": non-finite input");
  for (auto v : y)
    if (v != 0 && v != 1) throw Error(std::string(who) + ": labels must be 0 or 1");
}

}  // namespace

double logistic_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double intercept,
                          const Eigen::VectorXd& weights, double l2_strength) {
  const Eigen::VectorXd z = (X * weights).array() + intercept;
  double f = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) f += softplus(z(i)) - y(i) * z(i);
  return f + 0.5 * l2_strength * weights.squaredNorm();
}

Eigen::VectorXd LogisticModel::predict_proba(const Eigen::MatrixXd& X) const {
  if (X.cols() != weights.size())
    throw SchemaMismatch("logistic model expects " + std::to_string(weights.size()) + " columns");
  Eigen::VectorXd z = (X * weights).array() + intercept;
  for (auto& v : z) v = sigmoid(v);
  return z;
}

Eigen::VectorXd LogisticModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd p = predict_proba(X);
  for (auto& v : p) v = v > 0.5 ? 1.0 : 0.0;
  return p;
}

LogisticModel fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double l2_strength,
                           const LogisticOptions& opt) {
  check_binary(X, y, "logistic");
  if (!(l2_strength >= 0)) throw Error("logistic: l2_strength must be >= 0");
  const auto n = X.rows();
  const auto p = X.cols();
  Eigen::MatrixXd Xa(n, p + 1);
  Xa.col(0).setOnes();
  Xa.rightCols(p) = X;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  auto objective = [&](const Eigen::VectorXd& t) {
    return logistic_objective(X, y, t(0), t.tail(p), l2_strength);
  };

  double f = objective(theta);
  double gnorm = 0;
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    const Eigen::VectorXd z = Xa * theta;
    Eigen::VectorXd prob(n), curv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      prob(i) = sigmoid(z(i));
      curv(i) = prob(i) * (1 - prob(i));
    }
    Eigen::VectorXd grad = Xa.transpose() * (prob - y);
    grad.tail(p) += l2_strength * theta.tail(p);
    gnorm = grad.norm();
    if (gnorm <= opt.gradient_tol) {
      LogisticModel m;
      m.intercept = theta(0);
      m.weights = theta.tail(p);
      m.l2_strength = l2_strength;
      m.iterations = it;
      m.gradient_norm = gnorm;
      return m;
    }

    Eigen::MatrixXd H = Xa.transpose() * (Xa.array().colwise() * curv.array()).matrix();
    H.diagonal().tail(p).array() += l2_strength;
    H.diagonal().array() += 1e-12 * std::max(1.0, H.diagonal().maxCoeff());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd dir = ldlt.info() == Eigen::Success ? Eigen::VectorXd(-ldlt.solve(grad))
                                                        : Eigen::VectorXd(-grad);
    double slope = grad.dot(dir);
    if (!(slope < 0)) {
      dir = -grad;
      slope = -grad.squaredNorm();
    }

    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = theta + step * dir;
      const double ft = objective(trial);
      if (ft <= f + 1e-4 * step * slope) {
        theta = trial;
        f = ft;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // Objective is flat to rounding; take the full Newton step and let the
      // gradient test decide.
      theta += dir;
      f = objective(theta);
    }
  }
  throw NonConvergence("logistic: gradient norm " + format_double(gnorm) + " after " +
                           std::to_string(opt.max_iter) + " Newton iterations",
                       gnorm);
}

GaussianNBModel fit_gnb(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  check_binary(X, y, "gaussian nb");
  const auto n = X.rows();
  const auto p = X.cols();
  double count[2] = {0, 0};
  for (auto v : y) count[v == 1 ? 1 : 0] += 1;
  if (count[0] == 0 || count[1] == 0) throw SingleClass("gaussian nb: training labels are constant");

  GaussianNBModel m;
  m.means = Eigen::MatrixXd::Zero(2, p);
  m.variances = Eigen::MatrixXd::Zero(2, p);
  for (Eigen::Index i = 0; i < n; ++i) m.means.row(y(i) == 1 ? 1 : 0) += X.row(i);
  for (int c = 0; c < 2; ++c) m.means.row(c) /= count[c];
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = y(i) == 1 ? 1 : 0;
    m.variances.row(c).array() += (X.row(i) - m.means.row(c)).array().square();
  }
  for (int c = 0; c < 2; ++c) m.variances.row(c) /= count[c];

  double max_var = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double mu = X.col(j).mean();
    max_var = std::max(max_var, (X.col(j).array() - mu).square().sum() / static_cast<double>(n));
  }
  m.variance_floor = max_var > 0 ? 1e-9 * max_var : 1e-9;
  m.variances = m.variances.cwiseMax(m.variance_floor);
  m.priors << count[0] / static_cast<double>(n), count[1] / static_cast<double>(n);
  return m;
}

Eigen::MatrixXd GaussianNBModel::joint_log_likelihood(const Eigen::MatrixXd& X) const {
  if (X.cols() != means.cols())
    throw SchemaMismatch("gaussian nb expects " + std::to_string(means.cols()) + " columns");
  Eigen::MatrixXd out(X.rows(), 2);
  for (int c = 0; c < 2; ++c) {
    const double log_norm =
        -0.5 * (2 * std::numbers::pi * variances.row(c).array()).log().sum() + std::log(priors(c));
    const Eigen::ArrayXXd diff = X.rowwise() - means.row(c);
    out.col(c) = (log_norm - 0.5 * (diff.square().rowwise() / variances.row(c).array()).rowwise().sum()).matrix();
  }
  return out;
}

Eigen::VectorXd GaussianNBModel::predict_proba(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd jll = joint_log_likelihood(X);
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = sigmoid(jll(i, 1) - jll(i, 0));
  return out;
}

Eigen::VectorXd GaussianNBModel::predict(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd jll = joint_log_likelihood(X);
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = jll(i, 1) > jll(i, 0) ? 1.0 : 0.0;
  return out;
}

ForestModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const ForestParams& params) {
  check_binary(X, y, "random forest");
  if (params.n_trees == 0) throw Error("random forest: n_trees must be >= 1");
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());

  ForestModel forest;
  forest.bootstrap = params.bootstrap;
  forest.max_features = params.max_features
                            ? std::min(*params.max_features, p)
                            : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))));
  forest.max_features = std::max<std::size_t>(forest.max_features, 1);

  TreeParams tp;
  tp.criterion = SplitCriterion::kGini;
  tp.max_depth = params.max_depth;
  tp.max_features = forest.max_features;

  std::vector<std::size_t> sample;
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    const std::uint64_t seed = derive_seed(params.seed, t);
    forest.tree_seeds.push_back(seed);
    sample.clear();
    if (params.bootstrap) {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      sample.resize(n);
      for (auto& s : sample) s = pick(rng);
    }
    tp.seed = derive_seed(seed, 1);
    forest.trees.push_back(fit_tree(X, y, tp, sample));
  }
  return forest;
}

Eigen::VectorXd ForestModel::predict_proba(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(X.rows());
  for (const auto& t : trees) acc += t.predict_value(X);
  return acc / static_cast<double>(trees.size());
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(X.rows());
  for (const auto& t : trees) votes += t.predict(X);
  const double half = static_cast<double>(trees.size()) / 2.0;
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = votes(i) > half ? 1.0 : 0.0;
  return out;
}

}  // namespace hpcpred
