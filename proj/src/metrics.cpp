#include "hpcpred/metrics.hpp"

#include "hpcpred/error.hpp"

namespace hpcpred {

namespace {

void check(const Eigen::VectorXd& a, const Eigen::VectorXd& b, Eigen::Index min_len) {
  if (a.size() != b.size()) throw Error("metric: length mismatch");
  if (a.size() < min_len) throw Error("metric: need at least " + std::to_string(min_len) + " values");
}

struct Counts {
  double tp = 0, fp = 0, fn = 0;
};

Counts confusion(const Eigen::VectorXd& t, const Eigen::VectorXd& p) {
  check(t, p, 1);
  Counts c;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const bool actual = t(i) == 1;
    const bool predicted = p(i) == 1;
    c.tp += actual && predicted;
    c.fp += !actual && predicted;
    c.fn += actual && !predicted;
  }
  return c;
}

}  // namespace

double r_squared(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  check(y_true, y_pred, 2);
  const double mu = y_true.mean();
  const double ss_tot = (y_true.array() - mu).square().sum();
  if (!(ss_tot > 0)) throw ConstantTarget("r_squared: y_true is constant");
  const double ss_res = (y_true - y_pred).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

double mean_squared_error(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  check(y_true, y_pred, 1);
  return (y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size());
}

double accuracy(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  check(y_true, y_pred, 1);
  double correct = 0;
  for (Eigen::Index i = 0; i < y_true.size(); ++i) correct += y_true(i) == y_pred(i);
  return correct / static_cast<double>(y_true.size());
}

double precision(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  const auto c = confusion(y_true, y_pred);
  return c.tp + c.fp > 0 ? c.tp / (c.tp + c.fp) : 0.0;
}

double recall(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  const auto c = confusion(y_true, y_pred);
  return c.tp + c.fn > 0 ? c.tp / (c.tp + c.fn) : 0.0;
}

double f1_score(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  const double p = precision(y_true, y_pred);
  const double r = recall(y_true, y_pred);
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

}  // namespace hpcpred
