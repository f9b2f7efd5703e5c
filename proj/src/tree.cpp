#include "hpcpred/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hpcpred/error.hpp"

namespace hpcpred {

double gini_impurity(double n0, double n1) {
  const double n = n0 + n1;
  if (n <= 0) return 0.0;
  const double p0 = n0 / n;
  const double p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

int DecisionTree::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int i = 0;
  while (!nodes[i].is_leaf()) i = row(nodes[i].feature) <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return i;
}

Eigen::VectorXd DecisionTree::predict_value(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != n_features)
    throw SchemaMismatch("tree expects " + std::to_string(n_features) + " columns, got " +
                         std::to_string(X.cols()));
  Eigen::VectorXd out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = nodes[leaf_index(X.row(i))].value;
  return out;
}

Eigen::VectorXd DecisionTree::predict(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd v = predict_value(X);
  if (criterion == SplitCriterion::kGini)
    for (auto& x : v) x = x > 0.5 ? 1.0 : 0.0;
  return v;
}

int DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  int best = 0;
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (!nodes[i].is_leaf()) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return best;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0;
  double decrease = 0;
};

// Larger decrease wins; exact ties go to the lower feature, then the lower
// threshold, so the result does not depend on candidate order.
bool better(const Split& a, const Split& b) {
  if (b.feature < 0) return true;
  if (a.decrease != b.decrease) return a.decrease > b.decrease;
  if (a.feature != b.feature) return a.feature < b.feature;
  return a.threshold < b.threshold;
}

double midpoint(double a, double b) {
  double t = a + (b - a) / 2;
  if (!(t >= a && t < b)) t = a;
  return t;
}

class Builder {
 public:
  Builder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeParams& params)
      : X_(X), y_(y), params_(params), rng_(params.seed) {}

  DecisionTree build(std::vector<std::size_t> idx) {
    DecisionTree tree;
    tree.criterion = params_.criterion;
    tree.n_features = static_cast<std::size_t>(X_.cols());
    idx_ = std::move(idx);
    struct Work {
      int node;
      std::size_t begin, end;
      int depth;
    };
    tree.nodes.emplace_back();
    std::vector<Work> stack = {{0, 0, idx_.size(), 0}};
    while (!stack.empty()) {
      Work w = stack.back();
      stack.pop_back();
      TreeNode& node = tree.nodes[w.node];
      summarize(w.begin, w.end, node);

      const std::size_t m = w.end - w.begin;
      const bool depth_capped = params_.max_depth && w.depth >= *params_.max_depth;
      if (node.impurity <= 0 || m < params_.min_samples_split || m < 2 || depth_capped) continue;

      Split s = best_split(w.begin, w.end, node);
      if (s.feature < 0) continue;

      auto mid = std::stable_partition(
          idx_.begin() + static_cast<std::ptrdiff_t>(w.begin),
          idx_.begin() + static_cast<std::ptrdiff_t>(w.end),
          [&](std::size_t r) { return X_(static_cast<Eigen::Index>(r), s.feature) <= s.threshold; });
      const auto split_at = static_cast<std::size_t>(mid - idx_.begin());

      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      TreeNode& parent = tree.nodes[w.node];
      parent.feature = s.feature;
      parent.threshold = s.threshold;
      parent.impurity_decrease = s.decrease;
      parent.left = left;
      parent.right = left + 1;
      stack.push_back({left + 1, split_at, w.end, w.depth + 1});
      stack.push_back({left, w.begin, split_at, w.depth + 1});
    }
    return tree;
  }

 private:
  void summarize(std::size_t begin, std::size_t end, TreeNode& node) const {
    const double m = static_cast<double>(end - begin);
    double sum = 0;
    for (std::size_t i = begin; i < end; ++i) sum += y_(static_cast<Eigen::Index>(idx_[i]));
    node.n_samples = end - begin;
    node.value = sum / m;
    if (params_.criterion == SplitCriterion::kGini) {
      node.impurity = gini_impurity(m - sum, sum);
    } else {
      double sse = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const double d = y_(static_cast<Eigen::Index>(idx_[i])) - node.value;
        sse += d * d;
      }
      node.impurity = sse / m;
    }
  }

  std::vector<Eigen::Index> candidate_features() {
    std::vector<Eigen::Index> f(static_cast<std::size_t>(X_.cols()));
    std::iota(f.begin(), f.end(), Eigen::Index{0});
    if (params_.max_features) std::shuffle(f.begin(), f.end(), rng_);
    return f;
  }

  Split best_split(std::size_t begin, std::size_t end, const TreeNode& node) {
    const std::size_t m = end - begin;
    const double md = static_cast<double>(m);
    const double parent = md * node.impurity;
    const double min_gain = 1e-12 * std::max(parent, params_.criterion == SplitCriterion::kGini ? md : 0.0);
    const std::size_t quota = params_.max_features ? *params_.max_features : static_cast<std::size_t>(X_.cols());

    Split best;
    std::size_t evaluated = 0;
    buf_.resize(m);
    for (Eigen::Index f : candidate_features()) {
      if (evaluated >= quota) break;
      for (std::size_t i = 0; i < m; ++i) {
        const auto r = static_cast<Eigen::Index>(idx_[begin + i]);
        // Centering keeps the running sums small for large-valued targets.
        const double target = params_.criterion == SplitCriterion::kGini ? y_(r) : y_(r) - node.value;
        buf_[i] = {X_(r, f), target};
      }
      std::sort(buf_.begin(), buf_.end());
      if (buf_.front().first == buf_.back().first) continue;
      ++evaluated;

      double total = 0;
      for (const auto& [x, t] : buf_) total += t;
      double left = 0;
      for (std::size_t i = 1; i < m; ++i) {
        left += buf_[i - 1].second;
        if (!(buf_[i - 1].first < buf_[i].first)) continue;
        const double nl = static_cast<double>(i);
        const double nr = md - nl;
        const double right = total - left;
        double decrease;
        if (params_.criterion == SplitCriterion::kGini) {
          decrease = parent - nl * gini_impurity(nl - left, left) - nr * gini_impurity(nr - right, right);
        } else {
          decrease = left * left / nl + right * right / nr - total * total / md;
        }
        Split cand{static_cast<int>(f), midpoint(buf_[i - 1].first, buf_[i].first), decrease};
        if (better(cand, best)) best = cand;
      }
    }
    if (best.feature >= 0 && !(best.decrease > min_gain)) best.feature = -1;
    return best;
  }

  const Eigen::MatrixXd& X_;
  const Eigen::VectorXd& y_;
  TreeParams params_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> idx_;
  std::vector<std::pair<double, double>> buf_;
};

}  // namespace

DecisionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeParams& params,
                      std::span<const std::size_t> sample) {
  if (X.rows() != y.size()) throw Error("tree: X and y row counts differ");
  if (X.rows() < 1) throw Error("tree: need at least one row");
  if (!X.allFinite() || !y.allFinite()) throw Error("non-finite input to tree");
  if (params.criterion == SplitCriterion::kGini)
    for (auto v : y)
      if (v != 0 && v != 1) throw Error("classification tree: labels must be 0 or 1");
  if (params.max_features && *params.max_features == 0) throw Error("tree: max_features must be >= 1");

  std::vector<std::size_t> idx;
  if (sample.empty()) {
    idx.resize(static_cast<std::size_t>(X.rows()));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
  } else {
    idx.assign(sample.begin(), sample.end());
  }
  return Builder(X, y, params).build(std::move(idx));
}

DecisionTree fit_cart_regression(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const CartParams& params) {
  TreeParams p;
  p.criterion = SplitCriterion::kMse;
  p.max_depth = params.max_depth;
  p.min_samples_split = params.min_samples_split;
  return fit_tree(X, y, p);
}

DecisionTree fit_cart_classifier(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const CartParams& params) {
  TreeParams p;
  p.criterion = SplitCriterion::kGini;
  p.max_depth = params.max_depth;
  p.min_samples_split = params.min_samples_split;
  return fit_tree(X, y, p);
}

}  // namespace hpcpred
