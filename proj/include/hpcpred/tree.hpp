#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hpcpred {

enum class SplitCriterion { kMse, kGini };

struct TreeParams {
  SplitCriterion criterion = SplitCriterion::kMse;
  std::optional<int> max_depth;  // nullopt: unlimited
  std::size_t min_samples_split = 2;
  // Candidate features per split; nullopt: all. When set, candidates are
  // drawn per node from `seed`, skipping features constant in the node.
  std::optional<std::size_t> max_features;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0;
  int left = -1;
  int right = -1;
  // Regression: mean target. Classification: fraction of class 1.
  double value = 0;
  std::size_t n_samples = 0;
  // MSE: variance of targets; Gini: 1 - sum p_c^2.
  double impurity = 0;
  // n * impurity - n_left * impurity_left - n_right * impurity_right.
  double impurity_decrease = 0;

  bool is_leaf() const { return feature < 0; }
};

class DecisionTree {
 public:
  SplitCriterion criterion = SplitCriterion::kMse;
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t n_features = 0;

  // Index of the leaf reached by `row` (x <= threshold goes left).
  int leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  // Regression: leaf mean. Classification: predicted class, ties to 0.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  // Leaf values (class-1 fraction for classification trees).
  Eigen::VectorXd predict_value(const Eigen::MatrixXd& X) const;

  int depth() const;
  std::size_t leaf_count() const;
};

// Greedy CART. `sample` lists the training rows (repeats allowed, as in a
// bootstrap); empty means every row once.
DecisionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeParams& params,
                      std::span<const std::size_t> sample = {});

struct CartParams {
  std::optional<int> max_depth;
  std::size_t min_samples_split = 2;
};

DecisionTree fit_cart_regression(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const CartParams& params = {});
DecisionTree fit_cart_classifier(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                 const CartParams& params = {});

// Impurity of a binary node from class counts.
double gini_impurity(double n0, double n1);

}  // namespace hpcpred
