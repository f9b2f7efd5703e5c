#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hpcpred/classify.hpp"
#include "hpcpred/features.hpp"
#include "hpcpred/linear.hpp"
#include "hpcpred/tree.hpp"

namespace hpcpred {

struct Hyperparameters {
  double ridge_alpha = 0.5;
  double encv_l1_ratio = 0.5;
  std::size_t encv_folds = 5;
  InformationCriterion lars_criterion = InformationCriterion::kAic;
  double lr_l2 = 1.0;
  std::optional<int> max_depth;  // CART and RF; nullopt is unlimited
  std::size_t rf_n_trees = 100;
  std::uint64_t seed = 42;

  bool operator==(const Hyperparameters&) const = default;
};

// Report names, in report order.
const std::vector<std::string>& regression_models();      // LinearRegression LLIC ENCV Ridge CART
const std::vector<std::string>& classification_models();  // LR CART GNB RF
const std::vector<std::string>& task_models(Task task);
bool is_known_model(Task task, std::string_view name);

// What the learner sees.
//   kLinear: numeric columns z-scored, degenerate numeric columns and
//            constant one-hots removed, plus one reference one-hot so the
//            remaining one-hots do not sum to the intercept.
//   kStandardized: numeric columns z-scored, nothing removed.
//   kRaw: the matrix as assembled (trees and forests).
// Linear regressors also see a z-scored target; predictions are mapped back.
enum class InputTransform { kLinear, kStandardized, kRaw };
InputTransform model_transform(Task task, std::string_view name);
std::string_view transform_name(InputTransform t);
InputTransform parse_transform(std::string_view s);

struct Preprocessor {
  InputTransform kind = InputTransform::kRaw;
  std::optional<ColumnScaler> scaler;  // over every input column
  std::vector<std::size_t> kept;       // input columns handed to the learner
  std::vector<std::string> dropped;    // names of removed input columns
  bool target_scaled = false;
  double target_mean = 0;
  double target_scale = 1;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
};

Preprocessor fit_preprocessor(InputTransform kind, const Eigen::MatrixXd& X,
                              const std::vector<std::string>& columns,
                              const std::vector<bool>& numeric);

using ModelParams =
    std::variant<LinearModel, DecisionTree, LogisticModel, GaussianNBModel, ForestModel>;

struct TrainedModel {
  std::string name;
  Task task = Task::kCpuRegression;
  bool with_user_features = false;
  std::vector<std::string> columns;  // input columns, before preprocessing
  std::vector<bool> numeric;
  Hyperparameters hp;
  Preprocessor pre;
  ModelParams params;
  double fit_time_s = 0;
  std::map<std::string, std::string> metadata;

  // X holds the input columns. Regression: predicted target. Classification:
  // predicted class.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  // Classification only: probability of class 1.
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& X) const;
};

// Fits preprocessing on (X, y), then the learner. fit_time_s covers the
// learner call only, and stays 0 when measure_time is false.
TrainedModel train_model(Task task, std::string_view name, const std::vector<std::string>& columns,
                         const std::vector<bool>& numeric, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y, const Hyperparameters& hp,
                         bool with_user_features, bool measure_time = true);

}  // namespace hpcpred
