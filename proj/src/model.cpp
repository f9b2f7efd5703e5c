#include "hpcpred/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hpcpred/error.hpp"

namespace hpcpred {

const std::vector<std::string>& regression_models() {
  static const std::vector<std::string> names = {"LinearRegression", "LLIC", "ENCV", "Ridge", "CART"};
  return names;
}

const std::vector<std::string>& classification_models() {
  static const std::vector<std::string> names = {"LR", "CART", "GNB", "RF"};
  return names;
}

const std::vector<std::string>& task_models(Task task) {
  return is_classification(task) ? classification_models() : regression_models();
}

bool is_known_model(Task task, std::string_view name) {
  const auto& names = task_models(task);
  return std::find(names.begin(), names.end(), name) != names.end();
}

InputTransform model_transform(Task task, std::string_view name) {
  if (!is_known_model(task, name))
    throw Error("unknown model '" + std::string(name) + "' for task " + std::string(task_name(task)));
  if (name == "CART" || name == "RF") return InputTransform::kRaw;
  if (name == "GNB") return InputTransform::kStandardized;
  return InputTransform::kLinear;
}

std::string_view transform_name(InputTransform t) {
  switch (t) {
    case InputTransform::kLinear: return "linear";
    case InputTransform::kStandardized: return "standardized";
    case InputTransform::kRaw: return "raw";
  }
  return "raw";
}

InputTransform parse_transform(std::string_view s) {
  if (s == "linear") return InputTransform::kLinear;
  if (s == "standardized") return InputTransform::kStandardized;
  if (s == "raw") return InputTransform::kRaw;
  throw Error("unknown input transform: " + std::string(s));
}

Eigen::MatrixXd Preprocessor::apply(const Eigen::MatrixXd& X) const {
  const Eigen::MatrixXd Z = scaler ? scaler->transform(X) : X;
  Eigen::MatrixXd out(Z.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    if (static_cast<Eigen::Index>(kept[k]) >= Z.cols())
      throw SchemaMismatch("input has " + std::to_string(Z.cols()) + " columns, preprocessing expects more");
    out.col(static_cast<Eigen::Index>(k)) = Z.col(static_cast<Eigen::Index>(kept[k]));
  }
  return out;
}

Preprocessor fit_preprocessor(InputTransform kind, const Eigen::MatrixXd& X,
                              const std::vector<std::string>& columns,
                              const std::vector<bool>& numeric) {
  const auto p = static_cast<std::size_t>(X.cols());
  if (columns.size() != p || numeric.size() != p)
    throw Error("preprocessor: column metadata does not match the matrix");
  Preprocessor pre;
  pre.kind = kind;
  std::vector<bool> keep(p, true);
  if (kind != InputTransform::kRaw) {
    std::vector<std::size_t> degenerate;
    pre.scaler = fit_scaler(X, numeric, &degenerate);
    if (kind == InputTransform::kLinear)
      for (auto j : degenerate) keep[j] = false;
  }
  if (kind == InputTransform::kLinear && X.rows() > 0) {
    std::vector<std::size_t> onehots;
    for (std::size_t j = 0; j < p; ++j) {
      if (numeric[j] || !keep[j]) continue;
      const auto col = X.col(static_cast<Eigen::Index>(j));
      if (col.minCoeff() == col.maxCoeff())
        keep[j] = false;
      else
        onehots.push_back(j);
    }
    if (!onehots.empty()) {
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(X.rows());
      for (auto j : onehots) sum += X.col(static_cast<Eigen::Index>(j));
      if ((sum.array() == 1.0).all()) keep[onehots.back()] = false;
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    if (keep[j])
      pre.kept.push_back(j);
    else
      pre.dropped.push_back(columns[j]);
  }
  return pre;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

ModelParams fit_learner(Task task, std::string_view name, const Eigen::MatrixXd& X,
                        const Eigen::VectorXd& y, const Hyperparameters& hp) {
  if (!is_classification(task)) {
    if (name == "LinearRegression") return fit_ols(X, y);
    if (name == "LLIC") return fit_lasso_lars_ic(X, y, hp.lars_criterion);
    if (name == "ENCV") {
      ElasticNetCvOptions opt;
      opt.folds = hp.encv_folds;
      return fit_elastic_net_cv(X, y, hp.encv_l1_ratio, opt);
    }
    if (name == "Ridge") return fit_ridge(X, y, hp.ridge_alpha);
    if (name == "CART") return fit_cart_regression(X, y, CartParams{hp.max_depth, 2});
  } else {
    if (name == "LR") return fit_logistic(X, y, hp.lr_l2);
    if (name == "CART") return fit_cart_classifier(X, y, CartParams{hp.max_depth, 2});
    if (name == "GNB") return fit_gnb(X, y);
    if (name == "RF") {
      ForestParams fp;
      fp.n_trees = hp.rf_n_trees;
      fp.max_depth = hp.max_depth;
      fp.seed = hp.seed;
      return fit_random_forest(X, y, fp);
    }
  }
  throw Error("unknown model '" + std::string(name) + "' for task " + std::string(task_name(task)));
}

}  // namespace

TrainedModel train_model(Task task, std::string_view name, const std::vector<std::string>& columns,
                         const std::vector<bool>& numeric, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y, const Hyperparameters& hp,
                         bool with_user_features, bool measure_time) {
  TrainedModel m;
  m.name = std::string(name);
  m.task = task;
  m.with_user_features = with_user_features;
  m.columns = columns;
  m.numeric = numeric;
  m.hp = hp;
  m.pre = fit_preprocessor(model_transform(task, name), X, columns, numeric);

  Eigen::MatrixXd Z = m.pre.apply(X);
  Eigen::VectorXd target = y;
  if (!is_classification(task) && m.pre.kind == InputTransform::kLinear && y.size() > 0) {
    const double mu = y.mean();
    const double sd = std::sqrt((y.array() - mu).square().sum() / static_cast<double>(y.size()));
    if (sd > 0 && std::isfinite(sd)) {
      m.pre.target_scaled = true;
      m.pre.target_mean = mu;
      m.pre.target_scale = sd;
      target = (y.array() - mu) / sd;
    }
  }
  using Clock = std::chrono::steady_clock;
  double elapsed = 0;
  std::vector<std::string> rank_dropped;
  for (;;) {
    const auto t0 = Clock::now();
    try {
      m.params = fit_learner(task, name, Z, target, hp);
      elapsed += std::chrono::duration<double>(Clock::now() - t0).count();
      break;
    } catch (const RankDeficient& e) {
      // Plain least squares cannot separate collinear columns; drop the ones
      // the pivoted QR could not resolve and refit.
      elapsed += std::chrono::duration<double>(Clock::now() - t0).count();
      if (e.columns().empty() || e.columns().size() >= m.pre.kept.size()) throw;
      std::vector<std::size_t> bad = e.columns();
      std::sort(bad.rbegin(), bad.rend());
      for (auto b : bad) {
        rank_dropped.push_back(columns[m.pre.kept[b]]);
        m.pre.dropped.push_back(columns[m.pre.kept[b]]);
        m.pre.kept.erase(m.pre.kept.begin() + static_cast<std::ptrdiff_t>(b));
      }
      Z = m.pre.apply(X);
    }
  }
  m.fit_time_s = measure_time ? elapsed : 0.0;

  std::vector<std::string> learner_columns;
  for (auto j : m.pre.kept) learner_columns.push_back(columns[j]);
  if (auto* lin = std::get_if<LinearModel>(&m.params)) {
    lin->columns = learner_columns;
    lin->fit_time_s = m.fit_time_s;
    for (const auto& [k, v] : lin->metadata) m.metadata[k] = v;
  }
  if (!rank_dropped.empty()) {
    std::string joined;
    for (const auto& c : rank_dropped) joined += (joined.empty() ? "" : ",") + c;
    m.metadata["rank_dropped"] = joined;
  }
  if (auto* lr = std::get_if<LogisticModel>(&m.params))
    m.metadata["newton_iterations"] = std::to_string(lr->iterations);
  if (std::holds_alternative<ForestModel>(m.params))
    m.metadata["n_trees"] = std::to_string(hp.rf_n_trees);
  return m;
}

Eigen::VectorXd TrainedModel::predict(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != columns.size())
    throw SchemaMismatch(name + " expects " + std::to_string(columns.size()) + " input columns, got " +
                         std::to_string(X.cols()));
  const Eigen::MatrixXd Z = pre.apply(X);
  Eigen::VectorXd out = std::visit([&](const auto& model) -> Eigen::VectorXd { return model.predict(Z); }, params);
  if (pre.target_scaled) out = (out.array() * pre.target_scale + pre.target_mean).matrix();
  return out;
}

Eigen::VectorXd TrainedModel::predict_proba(const Eigen::MatrixXd& X) const {
  if (!is_classification(task)) throw Error(name + " is a regression model; no probabilities");
  if (static_cast<std::size_t>(X.cols()) != columns.size())
    throw SchemaMismatch(name + " expects " + std::to_string(columns.size()) + " input columns, got " +
                         std::to_string(X.cols()));
  const Eigen::MatrixXd Z = pre.apply(X);
  return std::visit(
      Overloaded{
          [&](const LinearModel&) -> Eigen::VectorXd { throw Error("linear model has no probabilities"); },
          [&](const DecisionTree& t) -> Eigen::VectorXd { return t.predict_value(Z); },
          [&](const auto& model) -> Eigen::VectorXd { return model.predict_proba(Z); },
      },
      params);
}

}  // namespace hpcpred
