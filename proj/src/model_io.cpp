#include <filesystem>
#include <nlohmann/json.hpp>

#include "hpcpred/error.hpp"
#include "hpcpred/persist.hpp"
#include "hpcpred/util.hpp"

namespace hpcpred {

using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "hpcpred-model";
constexpr int kVersion = 1;

json vec_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& j) {
  if (j.empty()) return {};
  const auto first = vec_from_json(j.at(0));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), first.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto r = vec_from_json(j.at(i));
    if (r.size() != first.size()) throw Error("model document: ragged matrix");
    m.row(static_cast<Eigen::Index>(i)) = r.transpose();
  }
  return m;
}

json tree_to_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes)
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.n_samples, n.impurity,
                     n.impurity_decrease});
  return {{"criterion", t.criterion == SplitCriterion::kGini ? "gini" : "mse"},
          {"n_features", t.n_features},
          {"nodes", nodes}};
}

DecisionTree tree_from_json(const json& j) {
  DecisionTree t;
  t.criterion = j.at("criterion").get<std::string>() == "gini" ? SplitCriterion::kGini : SplitCriterion::kMse;
  t.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& n : j.at("nodes")) {
    TreeNode node;
    node.feature = n.at(0).get<int>();
    node.threshold = n.at(1).get<double>();
    node.left = n.at(2).get<int>();
    node.right = n.at(3).get<int>();
    node.value = n.at(4).get<double>();
    node.n_samples = n.at(5).get<std::size_t>();
    node.impurity = n.at(6).get<double>();
    node.impurity_decrease = n.at(7).get<double>();
    t.nodes.push_back(node);
  }
  const auto count = static_cast<int>(t.nodes.size());
  for (const auto& n : t.nodes)
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count ||
                         n.feature >= static_cast<int>(t.n_features)))
      throw Error("model document: tree node out of range");
  if (t.nodes.empty()) throw Error("model document: empty tree");
  return t;
}

json params_to_json(const ModelParams& p) {
  return std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return {{"kind", "linear"},
                  {"intercept", m.intercept},
                  {"coef", vec_to_json(m.coef)},
                  {"columns", m.columns},
                  {"algorithm", m.algorithm},
                  {"hyperparameters", m.hyperparameters},
                  {"metadata", m.metadata},
                  {"fit_time_s", m.fit_time_s}};
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          json j = tree_to_json(m);
          j["kind"] = "tree";
          return j;
        } else if constexpr (std::is_same_v<T, LogisticModel>) {
          return {{"kind", "logistic"},
                  {"intercept", m.intercept},
                  {"weights", vec_to_json(m.weights)},
                  {"l2_strength", m.l2_strength},
                  {"iterations", m.iterations},
                  {"gradient_norm", m.gradient_norm}};
        } else if constexpr (std::is_same_v<T, GaussianNBModel>) {
          return {{"kind", "gaussian_nb"},
                  {"priors", {m.priors(0), m.priors(1)}},
                  {"means", mat_to_json(m.means)},
                  {"variances", mat_to_json(m.variances)},
                  {"variance_floor", m.variance_floor}};
        } else {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_to_json(t));
          return {{"kind", "forest"},
                  {"trees", trees},
                  {"tree_seeds", m.tree_seeds},
                  {"max_features", m.max_features},
                  {"bootstrap", m.bootstrap}};
        }
      },
      p);
}

ModelParams params_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    LinearModel m;
    m.intercept = j.at("intercept").get<double>();
    m.coef = vec_from_json(j.at("coef"));
    m.columns = j.at("columns").get<std::vector<std::string>>();
    m.algorithm = j.at("algorithm").get<std::string>();
    m.hyperparameters = j.at("hyperparameters").get<std::map<std::string, double>>();
    m.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    m.fit_time_s = j.at("fit_time_s").get<double>();
    return m;
  }
  if (kind == "tree") return tree_from_json(j);
  if (kind == "logistic") {
    LogisticModel m;
    m.intercept = j.at("intercept").get<double>();
    m.weights = vec_from_json(j.at("weights"));
    m.l2_strength = j.at("l2_strength").get<double>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.gradient_norm = j.at("gradient_norm").get<double>();
    return m;
  }
  if (kind == "gaussian_nb") {
    GaussianNBModel m;
    m.priors << j.at("priors").at(0).get<double>(), j.at("priors").at(1).get<double>();
    m.means = mat_from_json(j.at("means"));
    m.variances = mat_from_json(j.at("variances"));
    m.variance_floor = j.at("variance_floor").get<double>();
    return m;
  }
  if (kind == "forest") {
    ForestModel m;
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    m.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
    m.max_features = j.at("max_features").get<std::size_t>();
    m.bootstrap = j.at("bootstrap").get<bool>();
    if (m.trees.empty()) throw Error("model document: forest without trees");
    return m;
  }
  throw Error("model document: unknown parameter kind '" + kind + "'");
}

json hp_to_json(const Hyperparameters& hp) {
  return {{"ridge_alpha", hp.ridge_alpha},
          {"encv_l1_ratio", hp.encv_l1_ratio},
          {"encv_folds", hp.encv_folds},
          {"lars_criterion", hp.lars_criterion == InformationCriterion::kAic ? "aic" : "bic"},
          {"lr_l2", hp.lr_l2},
          {"max_depth", hp.max_depth ? json(*hp.max_depth) : json(nullptr)},
          {"rf_n_trees", hp.rf_n_trees},
          {"seed", hp.seed}};
}

Hyperparameters hp_from_json(const json& j) {
  Hyperparameters hp;
  hp.ridge_alpha = j.at("ridge_alpha").get<double>();
  hp.encv_l1_ratio = j.at("encv_l1_ratio").get<double>();
  hp.encv_folds = j.at("encv_folds").get<std::size_t>();
  hp.lars_criterion = j.at("lars_criterion").get<std::string>() == "bic" ? InformationCriterion::kBic
                                                                        : InformationCriterion::kAic;
  hp.lr_l2 = j.at("lr_l2").get<double>();
  if (!j.at("max_depth").is_null()) hp.max_depth = j.at("max_depth").get<int>();
  hp.rf_n_trees = j.at("rf_n_trees").get<std::size_t>();
  hp.seed = j.at("seed").get<std::uint64_t>();
  return hp;
}

json agg_to_json(const UserAggregate& a) {
  return {{"user", a.user}, {"a_cpu", a.a_cpu},         {"a_maxmem", a.a_maxmem},
          {"a_reqtime", a.a_reqtime}, {"a_reqmem", a.a_reqmem}, {"job_count", a.job_count}};
}

UserAggregate agg_from_json(const json& j) {
  UserAggregate a;
  a.user = j.at("user").get<std::string>();
  a.a_cpu = j.at("a_cpu").get<double>();
  a.a_maxmem = j.at("a_maxmem").get<double>();
  a.a_reqtime = j.at("a_reqtime").get<double>();
  a.a_reqmem = j.at("a_reqmem").get<double>();
  a.job_count = j.at("job_count").get<std::size_t>();
  return a;
}

}  // namespace

std::string model_to_json(const PersistedModel& pm) {
  const TrainedModel& m = pm.model;
  json scaler = nullptr;
  if (m.pre.scaler) {
    std::vector<bool> flags = m.pre.scaler->standardized;
    scaler = {{"mean", m.pre.scaler->mean}, {"scale", m.pre.scaler->scale}, {"standardized", flags}};
  }
  json aggregates = json::array();
  for (const auto& [user, a] : pm.context.aggregates) aggregates.push_back(agg_to_json(a));
  json roles = json::object();
  for (const auto& [user, r] : pm.context.user_roles) roles[user] = std::string(role_name(r));
  json role_means = json::object();
  for (std::size_t r = 0; r < kRoleCount; ++r)
    if (pm.context.role_means[r]) role_means[std::string(role_name(kAllRoles[r]))] = agg_to_json(*pm.context.role_means[r]);

  json doc = {
      {"format", kFormat},
      {"version", kVersion},
      {"algorithm", m.name},
      {"task", std::string(task_name(m.task))},
      {"with_user_features", m.with_user_features},
      {"columns", m.columns},
      {"numeric", std::vector<bool>(m.numeric)},
      {"hyperparameters", hp_to_json(m.hp)},
      {"preprocessor",
       {{"kind", std::string(transform_name(m.pre.kind))},
        {"scaler", scaler},
        {"kept", m.pre.kept},
        {"dropped", m.pre.dropped},
        {"target", m.pre.target_scaled ? json{{"mean", m.pre.target_mean}, {"scale", m.pre.target_scale}}
                                       : json(nullptr)}}},
      {"params", params_to_json(m.params)},
      {"fit_time_s", m.fit_time_s},
      {"metadata", m.metadata},
      {"context",
       {{"users", pm.context.encoding.users},
        {"projects", pm.context.encoding.projects},
        {"aggregates", aggregates},
        {"user_roles", roles},
        {"role_means", role_means},
        {"global_mean", agg_to_json(pm.context.global_mean)}}},
  };
  return doc.dump(1) + "\n";
}

PersistedModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model document is not valid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", "") != kFormat) throw Error("not an hpcpred model document");
    if (doc.at("version").get<int>() != kVersion)
      throw Error("unsupported model document version " + doc.at("version").dump());

    PersistedModel pm;
    TrainedModel& m = pm.model;
    m.name = doc.at("algorithm").get<std::string>();
    m.task = parse_task(doc.at("task").get<std::string>());
    if (!is_known_model(m.task, m.name)) throw Error("model document: unknown algorithm '" + m.name + "'");
    m.with_user_features = doc.at("with_user_features").get<bool>();
    m.columns = doc.at("columns").get<std::vector<std::string>>();
    m.numeric = doc.at("numeric").get<std::vector<bool>>();
    m.hp = hp_from_json(doc.at("hyperparameters"));
    const auto& pre = doc.at("preprocessor");
    m.pre.kind = parse_transform(pre.at("kind").get<std::string>());
    if (!pre.at("scaler").is_null()) {
      ColumnScaler s;
      s.mean = pre.at("scaler").at("mean").get<std::vector<double>>();
      s.scale = pre.at("scaler").at("scale").get<std::vector<double>>();
      s.standardized = pre.at("scaler").at("standardized").get<std::vector<bool>>();
      if (s.mean.size() != m.columns.size() || s.scale.size() != m.columns.size() ||
          s.standardized.size() != m.columns.size())
        throw Error("model document: scaler does not match the columns");
      m.pre.scaler = std::move(s);
    }
    m.pre.kept = pre.at("kept").get<std::vector<std::size_t>>();
    m.pre.dropped = pre.at("dropped").get<std::vector<std::string>>();
    if (!pre.at("target").is_null()) {
      m.pre.target_scaled = true;
      m.pre.target_mean = pre.at("target").at("mean").get<double>();
      m.pre.target_scale = pre.at("target").at("scale").get<double>();
    }
    for (auto k : m.pre.kept)
      if (k >= m.columns.size()) throw Error("model document: kept column out of range");
    m.params = params_from_json(doc.at("params"));
    m.fit_time_s = doc.at("fit_time_s").get<double>();
    m.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();

    const auto& ctx = doc.at("context");
    pm.context.encoding = FeatureEncoding::from_keys(ctx.at("users").get<std::vector<std::string>>(),
                                                     ctx.at("projects").get<std::vector<std::string>>());
    for (const auto& a : ctx.at("aggregates")) {
      auto agg = agg_from_json(a);
      pm.context.aggregates.emplace(agg.user, agg);
    }
    for (const auto& [user, r] : ctx.at("user_roles").items())
      pm.context.user_roles.emplace(user, parse_role(r.get<std::string>()));
    for (std::size_t r = 0; r < kRoleCount; ++r) {
      const std::string key(role_name(kAllRoles[r]));
      if (ctx.at("role_means").contains(key)) pm.context.role_means[r] = agg_from_json(ctx.at("role_means").at(key));
    }
    pm.context.global_mean = agg_from_json(ctx.at("global_mean"));
    return pm;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const PersistedModel& m, const std::string& path) { write_file(path, model_to_json(m)); }

PersistedModel load_model(const std::string& path) {
  if (!std::filesystem::exists(path)) throw MissingModel("model file not found: " + path);
  return model_from_json(read_file(path));
}

}  // namespace hpcpred
