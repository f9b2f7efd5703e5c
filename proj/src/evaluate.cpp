#include "hpcpred/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hpcpred/metrics.hpp"
#include "hpcpred/util.hpp"

namespace hpcpred {

void ExperimentConfig::validate() const {
  if (!(split.train_fraction > 0 && split.train_fraction < 1))
    throw Error("train_fraction must lie strictly between 0 and 1");
  for (const auto& [task, names] : models) {
    if (names.empty()) throw Error(std::string("no models selected for ") + std::string(task_name(task)));
    for (const auto& n : names)
      if (!is_known_model(task, n))
        throw Error("unknown model '" + n + "' for task " + std::string(task_name(task)));
  }
  if (hp.rf_n_trees == 0) throw Error("n_trees must be >= 1");
  if (hp.encv_folds < 2) throw Error("folds must be >= 2");
  if (hp.max_depth && *hp.max_depth < 0) throw Error("max_depth must be >= 0");
}

const std::vector<std::string>& ExperimentConfig::models_for(Task task) const {
  auto it = models.find(task);
  return it == models.end() ? task_models(task) : it->second;
}

std::string ExperimentConfig::canonical() const {
  std::string s = "train_fraction=" + format_double(split.train_fraction) +
                  ";stratified=" + (split.stratified ? "1" : "0") +
                  ";seed=" + std::to_string(split.seed) + ";tasks=";
  for (auto t : tasks) {
    s += std::string(task_name(t)) + "[";
    for (const auto& m : models_for(t)) s += m + ",";
    s += "]";
  }
  s += ";ridge_alpha=" + format_double(hp.ridge_alpha) + ";l1_ratio=" + format_double(hp.encv_l1_ratio) +
       ";folds=" + std::to_string(hp.encv_folds) +
       ";criterion=" + (hp.lars_criterion == InformationCriterion::kAic ? "aic" : "bic") +
       ";lr_l2=" + format_double(hp.lr_l2) +
       ";max_depth=" + (hp.max_depth ? std::to_string(*hp.max_depth) : "none") +
       ";n_trees=" + std::to_string(hp.rf_n_trees) + ";model_seed=" + std::to_string(hp.seed) +
       ";timing=" + (measure_time ? "1" : "0");
  return s;
}

std::string ExperimentConfig::digest() const { return hex64(fnv1a64(canonical())); }

namespace {

std::size_t test_count(std::size_t n, double train_fraction) {
  const double raw = (1.0 - train_fraction) * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

}  // namespace

Split holdout_split(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0 && train_fraction < 1)) throw Error("train_fraction must lie in (0, 1)");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n_test = std::min(test_count(n, train_fraction), n);
  Split s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Split stratified_split(const Eigen::VectorXd& labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0 && train_fraction < 1)) throw Error("train_fraction must lie in (0, 1)");
  std::map<double, std::vector<std::size_t>> groups;
  for (Eigen::Index i = 0; i < labels.size(); ++i) groups[labels(i)].push_back(static_cast<std::size_t>(i));
  Split s;
  std::uint64_t stream = 0;
  for (auto& [label, idx] : groups) {
    std::mt19937_64 rng(derive_seed(seed, stream++));
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t n_test = std::min(test_count(idx.size(), train_fraction), idx.size());
    s.test.insert(s.test.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.insert(s.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& y, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(idx[i]));
  return out;
}

std::vector<const ReportRow*> EvalReport::rows_for(Task task) const {
  std::vector<const ReportRow*> out;
  for (const auto& r : rows)
    if (r.task == task) out.push_back(&r);
  return out;
}

EvalReport run_experiment(std::span<const JobRecord> jobs, const ExperimentConfig& cfg) {
  cfg.validate();
  if (jobs.empty()) throw EmptyResult("no jobs to evaluate");

  const auto aggs = compute_user_aggregates(jobs);
  const auto joined = join_aggregates(jobs, aggs);
  const auto enc = FeatureEncoding::fit(jobs);

  EvalReport report;
  report.tasks = cfg.tasks;
  report.n_jobs = jobs.size();
  report.seed = cfg.split.seed;
  report.train_fraction = cfg.split.train_fraction;
  report.config_digest = cfg.digest();
  report.data_digest = hex64(fnv1a64(write_jobs_csv(jobs)));
  report.rf_n_trees = cfg.hp.rf_n_trees;
  report.timed = cfg.measure_time;

  // One split for both regression tasks; classification gets its own,
  // stratified on the label.
  const Split regression_split =
      holdout_split(jobs.size(), cfg.split.train_fraction, derive_seed(cfg.split.seed, 0));
  std::optional<Split> classification_split;

  for (Task task : cfg.tasks) {
    const Split* split = &regression_split;
    if (is_classification(task)) {
      if (!classification_split) {
        Eigen::VectorXd labels(static_cast<Eigen::Index>(jobs.size()));
        for (std::size_t i = 0; i < jobs.size(); ++i) labels(static_cast<Eigen::Index>(i)) = jobs[i].failed;
        const auto seed = derive_seed(cfg.split.seed, 1);
        classification_split = cfg.split.stratified
                                    ? stratified_split(labels, cfg.split.train_fraction, seed)
                                    : holdout_split(jobs.size(), cfg.split.train_fraction, seed);
      }
      split = &*classification_split;
    }
    if (split->train.empty() || split->test.empty())
      throw Error(std::string(task_name(task)) + ": split leaves an empty train or test set");

    const Dataset with = assemble_dataset(joined, task, true, enc);
    const Dataset without = assemble_dataset(joined, task, false, enc);

    for (const auto& name : cfg.models_for(task)) {
      for (const Dataset* ds : {&with, &without}) {
        ReportRow row;
        row.task = task;
        row.model = name;
        row.per_user_features = ds->with_user_features;
        try {
          const Eigen::MatrixXd Xtr = take_rows(ds->X, split->train);
          const Eigen::VectorXd ytr = take_rows(ds->y, split->train);
          const Eigen::MatrixXd Xte = take_rows(ds->X, split->test);
          const Eigen::VectorXd yte = take_rows(ds->y, split->test);
          const TrainedModel m = train_model(task, name, ds->columns, ds->numeric, Xtr, ytr, cfg.hp,
                                             ds->with_user_features, cfg.measure_time);
          const Eigen::VectorXd pred = m.predict(Xte);
          if (is_classification(task)) {
            row.accuracy = accuracy(yte, pred);
            row.f1 = f1_score(yte, pred);
          } else {
            row.r2 = r_squared(yte, pred);
          }
          row.fit_time_s = m.fit_time_s;
        } catch (const ExperimentError&) {
          throw;
        } catch (const Error& e) {
          throw ExperimentError(task, name, e.what());
        }
        report.rows.push_back(row);
      }
    }
  }
  return report;
}

}  // namespace hpcpred
