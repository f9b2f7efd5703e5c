#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpcpred/error.hpp"
#include "hpcpred/features.hpp"
#include "hpcpred/ingest.hpp"
#include "hpcpred/model.hpp"

namespace hpcpred {

struct SplitConfig {
  double train_fraction = 0.8;
  bool stratified = true;  // classification task only
  std::uint64_t seed = 42;
};

struct ExperimentConfig {
  SplitConfig split;
  std::vector<Task> tasks = {kAllTasks.begin(), kAllTasks.end()};
  // Models per task, in report order; a missing task uses task_models().
  std::map<Task, std::vector<std::string>> models;
  Hyperparameters hp;
  // Off: every fit time is recorded as 0, so reports are byte-stable.
  bool measure_time = true;

  void validate() const;
  const std::vector<std::string>& models_for(Task task) const;
  // Canonical text of every setting that affects results.
  std::string canonical() const;
  std::string digest() const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded holdout with n_test = ceil((1 - train_fraction) * n). Indices are
// returned sorted.
Split holdout_split(std::size_t n, double train_fraction, std::uint64_t seed);
// Same, applied within each label value.
Split stratified_split(const Eigen::VectorXd& labels, double train_fraction, std::uint64_t seed);

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& idx);
Eigen::VectorXd take_rows(const Eigen::VectorXd& y, const std::vector<std::size_t>& idx);

struct ReportRow {
  Task task = Task::kCpuRegression;
  std::string model;
  bool per_user_features = false;
  double r2 = 0;        // regression only
  double accuracy = 0;  // classification only
  double f1 = 0;        // classification only
  double fit_time_s = 0;

  bool operator==(const ReportRow&) const = default;
};

struct EvalReport {
  std::vector<Task> tasks;
  std::vector<ReportRow> rows;
  std::size_t n_jobs = 0;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::string config_digest;
  std::string data_digest;
  std::size_t rf_n_trees = 0;
  bool aggregates_leak = true;  // per-user means use test rows too
  bool timed = true;

  std::vector<const ReportRow*> rows_for(Task task) const;
};

class ExperimentError : public Error {
 public:
  ExperimentError(Task task, std::string model, const std::string& what)
      : Error(std::string(task_name(task)) + " / " + model + ": " + what),
        task_(task),
        model_(std::move(model)) {}
  Task task() const { return task_; }
  const std::string& model() const { return model_; }

 private:
  Task task_;
  std::string model_;
};

// Full ablation grid. Aggregates are computed on every job before the split.
EvalReport run_experiment(std::span<const JobRecord> jobs, const ExperimentConfig& cfg);

}  // namespace hpcpred
