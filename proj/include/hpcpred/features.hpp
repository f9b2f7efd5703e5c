#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hpcpred/ingest.hpp"

namespace hpcpred {

enum class Task { kCpuRegression, kMemRegression, kFailureClassification };
inline constexpr std::array<Task, 3> kAllTasks = {Task::kCpuRegression, Task::kMemRegression,
                                                  Task::kFailureClassification};
std::string_view task_name(Task t);
Task parse_task(std::string_view s);
inline bool is_classification(Task t) { return t == Task::kFailureClassification; }

// Per-user means over all of that user's jobs.
struct UserAggregate {
  std::string user;
  double a_cpu = 0;
  double a_maxmem = 0;
  double a_reqtime = 0;
  double a_reqmem = 0;
  std::size_t job_count = 0;

  bool operator==(const UserAggregate&) const = default;
};
using AggregateMap = std::map<std::string, UserAggregate, std::less<>>;

AggregateMap compute_user_aggregates(std::span<const JobRecord> jobs);

// One job carrying its owner's aggregates (replicated on every row of that user).
struct JoinedRow {
  JobRecord job;
  UserAggregate agg;
};
// Throws UnknownUser.
std::vector<JoinedRow> join_aggregates(std::span<const JobRecord> jobs, const AggregateMap& aggs);

// The Table 1 columns.
enum class Feature {
  kId, kReqMem, kReqTime, kProject,
  kACpu, kAMaxmem, kAReqtime, kAReqmem,
  kPFaculty, kPGraduate, kPPostDoc, kPResearchAss, kPStaff, kPUnderGra, kPUnknowing,
  kFailed, kCpu, kMaxvmem,
};
std::string_view feature_name(Feature f);
std::optional<Feature> parse_feature(std::string_view name);
// Numeric columns are standardizable; role one-hots and targets are not.
bool is_numeric_feature(Feature f);
bool is_aggregate_feature(Feature f);

// Input columns of a task, in matrix order: id, reqMem, reqTime, project,
// the task's aggregates (if enabled), then the seven role one-hots.
std::vector<Feature> task_features(Task task, bool with_user_features);
Feature task_target(Task task);

// Dense integer codes for users and projects in first-appearance order.
// Unseen keys map to the next unused code.
struct FeatureEncoding {
  std::vector<std::string> users;
  std::vector<std::string> projects;

  static FeatureEncoding fit(std::span<const JobRecord> jobs);
  static FeatureEncoding from_keys(std::vector<std::string> users, std::vector<std::string> projects);
  double user_code(std::string_view user) const;
  double project_code(std::string_view project) const;

 private:
  std::map<std::string, double, std::less<>> user_index_;
  std::map<std::string, double, std::less<>> project_index_;
};

double feature_value(Feature f, const JobRecord& job, const UserAggregate* agg,
                     const FeatureEncoding& enc);

// z-score parameters; columns with standardized[j] == false pass through.
struct ColumnScaler {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<bool> standardized;

  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
};

// Fits on the rows of X. Columns flagged numeric with zero variance are
// reported in `degenerate` and left unstandardized.
ColumnScaler fit_scaler(const Eigen::MatrixXd& X, const std::vector<bool>& numeric,
                        std::vector<std::size_t>* degenerate);

struct Dataset {
  std::vector<std::string> columns;
  std::vector<bool> numeric;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::string target;
  Task task = Task::kCpuRegression;
  bool with_user_features = false;
  std::optional<ColumnScaler> scaler;
  std::vector<std::string> dropped_columns;
  FeatureEncoding encoding;

  void drop_columns(const std::vector<std::size_t>& idx);
};

// Raw (unstandardized) matrix with the given encoding.
Dataset assemble_dataset(std::span<const JoinedRow> rows, Task task, bool with_user_features,
                         const FeatureEncoding& enc);

// Zero-variance numeric columns are dropped (recorded in dropped_columns)
// when standardizing.
Dataset build_dataset(std::span<const JoinedRow> rows, Task task, bool with_user_features,
                      bool standardize);
Dataset build_dataset(std::span<const JobRecord> jobs, Task task, bool standardize);

// Delimiter-separated export of one dataset; header is the column names
// followed by the target.
std::string export_dataset_csv(const Dataset& ds, char delim = ',');
// All 18 Table 1 columns for joined rows.
std::string export_feature_table(std::span<const JoinedRow> rows, const FeatureEncoding& enc,
                                 char delim = ',');

}  // namespace hpcpred
