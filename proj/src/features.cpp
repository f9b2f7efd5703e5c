#include "hpcpred/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "hpcpred/error.hpp"
#include "hpcpred/util.hpp"

namespace hpcpred {

namespace {

struct FeatureInfo {
  Feature feature;
  std::string_view name;
};

constexpr std::array<FeatureInfo, 18> kFeatureTable = {{
    {Feature::kFailed, "failed"},
    {Feature::kCpu, "cpu"},
    {Feature::kMaxvmem, "maxvmem"},
    {Feature::kId, "id"},
    {Feature::kReqMem, "reqMem"},
    {Feature::kReqTime, "reqTime"},
    {Feature::kProject, "project"},
    {Feature::kACpu, "aCPU"},
    {Feature::kAMaxmem, "aMaxmem"},
    {Feature::kAReqtime, "aReqtime"},
    {Feature::kAReqmem, "aReqmem"},
    {Feature::kPFaculty, "p_Faculty"},
    {Feature::kPGraduate, "p_Graduate"},
    {Feature::kPPostDoc, "p_PostDoc"},
    {Feature::kPResearchAss, "p_ResearchAss"},
    {Feature::kPStaff, "p_Staff"},
    {Feature::kPUnderGra, "p_UnderGra"},
    {Feature::kPUnknowing, "p_Unknowing"},
}};

constexpr std::array<Feature, kRoleCount> kRoleFeatures = {
    Feature::kPFaculty, Feature::kPGraduate,  Feature::kPPostDoc,  Feature::kPResearchAss,
    Feature::kPStaff,   Feature::kPUnderGra,  Feature::kPUnknowing};

double lookup_code(const std::map<std::string, double, std::less<>>& index, std::string_view key) {
  auto it = index.find(key);
  return it == index.end() ? static_cast<double>(index.size()) : it->second;
}

}  // namespace

std::string_view task_name(Task t) {
  switch (t) {
    case Task::kCpuRegression: return "cpu_regression";
    case Task::kMemRegression: return "mem_regression";
    case Task::kFailureClassification: return "failure_classification";
  }
  return "";
}

Task parse_task(std::string_view s) {
  for (Task t : kAllTasks)
    if (task_name(t) == s) return t;
  throw Error("unknown task: " + std::string(s));
}

AggregateMap compute_user_aggregates(std::span<const JobRecord> jobs) {
  struct Acc {
    double sum[4] = {0, 0, 0, 0};
    double lo[4] = {INFINITY, INFINITY, INFINITY, INFINITY};
    double hi[4] = {-INFINITY, -INFINITY, -INFINITY, -INFINITY};
    std::size_t n = 0;
  };
  std::map<std::string, Acc, std::less<>> acc;
  for (const auto& j : jobs) {
    auto& a = acc[j.owner];
    const double v[4] = {j.cpu_s, j.maxvmem_bytes, j.req_time_s, j.req_mem_bytes};
    for (int k = 0; k < 4; ++k) {
      a.sum[k] += v[k];
      a.lo[k] = std::min(a.lo[k], v[k]);
      a.hi[k] = std::max(a.hi[k], v[k]);
    }
    ++a.n;
  }
  AggregateMap out;
  for (const auto& [user, a] : acc) {
    double m[4];
    // Rounding in the running sum can push the mean a hair outside [min, max].
    for (int k = 0; k < 4; ++k)
      m[k] = std::clamp(a.sum[k] / static_cast<double>(a.n), a.lo[k], a.hi[k]);
    out.emplace(user, UserAggregate{user, m[0], m[1], m[2], m[3], a.n});
  }
  return out;
}

std::vector<JoinedRow> join_aggregates(std::span<const JobRecord> jobs, const AggregateMap& aggs) {
  std::vector<JoinedRow> rows;
  rows.reserve(jobs.size());
  for (const auto& j : jobs) {
    auto it = aggs.find(j.owner);
    if (it == aggs.end()) throw UnknownUser(j.owner);
    rows.push_back({j, it->second});
  }
  return rows;
}

std::string_view feature_name(Feature f) {
  for (const auto& info : kFeatureTable)
    if (info.feature == f) return info.name;
  return "";
}

std::optional<Feature> parse_feature(std::string_view name) {
  for (const auto& info : kFeatureTable)
    if (info.name == name) return info.feature;
  return std::nullopt;
}

bool is_numeric_feature(Feature f) {
  switch (f) {
    case Feature::kId:
    case Feature::kReqMem:
    case Feature::kReqTime:
    case Feature::kProject:
    case Feature::kACpu:
    case Feature::kAMaxmem:
    case Feature::kAReqtime:
    case Feature::kAReqmem: return true;
    default: return false;
  }
}

bool is_aggregate_feature(Feature f) {
  return f == Feature::kACpu || f == Feature::kAMaxmem || f == Feature::kAReqtime ||
         f == Feature::kAReqmem;
}

std::vector<Feature> task_features(Task task, bool with_user_features) {
  std::vector<Feature> cols = {Feature::kId, Feature::kReqMem, Feature::kReqTime, Feature::kProject};
  if (with_user_features) {
    switch (task) {
      case Task::kCpuRegression:
        cols.insert(cols.end(), {Feature::kACpu, Feature::kAReqtime});
        break;
      case Task::kMemRegression:
        cols.insert(cols.end(), {Feature::kAMaxmem, Feature::kAReqmem});
        break;
      case Task::kFailureClassification:
        cols.insert(cols.end(),
                    {Feature::kACpu, Feature::kAMaxmem, Feature::kAReqtime, Feature::kAReqmem});
        break;
    }
  }
  cols.insert(cols.end(), kRoleFeatures.begin(), kRoleFeatures.end());
  return cols;
}

Feature task_target(Task task) {
  switch (task) {
    case Task::kCpuRegression: return Feature::kCpu;
    case Task::kMemRegression: return Feature::kMaxvmem;
    case Task::kFailureClassification: return Feature::kFailed;
  }
  return Feature::kCpu;
}

FeatureEncoding FeatureEncoding::fit(std::span<const JobRecord> jobs) {
  std::vector<std::string> users, projects;
  std::unordered_set<std::string_view> seen_users, seen_projects;
  for (const auto& j : jobs) {
    if (seen_users.insert(j.owner).second) users.push_back(j.owner);
    if (seen_projects.insert(j.project).second) projects.push_back(j.project);
  }
  return from_keys(std::move(users), std::move(projects));
}

FeatureEncoding FeatureEncoding::from_keys(std::vector<std::string> users,
                                           std::vector<std::string> projects) {
  FeatureEncoding enc;
  enc.users = std::move(users);
  enc.projects = std::move(projects);
  for (std::size_t i = 0; i < enc.users.size(); ++i)
    enc.user_index_.emplace(enc.users[i], static_cast<double>(i));
  for (std::size_t i = 0; i < enc.projects.size(); ++i)
    enc.project_index_.emplace(enc.projects[i], static_cast<double>(i));
  return enc;
}

double FeatureEncoding::user_code(std::string_view user) const {
  return lookup_code(user_index_, user);
}

double FeatureEncoding::project_code(std::string_view project) const {
  return lookup_code(project_index_, project);
}

double feature_value(Feature f, const JobRecord& job, const UserAggregate* agg,
                     const FeatureEncoding& enc) {
  auto need_agg = [&]() -> const UserAggregate& {
    if (!agg) throw UnknownUser(job.owner);
    return *agg;
  };
  switch (f) {
    case Feature::kId: return enc.user_code(job.owner);
    case Feature::kReqMem: return job.req_mem_bytes;
    case Feature::kReqTime: return job.req_time_s;
    case Feature::kProject: return enc.project_code(job.project);
    case Feature::kACpu: return need_agg().a_cpu;
    case Feature::kAMaxmem: return need_agg().a_maxmem;
    case Feature::kAReqtime: return need_agg().a_reqtime;
    case Feature::kAReqmem: return need_agg().a_reqmem;
    case Feature::kFailed: return job.failed;
    case Feature::kCpu: return job.cpu_s;
    case Feature::kMaxvmem: return job.maxvmem_bytes;
    default: break;
  }
  for (std::size_t r = 0; r < kRoleCount; ++r)
    if (kRoleFeatures[r] == f) return job.role == kAllRoles[r] ? 1.0 : 0.0;
  return 0.0;
}

Eigen::MatrixXd ColumnScaler::transform(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != mean.size())
    throw SchemaMismatch("scaler expects " + std::to_string(mean.size()) + " columns, got " +
                         std::to_string(X.cols()));
  Eigen::MatrixXd out = X;
  for (Eigen::Index j = 0; j < X.cols(); ++j)
    if (standardized[j]) out.col(j) = (X.col(j).array() - mean[j]) / scale[j];
  return out;
}

ColumnScaler fit_scaler(const Eigen::MatrixXd& X, const std::vector<bool>& numeric,
                        std::vector<std::size_t>* degenerate) {
  const auto p = static_cast<std::size_t>(X.cols());
  ColumnScaler s;
  s.mean.assign(p, 0.0);
  s.scale.assign(p, 1.0);
  s.standardized.assign(p, false);
  const double n = static_cast<double>(X.rows());
  for (std::size_t j = 0; j < p; ++j) {
    if (!numeric[j] || X.rows() == 0) continue;
    const double mu = X.col(j).sum() / n;
    const double var = (X.col(j).array() - mu).square().sum() / n;
    const double sd = std::sqrt(var);
    if (!(sd > 0) || sd <= 1e-12 * std::max(1.0, std::abs(mu))) {
      if (degenerate) degenerate->push_back(j);
      continue;
    }
    s.mean[j] = mu;
    s.scale[j] = sd;
    s.standardized[j] = true;
  }
  return s;
}

void Dataset::drop_columns(const std::vector<std::size_t>& idx) {
  if (idx.empty()) return;
  std::vector<bool> drop(columns.size(), false);
  for (auto i : idx) drop[i] = true;
  std::vector<Eigen::Index> keep;
  std::vector<std::string> cols;
  std::vector<bool> num;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (drop[j]) {
      dropped_columns.push_back(columns[j]);
      continue;
    }
    keep.push_back(static_cast<Eigen::Index>(j));
    cols.push_back(columns[j]);
    num.push_back(numeric[j]);
  }
  Eigen::MatrixXd kept = X(Eigen::all, keep);
  X = std::move(kept);
  if (scaler) {
    ColumnScaler s;
    for (auto j : keep) {
      s.mean.push_back(scaler->mean[j]);
      s.scale.push_back(scaler->scale[j]);
      s.standardized.push_back(scaler->standardized[j]);
    }
    scaler = std::move(s);
  }
  columns = std::move(cols);
  numeric = std::move(num);
}

Dataset assemble_dataset(std::span<const JoinedRow> rows, Task task, bool with_user_features,
                         const FeatureEncoding& enc) {
  Dataset ds;
  ds.task = task;
  ds.with_user_features = with_user_features;
  ds.encoding = enc;
  const auto feats = task_features(task, with_user_features);
  for (auto f : feats) {
    ds.columns.emplace_back(feature_name(f));
    ds.numeric.push_back(is_numeric_feature(f));
  }
  const auto target = task_target(task);
  ds.target = std::string(feature_name(target));
  const auto n = static_cast<Eigen::Index>(rows.size());
  ds.X.resize(n, static_cast<Eigen::Index>(feats.size()));
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < feats.size(); ++j)
      ds.X(i, static_cast<Eigen::Index>(j)) = feature_value(feats[j], row.job, &row.agg, enc);
    ds.y(i) = feature_value(target, row.job, nullptr, enc);
  }
  return ds;
}

Dataset build_dataset(std::span<const JoinedRow> rows, Task task, bool with_user_features,
                      bool standardize) {
  std::vector<JobRecord> jobs;
  jobs.reserve(rows.size());
  for (const auto& r : rows) jobs.push_back(r.job);
  auto ds = assemble_dataset(rows, task, with_user_features, FeatureEncoding::fit(jobs));
  if (standardize) {
    std::vector<std::size_t> degenerate;
    ds.scaler = fit_scaler(ds.X, ds.numeric, &degenerate);
    ds.drop_columns(degenerate);
    ds.X = ds.scaler->transform(ds.X);
  }
  return ds;
}

Dataset build_dataset(std::span<const JobRecord> jobs, Task task, bool standardize) {
  std::vector<JoinedRow> rows;
  rows.reserve(jobs.size());
  for (const auto& j : jobs) rows.push_back({j, UserAggregate{}});
  return build_dataset(rows, task, false, standardize);
}

std::string export_dataset_csv(const Dataset& ds, char delim) {
  std::string out;
  for (const auto& c : ds.columns) {
    out += c;
    out += delim;
  }
  out += ds.target;
  out += '\n';
  for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
    for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
      out += format_double(ds.X(i, j));
      out += delim;
    }
    out += format_double(ds.y(i));
    out += '\n';
  }
  return out;
}

std::string export_feature_table(std::span<const JoinedRow> rows, const FeatureEncoding& enc,
                                 char delim) {
  std::string out;
  for (std::size_t k = 0; k < kFeatureTable.size(); ++k) {
    if (k) out += delim;
    out += kFeatureTable[k].name;
  }
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < kFeatureTable.size(); ++k) {
      if (k) out += delim;
      out += format_double(feature_value(kFeatureTable[k].feature, r.job, &r.agg, enc));
    }
    out += '\n';
  }
  return out;
}

}  // namespace hpcpred
