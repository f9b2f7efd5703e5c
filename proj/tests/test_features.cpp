#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "hpcpred/error.hpp"
#include "hpcpred/features.hpp"

using namespace hpcpred;

namespace {

JobRecord job(const std::string& owner, double cpu, double mem = 100, double rt = 60, double rm = 200,
              Role role = Role::kGraduate, const std::string& project = "p") {
  JobRecord j;
  j.owner = owner;
  j.role = role;
  j.cpu_s = cpu;
  j.maxvmem_bytes = mem;
  j.req_time_s = rt;
  j.req_mem_bytes = rm;
  j.project = project;
  return j;
}

std::vector<JobRecord> random_jobs(std::uint64_t seed, std::size_t n, int users) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> ln(5, 1);
  std::vector<JobRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int u = static_cast<int>(rng() % static_cast<std::uint64_t>(users));
    auto j = job("u" + std::to_string(u), ln(rng), ln(rng) * 1000, ln(rng), ln(rng) * 2000,
                 kAllRoles[static_cast<std::size_t>(u) % kRoleCount], "proj" + std::to_string(rng() % 3));
    j.failed = static_cast<int>(rng() % 2);
    j.job_number = static_cast<std::int64_t>(i + 1);
    out.push_back(j);
  }
  return out;
}

bool has_column(const Dataset& ds, const std::string& name) {
  return std::find(ds.columns.begin(), ds.columns.end(), name) != ds.columns.end();
}

}  // namespace

TEST(Features, TwoPointMean) {
  std::vector<JobRecord> jobs = {job("u", 2), job("u", 4)};
  const auto aggs = compute_user_aggregates(jobs);
  EXPECT_EQ(aggs.at("u").a_cpu, 3);
  EXPECT_EQ(aggs.at("u").job_count, 2u);
}

TEST(Features, SingleJobAggregatesAreIdentity) {
  std::vector<JobRecord> jobs = {job("u", 7, 8, 9, 10)};
  const auto a = compute_user_aggregates(jobs).at("u");
  EXPECT_EQ(a.a_cpu, 7);
  EXPECT_EQ(a.a_maxmem, 8);
  EXPECT_EQ(a.a_reqtime, 9);
  EXPECT_EQ(a.a_reqmem, 10);
}

TEST(Features, AggregatesMatchDirectSum) {
  auto jobs = random_jobs(11, 1000, 1);
  const auto a = compute_user_aggregates(jobs).at("u0");
  long double s[4] = {0, 0, 0, 0};
  for (const auto& j : jobs) {
    s[0] += j.cpu_s;
    s[1] += j.maxvmem_bytes;
    s[2] += j.req_time_s;
    s[3] += j.req_mem_bytes;
  }
  const double got[4] = {a.a_cpu, a.a_maxmem, a.a_reqtime, a.a_reqmem};
  for (int k = 0; k < 4; ++k) {
    const double want = static_cast<double>(s[k] / 1000);
    EXPECT_NEAR(got[k], want, 1e-9 * std::abs(want));
  }
}

TEST(Features, JoinReplicates) {
  std::vector<JobRecord> jobs;
  for (int i = 0; i < 5; ++i) jobs.push_back(job("u", i));
  const auto rows = join_aggregates(jobs, compute_user_aggregates(jobs));
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& r : rows) EXPECT_EQ(r.agg, rows.front().agg);
}

TEST(Features, JoinTwoUsers) {
  std::vector<JobRecord> jobs = {job("a", 1), job("b", 5), job("a", 3)};
  const auto rows = join_aggregates(jobs, compute_user_aggregates(jobs));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].agg, rows[2].agg);
  EXPECT_NE(rows[0].agg, rows[1].agg);
}

TEST(Features, JoinUnknownUserThrows) {
  std::vector<JobRecord> jobs = {job("a", 1)};
  std::vector<JobRecord> other = {job("b", 1)};
  EXPECT_THROW(join_aggregates(other, compute_user_aggregates(jobs)), UnknownUser);
}

TEST(Features, JoinOrderInsensitive) {
  auto jobs = random_jobs(5, 200, 4);
  const auto aggs = compute_user_aggregates(jobs);
  auto shuffled = jobs;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
  // Summation order may move a mean by a rounding step; nothing more.
  const auto aggs2 = compute_user_aggregates(shuffled);
  ASSERT_EQ(aggs2.size(), aggs.size());
  for (const auto& [user, a] : aggs) {
    const auto& b = aggs2.at(user);
    EXPECT_EQ(a.job_count, b.job_count);
    EXPECT_NEAR(a.a_cpu, b.a_cpu, 1e-12 * a.a_cpu);
    EXPECT_NEAR(a.a_reqmem, b.a_reqmem, 1e-12 * a.a_reqmem);
  }
  auto a = join_aggregates(jobs, aggs);
  auto b = join_aggregates(shuffled, aggs);
  auto key = [](const JoinedRow& r) { return r.job.job_number; };
  std::sort(a.begin(), a.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
  std::sort(b.begin(), b.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].job, b[i].job);
    EXPECT_EQ(a[i].agg, b[i].agg);
  }
}

TEST(Features, ColumnSelection) {
  const auto jobs = random_jobs(3, 100, 5);
  const auto rows = join_aggregates(jobs, compute_user_aggregates(jobs));
  const auto cpu_off = build_dataset(rows, Task::kCpuRegression, false, false);
  for (auto c : {"aCPU", "aMaxmem", "aReqtime", "aReqmem"}) EXPECT_FALSE(has_column(cpu_off, c));
  EXPECT_EQ(cpu_off.target, "cpu");
  const auto cpu_on = build_dataset(rows, Task::kCpuRegression, true, false);
  EXPECT_TRUE(has_column(cpu_on, "aCPU"));
  EXPECT_TRUE(has_column(cpu_on, "aReqtime"));
  EXPECT_FALSE(has_column(cpu_on, "aMaxmem"));
  const auto mem_on = build_dataset(rows, Task::kMemRegression, true, false);
  EXPECT_TRUE(has_column(mem_on, "aMaxmem"));
  EXPECT_TRUE(has_column(mem_on, "aReqmem"));
  EXPECT_FALSE(has_column(mem_on, "aCPU"));
  EXPECT_EQ(mem_on.target, "maxvmem");
  const auto cls_on = build_dataset(rows, Task::kFailureClassification, true, false);
  for (auto c : {"aCPU", "aMaxmem", "aReqtime", "aReqmem"}) EXPECT_TRUE(has_column(cls_on, c));
  EXPECT_EQ(cls_on.target, "failed");
  EXPECT_EQ(cls_on.columns.size(), 15u);
}

TEST(Features, StandardizedColumnsHaveUnitVariance) {
  const auto jobs = random_jobs(4, 300, 6);
  const auto rows = join_aggregates(jobs, compute_user_aggregates(jobs));
  const auto ds = build_dataset(rows, Task::kFailureClassification, true, true);
  ASSERT_TRUE(ds.scaler.has_value());
  for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
    const auto col = ds.X.col(j);
    if (!ds.numeric[static_cast<std::size_t>(j)]) {
      EXPECT_TRUE(((col.array() == 0) || (col.array() == 1)).all());
      continue;
    }
    const double mu = col.mean();
    const double var = (col.array() - mu).square().mean();
    EXPECT_NEAR(mu, 0, 1e-9);
    EXPECT_NEAR(var, 1, 1e-9);
  }
}

TEST(Features, SavedScalerReproducesMatrix) {
  const auto jobs = random_jobs(8, 150, 5);
  const auto rows = join_aggregates(jobs, compute_user_aggregates(jobs));
  const auto raw = build_dataset(rows, Task::kMemRegression, true, false);
  const auto std_ds = build_dataset(rows, Task::kMemRegression, true, true);
  ASSERT_EQ(raw.columns, std_ds.columns);
  EXPECT_TRUE(std_ds.scaler->transform(raw.X) == std_ds.X);
}

TEST(Features, DegenerateColumnDropped) {
  std::vector<JobRecord> jobs;
  for (int i = 0; i < 10; ++i) jobs.push_back(job("u" + std::to_string(i % 2), i, 5, 60, 100 + i));
  const auto ds = build_dataset(jobs, Task::kCpuRegression, true);
  EXPECT_FALSE(has_column(ds, "reqTime"));
  EXPECT_FALSE(has_column(ds, "project"));
  EXPECT_NE(std::find(ds.dropped_columns.begin(), ds.dropped_columns.end(), "reqTime"),
            ds.dropped_columns.end());
}

TEST(Features, EncodingFirstAppearance) {
  std::vector<JobRecord> jobs = {job("z", 1, 1, 1, 1, Role::kStaff, "q"), job("a", 1, 1, 1, 1, Role::kStaff, "p"),
                                 job("z", 1, 1, 1, 1, Role::kStaff, "q")};
  const auto enc = FeatureEncoding::fit(jobs);
  EXPECT_EQ(enc.user_code("z"), 0);
  EXPECT_EQ(enc.user_code("a"), 1);
  EXPECT_EQ(enc.user_code("new"), 2);
  EXPECT_EQ(enc.project_code("q"), 0);
  EXPECT_EQ(enc.project_code("p"), 1);
}

TEST(Features, FeatureTableExport) {
  const auto jobs = random_jobs(2, 10, 2);
  const auto rows = join_aggregates(jobs, compute_user_aggregates(jobs));
  const auto text = export_feature_table(rows, FeatureEncoding::fit(jobs));
  const auto header = text.substr(0, text.find('\n'));
  EXPECT_EQ(std::count(header.begin(), header.end(), ',') + 1, 18);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
  for (auto f : {"p_Faculty", "p_Unknowing", "aReqmem", "reqMem"}) EXPECT_NE(header.find(f), std::string::npos);
}

// Properties over random workloads.
TEST(FeaturesProperty, AggregateBoundsAndOneHotPartition) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto jobs = random_jobs(seed, 400, 7);
    const auto aggs = compute_user_aggregates(jobs);
    for (const auto& [user, a] : aggs) {
      double lo = 1e300, hi = -1e300;
      for (const auto& j : jobs)
        if (j.owner == user) lo = std::min(lo, j.cpu_s), hi = std::max(hi, j.cpu_s);
      EXPECT_LE(lo, a.a_cpu);
      EXPECT_GE(hi, a.a_cpu);
    }
    const auto rows = join_aggregates(jobs, aggs);
    EXPECT_EQ(rows.size(), jobs.size());
    const auto ds = build_dataset(rows, Task::kFailureClassification, true, false);
    Eigen::VectorXd onehot_sum = Eigen::VectorXd::Zero(ds.X.rows());
    for (std::size_t j = 0; j < ds.columns.size(); ++j)
      if (ds.columns[j].rfind("p_", 0) == 0) onehot_sum += ds.X.col(static_cast<Eigen::Index>(j));
    EXPECT_TRUE((onehot_sum.array() == 1).all());
  }
}

TEST(FeaturesProperty, AblationNesting) {
  for (Task t : kAllTasks) {
    const auto off = task_features(t, false);
    const auto on = task_features(t, true);
    EXPECT_LT(off.size(), on.size());
    for (auto f : off) EXPECT_NE(std::find(on.begin(), on.end(), f), on.end());
    for (auto f : on)
      if (std::find(off.begin(), off.end(), f) == off.end()) EXPECT_TRUE(is_aggregate_feature(f));
  }
}
