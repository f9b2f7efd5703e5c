#include "hpcpred/persist.hpp"

#include "hpcpred/error.hpp"

namespace hpcpred {

namespace {

UserAggregate mean_of(const std::vector<const UserAggregate*>& aggs, std::string name) {
  UserAggregate m;
  m.user = std::move(name);
  if (aggs.empty()) return m;
  for (const auto* a : aggs) {
    m.a_cpu += a->a_cpu;
    m.a_maxmem += a->a_maxmem;
    m.a_reqtime += a->a_reqtime;
    m.a_reqmem += a->a_reqmem;
    m.job_count += a->job_count;
  }
  const double k = static_cast<double>(aggs.size());
  m.a_cpu /= k;
  m.a_maxmem /= k;
  m.a_reqtime /= k;
  m.a_reqmem /= k;
  return m;
}

}  // namespace

ScoringContext build_scoring_context(std::span<const JobRecord> jobs) {
  ScoringContext ctx;
  ctx.encoding = FeatureEncoding::fit(jobs);
  ctx.aggregates = compute_user_aggregates(jobs);
  for (const auto& j : jobs) ctx.user_roles.emplace(j.owner, j.role);

  std::array<std::vector<const UserAggregate*>, kRoleCount> by_role;
  std::vector<const UserAggregate*> all;
  for (const auto& [user, agg] : ctx.aggregates) {
    by_role[static_cast<std::size_t>(ctx.user_roles.at(user))].push_back(&agg);
    all.push_back(&agg);
  }
  for (std::size_t r = 0; r < kRoleCount; ++r)
    if (!by_role[r].empty()) ctx.role_means[r] = mean_of(by_role[r], "role:" + std::string(role_name(kAllRoles[r])));
  ctx.global_mean = mean_of(all, "global");
  return ctx;
}

PersistedModel train_persisted_model(std::span<const JobRecord> jobs, Task task, std::string_view name,
                                     bool with_user_features, const Hyperparameters& hp) {
  if (jobs.empty()) throw EmptyResult("no jobs to train on");
  PersistedModel pm;
  pm.context = build_scoring_context(jobs);
  const auto rows = join_aggregates(jobs, pm.context.aggregates);
  const Dataset ds = assemble_dataset(rows, task, with_user_features, pm.context.encoding);
  pm.model = train_model(task, name, ds.columns, ds.numeric, ds.X, ds.y, hp, with_user_features);
  return pm;
}

JobScore score_job(const PersistedModel& m, const JobRecord& job) {
  JobScore score;
  const UserAggregate* agg = nullptr;
  if (auto it = m.context.aggregates.find(job.owner); it != m.context.aggregates.end()) {
    agg = &it->second;
  } else {
    score.cold_start = true;
    const auto& role_mean = m.context.role_means[static_cast<std::size_t>(job.role)];
    agg = role_mean ? &*role_mean : &m.context.global_mean;
    score.fallback = agg->user;
  }

  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(m.model.columns.size()));
  for (std::size_t j = 0; j < m.model.columns.size(); ++j) {
    const auto f = parse_feature(m.model.columns[j]);
    if (!f) throw SchemaMismatch("model column '" + m.model.columns[j] + "' is not a known feature");
    row(0, static_cast<Eigen::Index>(j)) = feature_value(*f, job, agg, m.context.encoding);
  }
  score.value = m.model.predict(row)(0);
  if (is_classification(m.model.task)) score.probability = m.model.predict_proba(row)(0);
  return score;
}

}  // namespace hpcpred
