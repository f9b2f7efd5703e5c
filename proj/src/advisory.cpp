#include "hpcpred/advisory.hpp"

#include <filesystem>

#include "hpcpred/error.hpp"
#include "hpcpred/util.hpp"

namespace hpcpred {

namespace fs = std::filesystem;

ModelStore ModelStore::load(const std::string& dir) {
  ModelStore s;
  s.cpu = load_model((fs::path(dir) / "cpu.json").string());
  s.mem = load_model((fs::path(dir) / "mem.json").string());
  s.failure = load_model((fs::path(dir) / "failure.json").string());
  if (s.cpu.model.task != Task::kCpuRegression) throw SchemaMismatch("cpu.json is not a cpu_regression model");
  if (s.mem.model.task != Task::kMemRegression) throw SchemaMismatch("mem.json is not a mem_regression model");
  if (s.failure.model.task != Task::kFailureClassification)
    throw SchemaMismatch("failure.json is not a failure_classification model");
  return s;
}

void ModelStore::save(const std::string& dir) const {
  fs::create_directories(dir);
  save_model(cpu, (fs::path(dir) / "cpu.json").string());
  save_model(mem, (fs::path(dir) / "mem.json").string());
  save_model(failure, (fs::path(dir) / "failure.json").string());
}

ModelStore train_default_store(std::span<const JobRecord> jobs, const Hyperparameters& hp) {
  ModelStore s;
  s.cpu = train_persisted_model(jobs, Task::kCpuRegression, "LinearRegression", true, hp);
  s.mem = train_persisted_model(jobs, Task::kMemRegression, "LinearRegression", true, hp);
  s.failure = train_persisted_model(jobs, Task::kFailureClassification, "LR", true, hp);
  return s;
}

JobRecord submission_job(const PersistedModel& m, const Submission& s) {
  if (!(s.req_time_s > 0) || !(s.req_mem_bytes > 0))
    throw MissingRequest("submission needs positive requested time and memory");
  JobRecord job;
  job.owner = s.owner;
  job.project = s.project;
  job.req_time_s = s.req_time_s;
  job.req_mem_bytes = s.req_mem_bytes;
  if (auto it = m.context.user_roles.find(s.owner); it != m.context.user_roles.end())
    job.role = it->second;
  else
    job.role = s.role.value_or(Role::kUnknowing);
  return job;
}

Advisory predict_for_submission(const ModelStore& store, const Submission& s) {
  Advisory a;
  const auto cpu = score_job(store.cpu, submission_job(store.cpu, s));
  const auto mem = score_job(store.mem, submission_job(store.mem, s));
  const auto fail = score_job(store.failure, submission_job(store.failure, s));
  a.est_cpu_s = cpu.value;
  a.est_mem_bytes = mem.value;
  a.failure_probability = fail.probability;
  a.under_request = s.req_mem_bytes < a.est_mem_bytes || s.req_time_s < a.est_cpu_s;
  a.cold_start = cpu.cold_start || mem.cold_start || fail.cold_start;
  a.fallback = cpu.cold_start ? cpu.fallback : mem.cold_start ? mem.fallback : fail.fallback;
  return a;
}

std::string format_advisory(const Submission& s, const Advisory& a) {
  std::string out = "user=" + s.owner + " est_cpu_s=" + format_fixed(a.est_cpu_s, 1) +
                    " est_mem_bytes=" + format_fixed(a.est_mem_bytes, 0) +
                    " failure_probability=" + format_fixed(a.failure_probability, 4) +
                    " under_request=" + (a.under_request ? "yes" : "no");
  if (a.cold_start) out += " cold-start fallback=" + a.fallback;
  return out;
}

}  // namespace hpcpred
