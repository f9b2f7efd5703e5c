#pragma once

#include <optional>
#include <string>

#include "hpcpred/persist.hpp"

namespace hpcpred {

// Attributes known when a job is submitted.
struct Submission {
  std::string owner;
  std::optional<Role> role;  // used for unseen users; stored role wins otherwise
  std::string project;
  double req_time_s = 0;
  double req_mem_bytes = 0;
};

struct Advisory {
  double est_cpu_s = 0;
  double est_mem_bytes = 0;
  double failure_probability = 0;
  // Requested memory below the memory estimate, or requested time below
  // the CPU estimate.
  bool under_request = false;
  bool cold_start = false;
  std::string fallback;
};

// cpu.json, mem.json and failure.json in one directory.
struct ModelStore {
  PersistedModel cpu;
  PersistedModel mem;
  PersistedModel failure;

  // Throws MissingModel naming the absent file.
  static ModelStore load(const std::string& dir);
  void save(const std::string& dir) const;
};

// Default store: LinearRegression for both usage targets, LR for failure,
// all with per-user features.
ModelStore train_default_store(std::span<const JobRecord> jobs, const Hyperparameters& hp);

JobRecord submission_job(const PersistedModel& m, const Submission& s);
Advisory predict_for_submission(const ModelStore& store, const Submission& s);

// One line: key=value pairs, "cold-start" marked when a fallback was used.
std::string format_advisory(const Submission& s, const Advisory& a);

}  // namespace hpcpred
