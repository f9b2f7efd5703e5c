#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hpcpred/ingest.hpp"

namespace hpcpred {

// Latent-expertise workload model. For user u with expertise e in [0, 1]:
//   job runtime  = base_runtime_u * LogNormal(0, runtime_noise_sd)
//   job memory   = base_mem_u     * LogNormal(0, mem_noise_sd)
//   each request = base_u * margin,
//   margin       = (1 + margin_floor + margin_gain * e) * LogNormal(0, s(e)),
//   s(e)         = margin_sd_novice + (margin_sd_expert - margin_sd_novice) * e.
// Novices ask for barely more than they need and vary a lot; experts pad
// consistently. A job whose demand exceeds a request is killed at the limit.
struct SynthConfig {
  std::size_t n_users = 50;
  std::size_t jobs_per_user_min = 400;
  std::size_t jobs_per_user_max = 400;
  // Faculty, Graduate, PostDoc, ResearchAss, Staff, UnderGra, Unknowing.
  std::array<double, kRoleCount> role_weights = {0.12, 0.34, 0.12, 0.10, 0.08, 0.14, 0.10};

  double base_runtime_log_mean = 8.5;  // ln seconds, about 80 minutes
  double base_runtime_log_sd = 1.0;
  double base_mem_log_mean = 21.5;  // ln bytes, about 2 GiB
  double base_mem_log_sd = 0.8;
  double utilization_min = 0.6;  // cpu seconds per wallclock second
  double utilization_max = 1.0;
  double runtime_noise_sd = 0.25;
  double mem_noise_sd = 0.2;

  double margin_floor = 0.3;
  double margin_gain = 1.0;
  double margin_sd_novice = 0.25;
  double margin_sd_expert = 0.05;
  // Overrides the margin model: every request is exactly base * fixed_margin.
  std::optional<double> fixed_margin;

  std::size_t n_projects = 12;
  double hms_fraction = 0.3;  // users who write h_rt as H:MM:SS
  std::int64_t start_epoch = 1420070400;
  std::int64_t span_s = 3 * 365 * 86400;
  std::uint64_t seed = 42;

  void validate() const;
};

struct SynthUser {
  std::string name;
  Role role = Role::kUnknowing;
  bool listed_in_roles = false;  // Unknowing users are absent from the roles file
  double expertise = 0;
  double base_runtime_s = 0;
  double base_mem_bytes = 0;
  double utilization = 1;
  std::string project;
  bool hms_requests = false;

  double base_cpu_s() const { return base_runtime_s * utilization; }
};

enum class KillReason { kNone, kMemory, kTime };

struct SynthJob {
  RawAccountingRecord record;  // exactly what the accounting file holds
  std::size_t user_index = 0;
  double demand_runtime_s = 0;
  double demand_mem_bytes = 0;
  double req_time_s = 0;
  double req_mem_bytes = 0;
  KillReason kill = KillReason::kNone;
  int failed = 0;  // demand exceeded a request
};

struct SynthWorkload {
  std::string accounting;
  std::string roles;
  std::vector<SynthUser> users;
  std::vector<SynthJob> jobs;  // file order: by user, then job index
};

SynthWorkload generate_workload(const SynthConfig& cfg);

}  // namespace hpcpred
