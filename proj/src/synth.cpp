#include "hpcpred/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hpcpred/error.hpp"
#include "hpcpred/util.hpp"

namespace hpcpred {

void SynthConfig::validate() const {
  if (n_users == 0) throw Error("synth: n_users must be >= 1");
  if (jobs_per_user_min == 0 || jobs_per_user_min > jobs_per_user_max)
    throw Error("synth: need 1 <= jobs_per_user_min <= jobs_per_user_max");
  double total = 0;
  for (double w : role_weights) {
    if (!(w >= 0)) throw Error("synth: role weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("synth: role weights must sum to 1");
  for (double s : {base_runtime_log_sd, base_mem_log_sd, runtime_noise_sd, mem_noise_sd,
                   margin_sd_novice, margin_sd_expert})
    if (!(s > 0) || !std::isfinite(s)) throw Error("synth: noise scales must be positive");
  if (!(utilization_min > 0 && utilization_min <= utilization_max && utilization_max <= 1))
    throw Error("synth: need 0 < utilization_min <= utilization_max <= 1");
  if (!(margin_floor >= 0) || !(margin_gain >= 0)) throw Error("synth: margin parameters must be >= 0");
  if (fixed_margin && !(*fixed_margin > 0 && std::isfinite(*fixed_margin)))
    throw Error("synth: fixed_margin must be positive and finite");
  if (n_projects == 0) throw Error("synth: n_projects must be >= 1");
  if (!(hms_fraction >= 0 && hms_fraction <= 1)) throw Error("synth: hms_fraction must lie in [0, 1]");
  if (span_s <= 0) throw Error("synth: span_s must be positive");
}

namespace {

constexpr double kMiB = 1024.0 * 1024.0;

// Hand-rolled draws so output does not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n))); }
  double normal() {
    double u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

 private:
  std::mt19937_64 engine_;
};

std::string two_digits(std::int64_t v) { return (v < 10 ? "0" : "") + std::to_string(v); }

std::string format_hms(std::int64_t s) {
  return std::to_string(s / 3600) + ":" + two_digits(s / 60 % 60) + ":" + two_digits(s % 60);
}

std::string format_mem_request(double bytes) {
  const auto mib = static_cast<std::int64_t>(std::llround(bytes / kMiB));
  if (mib % 1024 == 0) return std::to_string(mib / 1024) + "G";
  return std::to_string(mib) + "M";
}

double round_ms(double v) { return std::round(v * 1000.0) / 1000.0; }

std::vector<std::string> extra_fields(const SynthUser& u, std::size_t job_index, double cpu,
                                      double maxvmem, double wallclock, std::size_t host) {
  std::vector<std::string> e;
  e.reserve(32);
  e.push_back("node" + two_digits(static_cast<std::int64_t>(host)));  // hostname
  e.push_back("users");                                                // group
  // job name; the H:MM:SS users also put colons here
  e.push_back(u.hms_requests ? "run:" + std::to_string(job_index % 7) : "job" + std::to_string(job_index));
  e.push_back("sge");  // account
  e.push_back("0");    // priority
  e.push_back(format_double(round_ms(cpu * 0.95)));  // ru_utime
  e.push_back(format_double(round_ms(cpu * 0.05)));  // ru_stime
  e.push_back(std::to_string(static_cast<std::int64_t>(maxvmem / 1024)));  // ru_maxrss
  for (int k = 0; k < 14; ++k) e.push_back("0");  // ru_ixrss .. ru_nivcsw
  e.push_back("defaultdepartment");
  e.push_back("NONE");  // granted_pe
  e.push_back("1");     // slots
  e.push_back("0");     // task_number
  e.push_back(format_double(round_ms(maxvmem / (kMiB * 1024.0) * wallclock)));  // mem, GB s
  e.push_back("0");     // io
  e.push_back("0");     // iow
  e.push_back("NONE");  // pe_taskid
  e.push_back("0");     // arid
  e.push_back("0");     // ar_submission_time
  return e;
}

}  // namespace

SynthWorkload generate_workload(const SynthConfig& cfg) {
  cfg.validate();
  SynthWorkload w;

  std::vector<double> role_cdf;
  double acc = 0;
  for (double p : cfg.role_weights) role_cdf.push_back(acc += p);

  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    Rng rng(derive_seed(cfg.seed, 2 * u));
    SynthUser user;
    user.name = "user" + std::string(u < 10 ? "00" : u < 100 ? "0" : "") + std::to_string(u);
    const double r = rng.uniform();
    std::size_t role = 0;
    while (role + 1 < kRoleCount && r >= role_cdf[role]) ++role;
    user.role = kAllRoles[role];
    user.listed_in_roles = user.role != Role::kUnknowing;
    user.expertise = rng.uniform();
    user.base_runtime_s = rng.lognormal(cfg.base_runtime_log_mean, cfg.base_runtime_log_sd);
    user.base_mem_bytes = rng.lognormal(cfg.base_mem_log_mean, cfg.base_mem_log_sd);
    user.utilization = rng.uniform(cfg.utilization_min, cfg.utilization_max);
    user.project = "proj" + two_digits(static_cast<std::int64_t>(rng.below(cfg.n_projects)));
    user.hms_requests = rng.uniform() < cfg.hms_fraction;
    w.users.push_back(user);
  }

  std::int64_t job_number = 1000000;
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    const SynthUser& user = w.users[u];
    Rng rng(derive_seed(cfg.seed, 2 * u + 1));
    const std::size_t n_jobs =
        cfg.jobs_per_user_min + rng.below(cfg.jobs_per_user_max - cfg.jobs_per_user_min + 1);

    const double margin_mean = 1.0 + cfg.margin_floor + cfg.margin_gain * user.expertise;
    const double margin_sd =
        cfg.margin_sd_novice + (cfg.margin_sd_expert - cfg.margin_sd_novice) * user.expertise;
    auto margin = [&] {
      return cfg.fixed_margin ? *cfg.fixed_margin : margin_mean * rng.lognormal(0.0, margin_sd);
    };

    std::vector<std::int64_t> submissions(n_jobs);
    for (auto& s : submissions) s = cfg.start_epoch + static_cast<std::int64_t>(rng.below(static_cast<std::size_t>(cfg.span_s)));
    std::sort(submissions.begin(), submissions.end());

    for (std::size_t j = 0; j < n_jobs; ++j) {
      SynthJob job;
      job.user_index = u;
      job.demand_runtime_s = user.base_runtime_s * rng.lognormal(0.0, cfg.runtime_noise_sd);
      job.demand_mem_bytes = user.base_mem_bytes * rng.lognormal(0.0, cfg.mem_noise_sd);
      job.req_time_s = std::max(60.0, std::ceil(user.base_runtime_s * margin() / 60.0) * 60.0);
      job.req_mem_bytes = std::max(1.0, std::ceil(user.base_mem_bytes * margin() / kMiB)) * kMiB;
      const double kill_point = rng.uniform(0.1, 1.0);
      const double queue_wait = std::ceil(-600.0 * std::log(1.0 - rng.uniform()));
      const std::size_t host = rng.below(64);

      const bool over_mem = job.demand_mem_bytes > job.req_mem_bytes;
      const bool over_time = job.demand_runtime_s > job.req_time_s;
      job.failed = over_mem || over_time ? 1 : 0;

      double wallclock = job.demand_runtime_s;
      double maxvmem = job.demand_mem_bytes;
      std::int64_t exit_status = 0;
      if (over_mem && job.demand_runtime_s * kill_point < job.req_time_s) {
        job.kill = KillReason::kMemory;
        wallclock = job.demand_runtime_s * kill_point;
        maxvmem = job.req_mem_bytes;
        exit_status = 137;
      } else if (over_time) {
        job.kill = KillReason::kTime;
        wallclock = job.req_time_s;
        maxvmem = std::min(job.demand_mem_bytes, job.req_mem_bytes);
        exit_status = 152;
      }
      wallclock = std::max(1.0, std::round(wallclock));
      maxvmem = std::round(maxvmem);

      RawAccountingRecord& rec = job.record;
      rec.qname = job.req_time_s > 86400 ? "long.q" : "batch.q";
      rec.owner = user.name;
      rec.job_number = job_number++;
      rec.submission_time = submissions[j];
      rec.start_time = rec.submission_time + static_cast<std::int64_t>(queue_wait);
      rec.end_time = rec.start_time + static_cast<std::int64_t>(wallclock);
      rec.failed_code = 0;
      rec.exit_status = exit_status;
      rec.wallclock_s = wallclock;
      rec.cpu_s = round_ms(wallclock * user.utilization);
      rec.maxvmem_bytes = maxvmem;
      const auto rt = static_cast<std::int64_t>(job.req_time_s);
      rec.category = "-U users -q " + rec.qname + " -l h_rt=" +
                     (user.hms_requests ? format_hms(rt) : std::to_string(rt)) +
                     ",h_vmem=" + format_mem_request(job.req_mem_bytes);
      rec.project = user.project;
      rec.extra = extra_fields(user, j, rec.cpu_s, maxvmem, wallclock, host);
      w.jobs.push_back(std::move(job));
    }
  }

  w.accounting = "# synthetic accounting log, seed " + std::to_string(cfg.seed) + "\n";
  for (const auto& job : w.jobs) w.accounting += serialize_accounting_line(job.record) + "\n";

  RoleMap roles;
  for (const auto& user : w.users)
    if (user.listed_in_roles) roles[user.name] = user.role;
  w.roles = serialize_roles(roles);
  return w;
}

}  // namespace hpcpred
