#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hpcpred {

// Number of colon-delimited fields in one accounting record.
inline constexpr std::size_t kAccountingFieldCount = 45;

// One accounting line with the semantically used positions decoded. Every
// other position is kept verbatim in `extra`, in file order.
struct RawAccountingRecord {
  std::string qname;
  std::string owner;
  std::int64_t job_number = 0;
  std::int64_t submission_time = 0;
  std::int64_t start_time = 0;
  std::int64_t end_time = 0;
  std::int64_t failed_code = 0;
  std::int64_t exit_status = 0;
  double wallclock_s = 0;
  double cpu_s = 0;
  double maxvmem_bytes = 0;
  std::string category;
  std::string project;
  std::vector<std::string> extra;

  bool operator==(const RawAccountingRecord&) const = default;
};

enum class Role { kFaculty, kGraduate, kPostDoc, kResearchAss, kStaff, kUnderGra, kUnknowing };
inline constexpr std::size_t kRoleCount = 7;
inline constexpr std::array<Role, kRoleCount> kAllRoles = {
    Role::kFaculty, Role::kGraduate, Role::kPostDoc, Role::kResearchAss,
    Role::kStaff,   Role::kUnderGra, Role::kUnknowing};

std::string_view role_name(Role r);
// Case-insensitive; anything unrecognised maps to kUnknowing.
Role parse_role(std::string_view s);

struct JobRecord {
  std::string owner;
  Role role = Role::kUnknowing;
  int failed = 0;
  double cpu_s = 0;
  double maxvmem_bytes = 0;
  double req_time_s = 0;
  double req_mem_bytes = 0;
  std::string project;
  int project_id = 0;
  std::int64_t submission_time = 0;
  std::int64_t job_number = 0;

  bool operator==(const JobRecord&) const = default;
};

// How the binary `failed` label is derived from an accounting record.
enum class LabelRule {
  kAnyNonzero,    // failed_code != 0 or exit_status != 0
  kResourceKill,  // exit_status 137 (SIGKILL, h_vmem) or 152 (SIGXCPU, h_rt)
};

struct IngestConfig {
  std::int64_t window_start = std::numeric_limits<std::int64_t>::min();
  std::int64_t window_end = std::numeric_limits<std::int64_t>::max();
  std::size_t min_jobs_per_user = 200;
  std::optional<std::size_t> sample_size;  // nullopt: keep all
  std::uint64_t rng_seed = 42;
  LabelRule label_rule = LabelRule::kAnyNonzero;

  void validate() const;
};

struct ResourceRequest {
  double req_time_s = 0;
  double req_mem_bytes = 0;
};

// Returns nullopt for comment ('#') and blank lines. Throws ParseError.
std::optional<RawAccountingRecord> parse_accounting_line(std::string_view line,
                                                         std::size_t line_number = 0);
std::string serialize_accounting_line(const RawAccountingRecord& r);

struct ParsedLog {
  std::vector<RawAccountingRecord> records;
  // Line numbers of records that failed to parse (only with skip_errors).
  std::vector<std::size_t> skipped_lines;
};
ParsedLog parse_accounting(std::string_view text, bool skip_errors = false);

// Extracts h_rt and h_vmem from a category string. Throws MissingRequest.
ResourceRequest parse_resource_request(std::string_view category);
// "4G" -> 4 * 2^30. Bare numbers are bytes. Returns nullopt when malformed.
std::optional<double> parse_size(std::string_view text);
// "3600" or "01:00:00".
std::optional<double> parse_duration(std::string_view text);

using RoleMap = std::map<std::string, Role, std::less<>>;
RoleMap parse_roles(std::string_view text);
std::string serialize_roles(const RoleMap& roles);

int derive_failed(const RawAccountingRecord& r, LabelRule rule);

struct CleanStats {
  std::size_t input = 0;
  std::size_t outside_window = 0;
  std::size_t never_started = 0;
  std::size_t missing_request = 0;
  std::size_t invalid_usage = 0;
  std::size_t below_user_threshold = 0;
  std::size_t output = 0;
};

// Cleaning, per-user threshold, then seeded uniform sampling without
// replacement. Output keeps input order. Throws EmptyResult.
std::vector<JobRecord> clean_filter_sample(std::span<const RawAccountingRecord> records,
                                           const RoleMap& roles, const IngestConfig& cfg,
                                           CleanStats* stats = nullptr);

// Converts one record without any filtering; used for scoring new jobs.
// Throws MissingRequest.
JobRecord to_job_record(const RawAccountingRecord& r, const RoleMap& roles,
                        LabelRule rule = LabelRule::kAnyNonzero);

// Cleaned job table used between CLI stages.
std::string write_jobs_csv(std::span<const JobRecord> jobs);
std::vector<JobRecord> read_jobs_csv(std::string_view text);

}  // namespace hpcpred
