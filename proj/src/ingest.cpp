#include "hpcpred/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "hpcpred/error.hpp"
#include "hpcpred/util.hpp"

namespace hpcpred {

namespace {

// 0-based positions of the decoded fields.
constexpr std::size_t kQname = 0;
constexpr std::size_t kOwner = 3;
constexpr std::size_t kJobNumber = 5;
constexpr std::size_t kSubmission = 8;
constexpr std::size_t kStart = 9;
constexpr std::size_t kEnd = 10;
constexpr std::size_t kFailed = 11;
constexpr std::size_t kExit = 12;
constexpr std::size_t kWallclock = 13;
constexpr std::size_t kProject = 31;
constexpr std::size_t kCpu = 36;
constexpr std::size_t kCategory = 39;
constexpr std::size_t kMaxvmem = 42;

constexpr std::array<std::size_t, 13> kPinned = {kQname,   kOwner,     kJobNumber, kSubmission, kStart,
                                                 kEnd,     kFailed,    kExit,      kWallclock,  kProject,
                                                 kCpu,     kCategory,  kMaxvmem};

constexpr std::size_t kExtraCount = kAccountingFieldCount - kPinned.size();

bool is_pinned(std::size_t i) {
  return std::find(kPinned.begin(), kPinned.end(), i) != kPinned.end();
}

// Splits on unescaped ':' and removes the escapes ("\:" -> ":", "\\" -> "\").
std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields(1);
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '\\' && i + 1 < line.size()) {
      fields.back().push_back(line[++i]);
    } else if (c == ':') {
      fields.emplace_back();
    } else {
      fields.back().push_back(c);
    }
  }
  return fields;
}

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == ':' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::int64_t int_field(const std::vector<std::string>& f, std::size_t i, std::size_t line) {
  auto v = parse_int(f[i]);
  if (!v)
    throw ParseError(ParseError::Kind::kNumericParse, line, i + 1,
                     "line " + std::to_string(line) + ": field " + std::to_string(i + 1) +
                         " is not an integer: '" + f[i] + "'");
  return *v;
}

double real_field(const std::vector<std::string>& f, std::size_t i, std::size_t line) {
  auto v = parse_double(f[i]);
  if (!v)
    throw ParseError(ParseError::Kind::kNumericParse, line, i + 1,
                     "line " + std::to_string(line) + ": field " + std::to_string(i + 1) +
                         " is not numeric: '" + f[i] + "'");
  return *v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Role lookup_role(const RoleMap& roles, const std::string& owner) {
  auto it = roles.find(owner);
  return it == roles.end() ? Role::kUnknowing : it->second;
}

}  // namespace

std::string_view role_name(Role r) {
  switch (r) {
    case Role::kFaculty: return "Faculty";
    case Role::kGraduate: return "Graduate";
    case Role::kPostDoc: return "PostDoc";
    case Role::kResearchAss: return "ResearchAss";
    case Role::kStaff: return "Staff";
    case Role::kUnderGra: return "UnderGra";
    case Role::kUnknowing: return "Unknowing";
  }
  return "Unknowing";
}

Role parse_role(std::string_view s) {
  auto key = lower(trim(s));
  for (Role r : kAllRoles)
    if (lower(role_name(r)) == key) return r;
  return Role::kUnknowing;
}

void IngestConfig::validate() const {
  if (window_start >= window_end) throw Error("ingest: window_start must be < window_end");
  if (min_jobs_per_user < 1) throw Error("ingest: min_jobs_per_user must be >= 1");
  if (sample_size && *sample_size == 0) throw Error("ingest: sample_size must be positive");
}

std::optional<RawAccountingRecord> parse_accounting_line(std::string_view line,
                                                         std::size_t line_number) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (trim(line).empty() || line.front() == '#') return std::nullopt;

  auto f = split_fields(line);
  if (f.size() != kAccountingFieldCount)
    throw ParseError(ParseError::Kind::kMalformedLine, line_number, f.size(),
                     "line " + std::to_string(line_number) + ": expected " +
                         std::to_string(kAccountingFieldCount) + " fields, found " +
                         std::to_string(f.size()));

  RawAccountingRecord r;
  r.qname = f[kQname];
  r.owner = f[kOwner];
  r.job_number = int_field(f, kJobNumber, line_number);
  r.submission_time = int_field(f, kSubmission, line_number);
  r.start_time = int_field(f, kStart, line_number);
  r.end_time = int_field(f, kEnd, line_number);
  r.failed_code = int_field(f, kFailed, line_number);
  r.exit_status = int_field(f, kExit, line_number);
  r.wallclock_s = real_field(f, kWallclock, line_number);
  r.project = f[kProject];
  r.cpu_s = real_field(f, kCpu, line_number);
  r.category = f[kCategory];
  r.maxvmem_bytes = real_field(f, kMaxvmem, line_number);
  r.extra.reserve(kExtraCount);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!is_pinned(i)) r.extra.push_back(std::move(f[i]));
  return r;
}

std::string serialize_accounting_line(const RawAccountingRecord& r) {
  if (r.extra.size() != kExtraCount)
    throw Error("serialize: record needs " + std::to_string(kExtraCount) + " extra fields, has " +
                std::to_string(r.extra.size()));
  std::array<std::string, kAccountingFieldCount> f;
  f[kQname] = escape_field(r.qname);
  f[kOwner] = escape_field(r.owner);
  f[kJobNumber] = std::to_string(r.job_number);
  f[kSubmission] = std::to_string(r.submission_time);
  f[kStart] = std::to_string(r.start_time);
  f[kEnd] = std::to_string(r.end_time);
  f[kFailed] = std::to_string(r.failed_code);
  f[kExit] = std::to_string(r.exit_status);
  f[kWallclock] = format_double(r.wallclock_s);
  f[kProject] = escape_field(r.project);
  f[kCpu] = format_double(r.cpu_s);
  f[kCategory] = escape_field(r.category);
  f[kMaxvmem] = format_double(r.maxvmem_bytes);
  std::size_t e = 0;
  for (std::size_t i = 0; i < kAccountingFieldCount; ++i)
    if (!is_pinned(i)) f[i] = escape_field(r.extra[e++]);

  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) out.push_back(':');
    out += f[i];
  }
  return out;
}

ParsedLog parse_accounting(std::string_view text, bool skip_errors) {
  ParsedLog log;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    try {
      if (auto rec = parse_accounting_line(line, line_no)) log.records.push_back(std::move(*rec));
    } catch (const ParseError&) {
      if (!skip_errors) throw;
      log.skipped_lines.push_back(line_no);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return log;
}

std::optional<double> parse_size(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  double mult = 1;
  switch (std::toupper(static_cast<unsigned char>(text.back()))) {
    case 'K': mult = 1024.0; break;
    case 'M': mult = 1024.0 * 1024; break;
    case 'G': mult = 1024.0 * 1024 * 1024; break;
    case 'T': mult = 1024.0 * 1024 * 1024 * 1024; break;
    default: break;
  }
  if (mult != 1) text.remove_suffix(1);
  auto v = parse_double(text);
  if (!v || *v < 0) return std::nullopt;
  return *v * mult;
}

std::optional<double> parse_duration(std::string_view text) {
  text = trim(text);
  if (text.find(':') == std::string_view::npos) {
    auto v = parse_double(text);
    if (!v || *v < 0) return std::nullopt;
    return v;
  }
  auto parts = split(text, ':');
  if (parts.size() > 3) return std::nullopt;
  double total = 0;
  for (const auto& p : parts) {
    auto v = parse_double(p.empty() ? "0" : p);
    if (!v || *v < 0) return std::nullopt;
    total = total * 60 + *v;
  }
  return total;
}

ResourceRequest parse_resource_request(std::string_view category) {
  std::optional<double> rt, vmem;
  std::string token;
  auto flush = [&] {
    if (token.rfind("h_rt=", 0) == 0) {
      rt = parse_duration(std::string_view(token).substr(5));
      if (!rt) throw MissingRequest("malformed h_rt value: " + token);
    } else if (token.rfind("h_vmem=", 0) == 0) {
      vmem = parse_size(std::string_view(token).substr(7));
      if (!vmem) throw MissingRequest("malformed h_vmem value: " + token);
    }
    token.clear();
  };
  for (char c : category) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c)))
      flush();
    else
      token.push_back(c);
  }
  flush();
  if (!rt) throw MissingRequest("category has no h_rt request");
  if (!vmem) throw MissingRequest("category has no h_vmem request");
  return {*rt, *vmem};
}

RoleMap parse_roles(std::string_view text) {
  RoleMap roles;
  for (const auto& raw : split(text, '\n')) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string_view::npos) continue;
    auto user = std::string(trim(line.substr(0, comma)));
    if (user.empty()) continue;
    roles[user] = parse_role(line.substr(comma + 1));
  }
  return roles;
}

std::string serialize_roles(const RoleMap& roles) {
  std::string out;
  for (const auto& [user, role] : roles) {
    out += user;
    out += ',';
    out += role_name(role);
    out += '\n';
  }
  return out;
}

int derive_failed(const RawAccountingRecord& r, LabelRule rule) {
  switch (rule) {
    case LabelRule::kAnyNonzero: return (r.failed_code != 0 || r.exit_status != 0) ? 1 : 0;
    case LabelRule::kResourceKill: return (r.exit_status == 137 || r.exit_status == 152) ? 1 : 0;
  }
  return 0;
}

JobRecord to_job_record(const RawAccountingRecord& r, const RoleMap& roles, LabelRule rule) {
  auto req = parse_resource_request(r.category);
  JobRecord j;
  j.owner = r.owner;
  j.role = lookup_role(roles, r.owner);
  j.failed = derive_failed(r, rule);
  j.cpu_s = r.cpu_s;
  j.maxvmem_bytes = r.maxvmem_bytes;
  j.req_time_s = req.req_time_s;
  j.req_mem_bytes = req.req_mem_bytes;
  j.project = r.project;
  j.submission_time = r.submission_time;
  j.job_number = r.job_number;
  return j;
}

std::vector<JobRecord> clean_filter_sample(std::span<const RawAccountingRecord> records,
                                           const RoleMap& roles, const IngestConfig& cfg,
                                           CleanStats* stats) {
  cfg.validate();
  CleanStats st;
  st.input = records.size();

  std::vector<JobRecord> valid;
  valid.reserve(records.size());
  for (const auto& r : records) {
    if (r.submission_time < cfg.window_start || r.submission_time >= cfg.window_end) {
      ++st.outside_window;
      continue;
    }
    if (r.start_time == 0) {
      ++st.never_started;
      continue;
    }
    if (r.cpu_s < 0 || r.maxvmem_bytes < 0 || r.wallclock_s < 0 || r.end_time < r.start_time) {
      ++st.invalid_usage;
      continue;
    }
    JobRecord j;
    try {
      j = to_job_record(r, roles, cfg.label_rule);
    } catch (const MissingRequest&) {
      ++st.missing_request;
      continue;
    }
    if (j.req_time_s <= 0 || j.req_mem_bytes <= 0) {
      ++st.missing_request;
      continue;
    }
    valid.push_back(std::move(j));
  }

  std::unordered_map<std::string, std::size_t> per_user;
  for (const auto& j : valid) ++per_user[j.owner];
  std::vector<JobRecord> kept;
  kept.reserve(valid.size());
  for (auto& j : valid) {
    if (per_user[j.owner] >= cfg.min_jobs_per_user)
      kept.push_back(std::move(j));
    else
      ++st.below_user_threshold;
  }

  if (cfg.sample_size && *cfg.sample_size < kept.size()) {
    std::vector<std::size_t> idx(kept.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(cfg.rng_seed);
    const std::size_t k = *cfg.sample_size;
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::vector<JobRecord> sampled;
    sampled.reserve(k);
    for (auto i : idx) sampled.push_back(std::move(kept[i]));
    kept = std::move(sampled);
  }

  std::unordered_map<std::string, int> project_codes;
  for (auto& j : kept) {
    auto [it, inserted] = project_codes.try_emplace(j.project, static_cast<int>(project_codes.size()));
    j.project_id = it->second;
  }

  st.output = kept.size();
  if (stats) *stats = st;
  if (kept.empty()) throw EmptyResult("ingest: no records survived cleaning and filtering");
  return kept;
}

std::string write_jobs_csv(std::span<const JobRecord> jobs) {
  std::ostringstream out;
  out << "owner,role,failed,cpu_s,maxvmem_bytes,req_time_s,req_mem_bytes,project,project_id,"
         "submission_time,job_number\n";
  for (const auto& j : jobs) {
    if (j.owner.find(',') != std::string::npos || j.project.find(',') != std::string::npos)
      throw Error("jobs csv: owner/project may not contain ','");
    out << j.owner << ',' << role_name(j.role) << ',' << j.failed << ',' << format_double(j.cpu_s)
        << ',' << format_double(j.maxvmem_bytes) << ',' << format_double(j.req_time_s) << ','
        << format_double(j.req_mem_bytes) << ',' << j.project << ',' << j.project_id << ','
        << j.submission_time << ',' << j.job_number << '\n';
  }
  return out.str();
}

std::vector<JobRecord> read_jobs_csv(std::string_view text) {
  std::vector<JobRecord> jobs;
  auto lines = split(text, '\n');
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    auto line = trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    auto f = split(line, ',');
    if (f.size() != 11) throw Error("jobs csv: line " + std::to_string(ln + 1) + " has wrong field count");
    auto num = [&](std::size_t i) {
      auto v = parse_double(f[i]);
      if (!v) throw Error("jobs csv: line " + std::to_string(ln + 1) + " field " + std::to_string(i + 1));
      return *v;
    };
    auto integer = [&](std::size_t i) {
      auto v = parse_int(f[i]);
      if (!v) throw Error("jobs csv: line " + std::to_string(ln + 1) + " field " + std::to_string(i + 1));
      return *v;
    };
    JobRecord j;
    j.owner = f[0];
    j.role = parse_role(f[1]);
    j.failed = static_cast<int>(integer(2));
    j.cpu_s = num(3);
    j.maxvmem_bytes = num(4);
    j.req_time_s = num(5);
    j.req_mem_bytes = num(6);
    j.project = f[7];
    j.project_id = static_cast<int>(integer(8));
    j.submission_time = integer(9);
    j.job_number = integer(10);
    jobs.push_back(std::move(j));
  }
  return jobs;
}

}  // namespace hpcpred
