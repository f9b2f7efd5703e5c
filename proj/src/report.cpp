#include "hpcpred/report.hpp"

#include <charconv>
#include <cmath>

#include "hpcpred/util.hpp"

namespace hpcpred {

ReportFormat parse_report_format(std::string_view s) {
  if (s == "text") return ReportFormat::kText;
  if (s == "csv") return ReportFormat::kCsv;
  throw Error("unknown report format '" + std::string(s) + "' (expected text or csv)");
}

namespace {

constexpr std::string_view kTitle = "# hpcpred evaluation report";
constexpr std::string_view kCsvHeader = "task,model,per_user_features,r2,accuracy,f1,fit_time_s";

std::string_view task_title(Task t) {
  switch (t) {
    case Task::kCpuRegression: return "CPU usage prediction with regression";
    case Task::kMemRegression: return "Memory usage prediction with regression";
    case Task::kFailureClassification: return "Classification results";
  }
  return "";
}

std::string bool_text(bool b) { return b ? "True" : "False"; }

std::string header(const EvalReport& r) {
  std::string tasks;
  for (auto t : r.tasks) tasks += (tasks.empty() ? "" : ",") + std::string(task_name(t));
  std::string s(kTitle);
  s += "\n# jobs=" + std::to_string(r.n_jobs);
  s += "\n# seed=" + std::to_string(r.seed);
  s += "\n# train_fraction=" + format_double(r.train_fraction);
  s += "\n# tasks=" + tasks;
  s += "\n# n_trees=" + std::to_string(r.rf_n_trees);
  s += "\n# config_digest=" + r.config_digest;
  s += "\n# data_digest=" + r.data_digest;
  s += std::string("\n# timing=") + (r.timed ? "on" : "off");
  s += std::string("\n# aggregate_leakage=") + (r.aggregates_leak ? "true" : "false");
  s += "\n";
  return s;
}

std::string render_text(const EvalReport& r) {
  std::string s = header(r);
  for (Task t : r.tasks) {
    s += "\n[" + std::string(task_name(t)) + "] " + std::string(task_title(t)) + "\n";
    if (is_classification(t))
      s += "Model  Per-User Features  Accuracy (%)  F1 (%)  Time (second)\n";
    else
      s += "Model  Per-User Features  R squared (%)  Time (second)\n";
    for (const ReportRow* row : r.rows_for(t)) {
      s += row->model + "  " + bool_text(row->per_user_features) + "  ";
      if (is_classification(t))
        s += format_fixed(row->accuracy * 100, 2) + "  " + format_fixed(row->f1 * 100, 0);
      else
        s += format_fixed(row->r2 * 100, 2);
      s += "  " + format_fixed(row->fit_time_s, 3) + "\n";
    }
  }
  return s;
}

std::string render_csv(const EvalReport& r) {
  std::string s = header(r);
  s += std::string(kCsvHeader) + "\n";
  for (Task t : r.tasks) {
    for (const ReportRow* row : r.rows_for(t)) {
      s += std::string(task_name(t)) + "," + row->model + "," + bool_text(row->per_user_features) + ",";
      if (is_classification(t))
        s += "," + format_double(row->accuracy) + "," + format_double(row->f1);
      else
        s += format_double(row->r2) + ",,";
      s += "," + format_double(row->fit_time_s) + "\n";
    }
  }
  return s;
}

double need_double(std::string_view s, std::size_t line) {
  auto v = parse_double(s);
  if (!v) throw ParseError(ParseError::Kind::kNumericParse, line, 0, "report: bad number '" + std::string(s) + "'");
  return *v;
}

}  // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
  return format == ReportFormat::kText ? render_text(report) : render_csv(report);
}

EvalReport parse_report_csv(std::string_view text) {
  EvalReport r;
  r.tasks.clear();
  bool saw_header = false;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = body.substr(0, eq);
      const auto val = body.substr(eq + 1);
      if (key == "jobs") r.n_jobs = static_cast<std::size_t>(need_double(val, line_no));
      else if (key == "seed") {
        const auto* end = val.data() + val.size();
        if (std::from_chars(val.data(), end, r.seed).ptr != end)
          throw ParseError(ParseError::Kind::kNumericParse, line_no, 0, "report: bad seed");
      }
      else if (key == "train_fraction") r.train_fraction = need_double(val, line_no);
      else if (key == "n_trees") r.rf_n_trees = static_cast<std::size_t>(need_double(val, line_no));
      else if (key == "config_digest") r.config_digest = std::string(val);
      else if (key == "data_digest") r.data_digest = std::string(val);
      else if (key == "timing") r.timed = val == "on";
      else if (key == "aggregate_leakage") r.aggregates_leak = val == "true";
      else if (key == "tasks") {
        for (const auto& t : split(val, ','))
          if (!t.empty()) r.tasks.push_back(parse_task(t));
      }
      continue;
    }
    if (!saw_header) {
      if (line != kCsvHeader) throw ParseError(ParseError::Kind::kMalformedLine, line_no, 0, "report: missing csv header");
      saw_header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 7)
      throw ParseError(ParseError::Kind::kMalformedLine, line_no, f.size(), "report: expected 7 fields");
    ReportRow row;
    row.task = parse_task(f[0]);
    row.model = f[1];
    if (f[2] != "True" && f[2] != "False")
      throw ParseError(ParseError::Kind::kNumericParse, line_no, 3, "report: per_user_features must be True or False");
    row.per_user_features = f[2] == "True";
    if (is_classification(row.task)) {
      row.accuracy = need_double(f[4], line_no);
      row.f1 = need_double(f[5], line_no);
    } else {
      row.r2 = need_double(f[3], line_no);
    }
    row.fit_time_s = need_double(f[6], line_no);
    r.rows.push_back(row);
  }
  if (!saw_header) throw ParseError(ParseError::Kind::kMalformedLine, 0, 0, "report: missing csv header");
  return r;
}

std::size_t count_text_rows(std::string_view text) {
  std::size_t n = 0;
  for (const auto& raw : split(text, '\n')) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == '[' || line.starts_with("Model  ")) continue;
    ++n;
  }
  return n;
}

}  // namespace hpcpred
