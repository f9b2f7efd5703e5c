#pragma once

#include <string>
#include <string_view>

#include "hpcpred/evaluate.hpp"

namespace hpcpred {

enum class ReportFormat { kText, kCsv };
ReportFormat parse_report_format(std::string_view s);

// Text: one table per task, two-space separated, e.g.
//   LinearRegression  True  15.86  0.448
// R squared and accuracy as percents with 2 decimals, F1 as a whole percent,
// time with 3 decimals. Csv: one row per grid cell at full precision.
// Both start with '#' comment lines carrying the dataset fingerprint and the
// config digest.
std::string render_report(const EvalReport& report, ReportFormat format);

// Inverse of the csv rendering.
EvalReport parse_report_csv(std::string_view text);

// Data rows of a rendered text report (no comments, headers or titles).
std::size_t count_text_rows(std::string_view text);

}  // namespace hpcpred
