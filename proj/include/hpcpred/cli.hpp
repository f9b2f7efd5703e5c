#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hpcpred {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Subcommands: synth, ingest, featurize, train, predict, evaluate, report.
// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hpcpred
