// Command-line front end: regenerates the discrimination and key-rate tables
// as CSV, and runs the Monte Carlo emulator.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cohdisc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr const char* kToolVersion = "0.1.0";
/// Default output directory when no --out / --out-dir is given.
inline constexpr const char* kOutputDirEnv = "COHDISC_OUTPUT_DIR";

/// Parses `start:stop:step` (inclusive within half a step), a comma list, or a single value.
std::vector<double> parse_grid(const std::string& text);
std::vector<unsigned> parse_count_list(const std::string& text);

/// Runs one invocation. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cohdisc::cli
