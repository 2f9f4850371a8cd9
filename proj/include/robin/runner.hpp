#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "robin/config.hpp"

namespace robin {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNotConverged = 3;

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::filesystem::path dir;
  std::vector<Assertion> assertions;
};

/// Value of ROBIN_LAB_THREADS, or the hardware concurrency when unset.
/// Throws ConfigError when the variable is not a positive integer.
int thread_budget();

/// Executes the configured mode and writes results/<name>/: config.txt,
/// report.txt, summary.txt and the mode's CSV files. Progress goes to `log`.
RunOutcome run_experiment(const RunConfig& cfg, std::ostream& log, int threads);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Property checks of every module at desk-scale resolution. Random inputs
/// come only from `seed`; checks run on up to `threads` threads.
std::vector<CheckResult> check_suite(std::uint64_t seed, int threads);

/// Per-check verdict lines without timings; identical for identical seeds.
std::string check_summary(std::uint64_t seed, const std::vector<CheckResult>& results);

struct ReportVerification {
  bool ok = true;
  std::vector<std::string> lines;
};

/// Confirms that every artifact listed in <dir>/report.txt exists and parses.
ReportVerification verify_report(const std::filesystem::path& dir);

}  // namespace robin
