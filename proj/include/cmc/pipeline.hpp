#pragma once

#include <string>

#include "cmc/config.hpp"

namespace cmc {

// Exit codes of a run.
inline constexpr int kExitPass = 0;
inline constexpr int kExitVerifyFail = 2;
inline constexpr int kExitSolverFailure = 3;
inline constexpr int kExitInvalid = 4;

struct RunResult {
  int exit_code = kExitPass;
  std::string status;
  std::string report;  // report.json contents
};

// Runs one command. Artifacts go to out_dir (created if missing); an empty
// out_dir writes nothing. Never throws for run-time failures: they become
// the exit code and the report's status field.
RunResult run(Command command, const RunConfig& cfg, const std::string& out_dir);

// Parses, then runs; configuration errors give exit 4 with the field path.
// The output directory is out_dir, else output.dir from the config, else
// "cmc_out".
RunResult run_document(const std::string& command, const std::string& config_text,
                       const std::vector<std::string>& overrides, const std::string& out_dir);

}  // namespace cmc
