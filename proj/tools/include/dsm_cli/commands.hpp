#pragma once

#include <filesystem>
#include <ostream>
#include <string>

#include "dsm_cli/config.hpp"
#include "dsm_cli/output.hpp"

namespace dsm::cli {

enum ExitCode : int {
  kOk = 0,
  kRuntimeFailure = 1,
  kConfigError = 2,
  kReproductionMismatch = 3,
};

struct RunContext {
  ExperimentConfig cfg;
  std::filesystem::path out_dir;
  int threads = 1;
  std::ostream* log = nullptr;

  Metadata metadata(const std::string& command) const;
};

// Each writes into ctx.out_dir and returns an exit code. Module errors
// propagate as dsm::Error; invalid settings raise ConfigError.
int run_analyze(const RunContext& ctx);
int run_expand(const RunContext& ctx);
int run_simulate(const RunContext& ctx);
int run_continue(const RunContext& ctx);
int run_reproduce_paper(const RunContext& ctx);

/// Parses argv, dispatches, maps failures to exit codes.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dsm::cli
