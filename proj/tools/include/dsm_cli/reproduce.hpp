#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dsm_cli/config.hpp"
#include "dsm_cli/output.hpp"

namespace dsm::cli {

enum class RowStatus { Pass, Fail, NotApplicable };

std::string_view to_string(RowStatus s) noexcept;

struct CriterionRow {
  int id = 0;
  std::string title;
  std::string computed;
  std::string expected;
  std::string tolerance;
  RowStatus status = RowStatus::NotApplicable;
  double seconds = 0.0;
};

struct ReproduceReport {
  bool reference_setup = true;
  int n = 512;
  std::vector<CriterionRow> rows;

  int failures() const;
};

/// True for logistic steepness 8 centred at 1 with D = 1, l = 20.
bool is_reference_setup(const ExperimentConfig& cfg);

/// Runs the 13-row table. Rows whose expectations belong to the reference
/// setup are marked not applicable otherwise; property rows run on the
/// admissible mode of the configured model.
ReproduceReport run_reproduction(const ExperimentConfig& cfg, int threads);

/// Runs jobs on up to `threads` workers (0: hardware concurrency).
void run_parallel(std::vector<std::function<void()>>& jobs, int threads);

/// Wall-clock times only with `timings`, so saved reports stay reproducible.
void print_report(const ReproduceReport& report, std::ostream& out, bool timings = true);
void write_report(const ReproduceReport& report, const std::filesystem::path& dir,
                  const Metadata& meta);

}  // namespace dsm::cli
