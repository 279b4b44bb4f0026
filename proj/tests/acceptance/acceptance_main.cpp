// Runs the 13 acceptance criteria on the reference setup and prints one
// PASS/FAIL line each. Usage: dsm_acceptance [threads] [n]
#include <cstdlib>
#include <iostream>
#include <string>

#include "dsm_cli/config.hpp"
#include "dsm_cli/reproduce.hpp"

int main(int argc, char** argv) {
  using namespace dsm::cli;
  const int threads = argc > 1 ? std::atoi(argv[1]) : 0;
  auto cfg = default_config();
  if (argc > 2) cfg.reproduce_n = std::atoi(argv[2]);

  const auto report = run_reproduction(cfg, threads);
  for (const auto& row : report.rows) {
    std::cout << (row.status == RowStatus::Pass ? "PASS" : "FAIL") << " criterion " << row.id
              << ": " << row.title << " | computed " << row.computed << " | expected "
              << row.expected << " | tol " << row.tolerance << "\n";
  }
  const int failed = report.failures();
  std::cout << (13 - failed) << "/13 criteria pass\n";
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
