#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "neardgd/config.hpp"
#include "neardgd/dynamics.hpp"

namespace neardgd {

// Distributed least squares on eight agents over the radius-3 circulant ring,
// data rescaled to unit aggregate spectral norm, five consensus schedules,
// three cost weightings.
ExperimentConfig preset_regression();

// Scalar piecewise-quartic costs on the same graph, five schedules, one cost
// weighting; the aggregate minimum value is zero by construction.
ExperimentConfig preset_piecewise();

struct CaseResult {
  std::size_t index = 0;  // 1-based position in the config's case list
  Schedule schedule;
  RunResult run;
  bool bounds_attached = false;  // closed-form bound columns were filled
  double fitted_rate = 0.0;      // geometric decay of the A-column, reported only
  std::vector<std::string> files;
};

struct ExperimentResult {
  std::vector<CaseResult> cases;
  bool monitors_ok = true;
  std::string summary;  // the table written to <out>/summary.txt
};

// Run every (case, cost) combination of the config: one trajectory per case,
// shared across its cost files, cases executed concurrently. Writes one CSV
// per combination plus summary.txt under cfg.out. case_filter selects a
// single 1-based case when positive. Progress and warnings go to `log`.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream& log,
                                int case_filter = 0);

// Human-readable table of the instance constants and step-size caps for a
// config, including per-case admissibility.
std::string inspect_report(const ExperimentConfig& cfg);

// Seeded self-check battery over every numerical inequality the library
// relies on; prints one PASS/FAIL line per check. Returns true when all pass.
bool run_verify(std::uint64_t seed, std::ostream& os);

}  // namespace neardgd
