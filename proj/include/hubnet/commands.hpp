#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hubnet/experiment.hpp"

namespace hubnet {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitTolerance = 3,
  kExitNumeric = 4,
};

// One row per (time, non-bottleneck station).
struct SolveRow {
  double t;
  std::size_t station;
  double q_bar;
  double rho;
  RootResult root;
};
std::vector<SolveRow> solve_rows(const ExperimentConfig& cfg);

struct BoundsRow {
  double t;
  std::size_t station;
  double epsilon;
  double root;
  bool inside;  // lower - 1e-9 <= root <= upper + 1e-9
  BoundsReport report;
};
// epsilon_used receives the epsilon fed to every row.
std::vector<BoundsRow> bounds_rows(const ExperimentConfig& cfg, double* epsilon_used = nullptr);

struct ValidationCheck {
  std::string name;  // fluid, law_tv, compensator, hub_service, offspring
  double t;          // NaN when the check is not tied to a time
  int station;       // -1 for hub-level checks
  double observed;
  double reference;
  double deviation;
  double tolerance;
  bool enforced;
  bool passed;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  SimEstimate estimate;
  bool passed() const;
};
ValidationReport run_validation(const ExperimentConfig& cfg);

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"solve",    "bounds",   "fluid",
                                              "simulate", "validate", "metrics"};
  return names;
}

// Runs one subcommand and writes its files under cfg.output.dir.
// Diagnostics go to `log`; returns an ExitCode.
int run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& log);

// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

}  // namespace hubnet
