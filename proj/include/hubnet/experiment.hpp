#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hubnet/bounds.hpp"
#include "hubnet/closeness.hpp"
#include "hubnet/fluid.hpp"
#include "hubnet/roots.hpp"
#include "hubnet/simulator.hpp"

namespace hubnet {

// Insertion-ordered so emitted documents keep a stable, readable layout.
using json = nlohmann::ordered_json;

// {"family": "...", "params": {...}}. Parameter keys per family:
//   exponential: rate          erlang: k, rate
//   hyperexp2: weight, rate1, rate2
//   deterministic: value       gamma: shape, rate
json distribution_to_json(const Distribution& d);
// Throws ConfigError with `path` prefixed to the offending key.
Distribution distribution_from_json(const json& j, const std::string& path);

struct BoundsSettings {
  // nullopt: measure the memoryless deviation on the grid.
  std::optional<double> epsilon;
  MomentVariant variant = MomentVariant::Corrected;
  Theorem theorem = Theorem::T1;
};

struct SimSettings {
  long long replications = 20;
  std::uint64_t base_seed = 1;
  // Defaults to the last sample time (or the offspring window end if later).
  double horizon = 0.0;
  int workers = 1;
  std::optional<std::pair<double, double>> offspring_window;
  bool event_log = false;
};

struct ValidateSettings {
  double fluid_tolerance = 0.03;
  double tv_tolerance = 0.08;
  // TV distances are only enforced from this many replications on.
  long long law_min_replications = 100;
  double compensator_sigmas = 3.0;
  double offspring_sigmas = 3.0;
  // Service rates used by the analytic reference instead of network.mu.
  std::optional<std::vector<double>> reference_mu;
};

struct OutputSettings {
  std::string dir = "out";
  std::vector<std::string> formats{"csv", "json"};
  bool wants(const std::string& f) const;
};

struct ExperimentConfig {
  NetworkConfig network;
  std::vector<double> times;
  SolverOptions solver;
  BoundsSettings bounds;
  GridSpec grid;
  SimSettings sim;
  ValidateSettings validate;
  OutputSettings output;
  // Tolerated irregularities found while validating.
  std::vector<std::string> warnings;
};

// Parses and validates a whole document; unknown keys are rejected.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::string& path);
// Every setting with defaults filled in. Execution-only settings (worker
// count, output directory) are left out so reruns compare byte for byte.
json resolved_config(const ExperimentConfig& cfg);

// Fluid hub occupancy implied by a network: q_bar(t) of the bottleneck, or
// 1 when no station is a bottleneck.
class FluidReference {
 public:
  FluidReference(const NetworkConfig& net, const std::vector<double>& mu);
  double q_bar(double t) const;
  double q_bar_average(double t0, double t1) const;
  std::optional<std::size_t> bottleneck() const noexcept { return bottleneck_; }

 private:
  std::optional<std::size_t> bottleneck_;
  std::optional<FluidParams> params_;
};

}  // namespace hubnet
