#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hubnet/bounds.hpp"
#include "hubnet/distributions.hpp"

namespace hubnet {

enum class Regime { SingleBottleneck, NoBottleneck, MultipleBottlenecks };

// Closed network: N units, one state-dependent single-server hub with
// service law G, k exponential FIFO satellites. Station j serves at rate
// N * mu[j]; hub completions are routed to j with probability p[j].
struct NetworkConfig {
  long long units = 0;
  Distribution hub_service = Distribution::exponential(1.0);
  std::vector<double> p;
  std::vector<double> mu;
  // Index of the bottleneck station; inferred when empty.
  std::optional<std::size_t> bottleneck;
  // Empty means all units start in the hub; otherwise {hub, q_1, ..., q_k}.
  std::vector<long long> initial;
  // Accept networks outside the single-bottleneck regime (with a warning).
  bool allow_irregular = false;

  double lambda() const noexcept { return hub_service.rate(); }
  std::size_t stations() const noexcept { return p.size(); }
  Regime regime() const;
  // Bottleneck index under SingleBottleneck, nullopt otherwise.
  std::optional<std::size_t> bottleneck_index() const;
  // Throws ConfigError naming the offending field ("network.p", ...).
  // Returns warnings for tolerated irregularities.
  std::vector<std::string> validate() const;
  std::vector<long long> initial_state() const;
};

struct BusyPeriod {
  double start;
  double end;
  // Arrivals during the period that found exactly one unit at the station.
  long long found_one;
  long long served;
};

struct HubServiceStat {
  long long count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

enum class EventType { HubCompletion, StationCompletion };

struct EventRecord {
  double time;
  EventType type;
  int station;  // -1 for the hub
  long long hub_count;
  std::vector<long long> queues;
};

struct SimOptions {
  bool record_events = false;
  bool record_hub_services = true;
  // Recompute the unit total after every event and throw on mismatch.
  bool check_conservation = true;
};

// Single replication. All per-sample vectors are indexed [sample][station].
struct Trace {
  std::uint64_t seed = 0;
  std::vector<double> sample_times;
  std::vector<long long> hub_count;
  std::vector<std::vector<long long>> queues;
  std::vector<std::vector<long long>> arrivals;
  std::vector<std::vector<long long>> departures;
  // Integral of the hub count over [0, t].
  std::vector<double> hub_integral;
  std::vector<std::vector<BusyPeriod>> busy_periods;  // per station
  // Indexed by K, the hub count at service start.
  std::vector<HubServiceStat> hub_services;
  std::vector<EventRecord> events;
  long long event_count = 0;
  double end_time = 0.0;
  // Counters at the horizon.
  std::vector<long long> total_arrivals;
  std::vector<long long> total_departures;
  long long hub_completions = 0;
  double hub_integral_total = 0.0;
  // Integral over [0, horizon] of the occupancy K at the start of the
  // service in progress (0 while the hub idles). With exponential G the hub
  // completion intensity is lambda times this K.
  double service_load_total = 0.0;
};

// Event-driven run on [0, horizon]; state at each sample time is the left
// limit. sample_times must be sorted and lie in [0, horizon].
Trace simulate(const NetworkConfig& cfg, double horizon, const std::vector<double>& sample_times,
               std::uint64_t seed, const SimOptions& opts = {});

struct OffspringEstimate {
  double mean = 0.0;
  long long busy_periods = 0;
  long long found_one = 0;
  double sd = 0.0;  // across busy periods
  bool defined = false;
};

// Mean number of arrivals finding exactly one unit, per completed busy period
// of `station` lying inside [t0, t1].
OffspringEstimate offspring_mean(const Trace& trace, std::size_t station, double t0, double t1);

struct MeanCI {
  double mean = 0.0;
  double half_width = 0.0;
};

struct StationOffspring {
  std::size_t station;
  MeanCI estimate;
  long long busy_periods;
  bool defined;
};

struct SimEstimate {
  std::vector<double> sample_times;
  std::vector<std::uint64_t> seeds;
  long long units = 0;
  // q_bar_N(t) across replications.
  std::vector<MeanCI> hub_occupancy;
  // [station][sample][queue length] -> replication count.
  std::vector<std::vector<std::vector<long long>>> satellite_counts;
  std::vector<StationOffspring> offspring;
  double offspring_window_start = 0.0;
  double offspring_window_end = 0.0;
  // Totals over all replications at the horizon.
  std::vector<long long> arrivals;
  std::vector<long long> services;
  long long hub_services = 0;
  // Sum over replications of the hub-count integral up to the horizon.
  double hub_integral = 0.0;
  // Sum over replications of Trace::service_load_total.
  double service_load = 0.0;
  std::vector<HubServiceStat> hub_service_by_k;
  double horizon = 0.0;
  long long replications = 0;

  // Empirical P{Q_j(t_i) = n}.
  std::vector<double> histogram(std::size_t station, std::size_t sample) const;
};

struct ReplicateOptions {
  double horizon = 0.0;
  std::vector<double> sample_times;
  std::uint64_t base_seed = 0;
  long long replications = 1;
  int workers = 1;
  // Defaults to [0, horizon].
  std::optional<std::pair<double, double>> offspring_window;
  SimOptions sim;
};

inline constexpr double kNormalQuantile975 = 1.959963984540054;

// Replication i uses seed split_seed(base_seed, i). Output is bit-identical
// for any worker count.
SimEstimate replicate(const NetworkConfig& cfg, const ReplicateOptions& opts);
// Same, also handing back the raw traces (in replication order).
SimEstimate replicate(const NetworkConfig& cfg, const ReplicateOptions& opts,
                      std::vector<Trace>* traces);

struct LawComparison {
  double tv_distance = 0.0;
  double chi2 = 0.0;
  int dof = 0;
  long long samples = 0;
};

// Counts indexed by queue length against a queue-length law. Bins with
// expected count below 5 are pooled with their neighbours; mass beyond the
// law's support forms a final tail bin.
LawComparison compare_histogram(const std::vector<long long>& counts, const QueueLengthLaw& law);
LawComparison compare_to_law(const SimEstimate& est, const QueueLengthLaw& law,
                             std::size_t station, std::size_t sample);

}  // namespace hubnet
