#include "hubnet/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "hubnet/errors.hpp"
#include "hubnet/rng.hpp"

namespace hubnet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Substream ids inside one replication.
constexpr std::uint64_t kHubStream = 0;
constexpr std::uint64_t kRoutingStream = 1;
constexpr std::uint64_t kFirstStationStream = 2;

struct OpenBusyPeriod {
  bool active = false;
  bool tracked = false;  // false for periods already running at t = 0
  double start = 0.0;
  long long found_one = 0;
  long long served = 0;
};

MeanCI mean_ci(const std::vector<double>& xs) {
  MeanCI out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    out.half_width = kNormalQuantile975 * sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return out;
}

}  // namespace

Regime NetworkConfig::regime() const {
  const double lambda = this->lambda();
  std::size_t below = 0, critical = 0;
  for (std::size_t j = 0; j < p.size() && j < mu.size(); ++j) {
    const double load = lambda * p[j];
    if (mu[j] < load) ++below;
    else if (mu[j] == load) ++critical;
  }
  if (below == 1 && critical == 0) return Regime::SingleBottleneck;
  if (below == 0 && critical == 0) return Regime::NoBottleneck;
  return Regime::MultipleBottlenecks;
}

std::optional<std::size_t> NetworkConfig::bottleneck_index() const {
  if (regime() != Regime::SingleBottleneck) return std::nullopt;
  const double lambda = this->lambda();
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (mu[j] < lambda * p[j]) return j;
  }
  return std::nullopt;
}

std::vector<std::string> NetworkConfig::validate() const {
  std::vector<std::string> warnings;
  if (units < 1) throw ConfigError("network.N", "unit count must be at least 1");
  if (p.empty()) throw ConfigError("network.p", "at least one satellite station is required");
  double total = 0.0;
  for (double pj : p) {
    if (!(pj > 0.0) || !std::isfinite(pj)) {
      throw ConfigError("network.p", "routing probabilities must be positive");
    }
    total += pj;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "routing probabilities sum to " << total << ", expected 1";
    throw ConfigError("network.p", os.str());
  }
  if (mu.size() != p.size()) {
    throw ConfigError("network.mu", "needs one service rate per station (same length as p)");
  }
  for (double m : mu) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw ConfigError("network.mu", "service rates must be positive");
    }
  }
  if (!initial.empty()) {
    if (initial.size() != p.size() + 1) {
      throw ConfigError("network.initial", "expects {hub, q_1, ..., q_k}");
    }
    long long sum = 0;
    for (long long v : initial) {
      if (v < 0) throw ConfigError("network.initial", "counts must be non-negative");
      sum += v;
    }
    if (sum != units) throw ConfigError("network.initial", "counts must sum to N");
  }
  const Regime r = regime();
  if (r != Regime::SingleBottleneck) {
    const std::string msg = r == Regime::NoBottleneck
                                ? "no station satisfies mu_k < lambda p_k"
                                : "more than one station has mu_j <= lambda p_j";
    if (!allow_irregular) throw ConfigError("network.mu", msg);
    warnings.push_back("network.mu: " + msg + " (accepted: allow_irregular)");
  }
  if (bottleneck) {
    if (*bottleneck >= p.size()) {
      throw ConfigError("network.bottleneck", "index out of range");
    }
    const auto found = bottleneck_index();
    if (found && *found != *bottleneck) {
      throw ConfigError("network.bottleneck",
                        "station " + std::to_string(*bottleneck) +
                            " is not the bottleneck (mu_k < lambda p_k holds for station " +
                            std::to_string(*found) + ")");
    }
  }
  return warnings;
}

std::vector<long long> NetworkConfig::initial_state() const {
  if (!initial.empty()) return initial;
  std::vector<long long> s(p.size() + 1, 0);
  s[0] = units;
  return s;
}

Trace simulate(const NetworkConfig& cfg, double horizon, const std::vector<double>& sample_times,
               std::uint64_t seed, const SimOptions& opts) {
  cfg.validate();
  if (!(horizon >= 0.0)) throw DomainError("horizon must be non-negative");
  if (!std::is_sorted(sample_times.begin(), sample_times.end())) {
    throw DomainError("sample times must be sorted");
  }
  for (double s : sample_times) {
    if (!(s >= 0.0 && s <= horizon)) throw DomainError("sample times must lie in [0, horizon]");
  }

  const std::size_t k = cfg.stations();
  const long long N = cfg.units;
  const double n_scale = static_cast<double>(N);

  Trace tr;
  tr.seed = seed;
  tr.sample_times = sample_times;
  tr.busy_periods.resize(k);
  if (opts.record_hub_services) tr.hub_services.resize(static_cast<std::size_t>(N) + 1);

  RngStream hub_rng(split_seed(seed, kHubStream));
  RngStream route_rng(split_seed(seed, kRoutingStream));
  std::vector<RngStream> station_rng;
  station_rng.reserve(k);
  for (std::size_t j = 0; j < k; ++j) station_rng.emplace_back(split_seed(seed, kFirstStationStream + j));

  std::vector<double> cumulative(k);
  std::partial_sum(cfg.p.begin(), cfg.p.end(), cumulative.begin());

  const auto init = cfg.initial_state();
  long long hub = init[0];
  std::vector<long long> q(init.begin() + 1, init.end());
  std::vector<long long> arrivals(k, 0), departures(k, 0);
  std::vector<double> station_next(k, kInf);
  std::vector<OpenBusyPeriod> open(k);
  double hub_next = kInf;
  double t = 0.0;
  double integral = 0.0;
  double load = 0.0;
  long long service_k = 0;  // occupancy at the start of the running service
  long long hub_completions = 0;

  auto start_hub_service = [&]() {
    const double duration = scaled_service_sample(cfg.hub_service, hub, hub_rng);
    hub_next = t + duration;
    service_k = hub;
    if (opts.record_hub_services) {
      auto& st = tr.hub_services[static_cast<std::size_t>(hub)];
      ++st.count;
      st.sum += duration;
      st.sum_sq += duration * duration;
    }
  };
  auto schedule_station = [&](std::size_t j) {
    station_next[j] = t + station_rng[j].exponential(n_scale * cfg.mu[j]);
  };
  auto record_sample = [&](double s) {
    tr.hub_count.push_back(hub);
    tr.queues.push_back(q);
    tr.arrivals.push_back(arrivals);
    tr.departures.push_back(departures);
    tr.hub_integral.push_back(integral + static_cast<double>(hub) * (s - t));
  };

  if (hub > 0) start_hub_service();
  for (std::size_t j = 0; j < k; ++j) {
    if (q[j] > 0) {
      schedule_station(j);
      open[j] = OpenBusyPeriod{true, false, 0.0, 0, 0};
    }
  }

  std::size_t next_sample = 0;
  while (true) {
    // Next event; ties go to the hub, then to the lowest station index.
    double te = hub_next;
    int who = -1;
    for (std::size_t j = 0; j < k; ++j) {
      if (station_next[j] < te) {
        te = station_next[j];
        who = static_cast<int>(j);
      }
    }
    while (next_sample < sample_times.size() && sample_times[next_sample] <= te) {
      record_sample(sample_times[next_sample]);
      ++next_sample;
    }
    if (te > horizon) break;
    if (te < t) throw std::logic_error("event clock moved backwards");

    integral += static_cast<double>(hub) * (te - t);
    load += static_cast<double>(service_k) * (te - t);
    t = te;
    ++tr.event_count;

    if (who < 0) {
      --hub;
      ++hub_completions;
      const double u = route_rng.uniform();
      std::size_t j = 0;
      while (j + 1 < k && u >= cumulative[j]) ++j;
      auto& bp = open[j];
      if (q[j] == 0) {
        bp = OpenBusyPeriod{true, true, t, 0, 0};
        schedule_station(j);
      } else if (q[j] == 1) {
        ++bp.found_one;
      }
      ++q[j];
      ++arrivals[j];
      if (hub > 0) {
        start_hub_service();
      } else {
        hub_next = kInf;
        service_k = 0;
      }
    } else {
      const auto j = static_cast<std::size_t>(who);
      --q[j];
      ++departures[j];
      auto& bp = open[j];
      ++bp.served;
      ++hub;
      if (hub == 1) start_hub_service();
      if (q[j] > 0) {
        schedule_station(j);
      } else {
        station_next[j] = kInf;
        if (bp.tracked) tr.busy_periods[j].push_back({bp.start, t, bp.found_one, bp.served});
        bp = OpenBusyPeriod{};
      }
    }

    if (opts.check_conservation) {
      const long long total = std::accumulate(q.begin(), q.end(), hub);
      if (total != N) throw std::logic_error("unit conservation violated");
    }
    if (opts.record_events) {
      tr.events.push_back({t, who < 0 ? EventType::HubCompletion : EventType::StationCompletion,
                           who, hub, q});
    }
  }
  while (next_sample < sample_times.size()) {
    record_sample(sample_times[next_sample]);
    ++next_sample;
  }
  integral += static_cast<double>(hub) * (horizon - t);
  load += static_cast<double>(service_k) * (horizon - t);
  tr.end_time = horizon;
  tr.total_arrivals = arrivals;
  tr.total_departures = departures;
  tr.hub_completions = hub_completions;
  tr.hub_integral_total = integral;
  tr.service_load_total = load;
  return tr;
}

OffspringEstimate offspring_mean(const Trace& trace, std::size_t station, double t0, double t1) {
  if (station >= trace.busy_periods.size()) throw DomainError("station index out of range");
  if (!(t1 >= t0)) throw DomainError("window end precedes its start");
  OffspringEstimate est;
  double sum = 0.0, sum_sq = 0.0;
  for (const BusyPeriod& bp : trace.busy_periods[station]) {
    if (bp.start < t0 || bp.end > t1) continue;
    ++est.busy_periods;
    est.found_one += bp.found_one;
    const auto f = static_cast<double>(bp.found_one);
    sum += f;
    sum_sq += f * f;
  }
  if (est.busy_periods == 0) return est;
  const auto n = static_cast<double>(est.busy_periods);
  est.defined = true;
  est.mean = sum / n;
  if (est.busy_periods > 1) {
    est.sd = std::sqrt(std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0)));
  }
  return est;
}

std::vector<double> SimEstimate::histogram(std::size_t station, std::size_t sample) const {
  const auto& counts = satellite_counts.at(station).at(sample);
  std::vector<double> out(counts.size());
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0LL));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = total > 0 ? static_cast<double>(counts[i]) / total : 0.0;
  }
  return out;
}

SimEstimate replicate(const NetworkConfig& cfg, const ReplicateOptions& opts) {
  return replicate(cfg, opts, nullptr);
}

SimEstimate replicate(const NetworkConfig& cfg, const ReplicateOptions& opts,
                      std::vector<Trace>* traces) {
  if (opts.replications < 1) throw DomainError("replication count must be at least 1");
  cfg.validate();
  const auto R = static_cast<std::size_t>(opts.replications);
  const std::size_t k = cfg.stations();
  const auto window = opts.offspring_window.value_or(std::make_pair(0.0, opts.horizon));

  std::vector<Trace> runs(R);
  std::vector<std::uint64_t> seeds(R);
  for (std::size_t i = 0; i < R; ++i) seeds[i] = split_seed(opts.base_seed, i);

  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(R)));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    try {
      for (std::size_t i = next++; i < R; i = next++) {
        runs[i] = simulate(cfg, opts.horizon, opts.sample_times, seeds[i], opts.sim);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Aggregation in replication order only.
  SimEstimate est;
  est.sample_times = opts.sample_times;
  est.seeds = seeds;
  est.units = cfg.units;
  est.horizon = opts.horizon;
  est.replications = opts.replications;
  est.offspring_window_start = window.first;
  est.offspring_window_end = window.second;
  const std::size_t S = opts.sample_times.size();
  const double n_scale = static_cast<double>(cfg.units);

  est.hub_occupancy.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    std::vector<double> xs(R);
    for (std::size_t i = 0; i < R; ++i) {
      xs[i] = static_cast<double>(runs[i].hub_count[s]) / n_scale;
    }
    est.hub_occupancy[s] = mean_ci(xs);
  }

  est.satellite_counts.assign(k, std::vector<std::vector<long long>>(S));
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t s = 0; s < S; ++s) {
      auto& bins = est.satellite_counts[j][s];
      for (std::size_t i = 0; i < R; ++i) {
        const auto n = static_cast<std::size_t>(runs[i].queues[s][j]);
        if (bins.size() <= n) bins.resize(n + 1, 0);
        ++bins[n];
      }
    }
  }

  const auto bottleneck = cfg.bottleneck_index();
  for (std::size_t j = 0; j < k; ++j) {
    if (bottleneck && *bottleneck == j) continue;
    StationOffspring so{j, {}, 0, false};
    std::vector<double> per_run;
    OffspringEstimate single;
    for (std::size_t i = 0; i < R; ++i) {
      const auto o = offspring_mean(runs[i], j, window.first, window.second);
      so.busy_periods += o.busy_periods;
      if (o.defined) per_run.push_back(o.mean);
      single = o;
    }
    if (R == 1) {
      so.defined = single.defined;
      so.estimate.mean = single.mean;
      if (single.busy_periods > 1) {
        so.estimate.half_width = kNormalQuantile975 * single.sd /
                                 std::sqrt(static_cast<double>(single.busy_periods));
      }
    } else if (!per_run.empty()) {
      so.defined = true;
      so.estimate = mean_ci(per_run);
    }
    est.offspring.push_back(so);
  }

  est.arrivals.assign(k, 0);
  est.services.assign(k, 0);
  est.hub_service_by_k.assign(static_cast<std::size_t>(cfg.units) + 1, HubServiceStat{});
  for (const Trace& tr : runs) {
    for (std::size_t j = 0; j < k; ++j) {
      est.arrivals[j] += tr.total_arrivals[j];
      est.services[j] += tr.total_departures[j];
    }
    est.hub_services += tr.hub_completions;
    est.hub_integral += tr.hub_integral_total;
    est.service_load += tr.service_load_total;
    for (std::size_t K = 0; K < tr.hub_services.size(); ++K) {
      est.hub_service_by_k[K].count += tr.hub_services[K].count;
      est.hub_service_by_k[K].sum += tr.hub_services[K].sum;
      est.hub_service_by_k[K].sum_sq += tr.hub_services[K].sum_sq;
    }
  }
  if (traces) *traces = std::move(runs);
  return est;
}

LawComparison compare_histogram(const std::vector<long long>& counts, const QueueLengthLaw& law) {
  LawComparison out;
  out.samples = std::accumulate(counts.begin(), counts.end(), 0LL);
  if (out.samples == 0) throw DomainError("empty histogram");
  const double n = static_cast<double>(out.samples);
  const std::size_t support = law.probabilities.size();
  const double law_tail = law.tail(static_cast<long>(support) - 1);

  // Bins 0..support-1 plus one tail bin for everything beyond.
  std::vector<double> observed(support + 1, 0.0), expected(support + 1, 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    observed[std::min(i, support)] += static_cast<double>(counts[i]);
  }
  for (std::size_t i = 0; i < support; ++i) expected[i] = n * law.probabilities[i];
  expected[support] = n * law_tail;

  double l1 = 0.0;
  for (std::size_t i = 0; i <= support; ++i) l1 += std::abs(observed[i] - expected[i]) / n;
  out.tv_distance = 0.5 * l1;

  std::vector<std::pair<double, double>> groups;  // (observed, expected)
  double go = 0.0, ge = 0.0;
  for (std::size_t i = 0; i <= support; ++i) {
    go += observed[i];
    ge += expected[i];
    if (ge >= 5.0) {
      groups.emplace_back(go, ge);
      go = ge = 0.0;
    }
  }
  if (ge > 0.0 || go > 0.0) {
    if (groups.empty()) {
      groups.emplace_back(go, ge);
    } else {
      groups.back().first += go;
      groups.back().second += ge;
    }
  }
  for (const auto& [o, e] : groups) {
    if (e > 0.0) out.chi2 += (o - e) * (o - e) / e;
  }
  out.dof = static_cast<int>(groups.size()) - 1;
  return out;
}

LawComparison compare_to_law(const SimEstimate& est, const QueueLengthLaw& law,
                             std::size_t station, std::size_t sample) {
  if (station >= est.satellite_counts.size() ||
      sample >= est.satellite_counts[station].size()) {
    throw DomainError("no histogram for the requested station/time");
  }
  return compare_histogram(est.satellite_counts[station][sample], law);
}

}  // namespace hubnet
