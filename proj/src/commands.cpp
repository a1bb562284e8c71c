#include "hubnet/commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hubnet/errors.hpp"

namespace hubnet {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kEnvelopeSlack = 1e-9;

std::string yes_no(bool b) { return b ? "true" : "false"; }

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row() {
    rows_.emplace_back();
    return *this;
  }
  CsvTable& operator<<(const std::string& s) {
    rows_.back().push_back(s);
    return *this;
  }
  CsvTable& operator<<(const char* s) { return *this << std::string(s); }
  CsvTable& operator<<(double v) { return *this << format_number(v); }
  CsvTable& operator<<(long long v) { return *this << std::to_string(v); }
  CsvTable& operator<<(long v) { return *this << std::to_string(v); }
  CsvTable& operator<<(int v) { return *this << std::to_string(v); }
  CsvTable& operator<<(std::size_t v) { return *this << std::to_string(v); }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Writer {
 public:
  Writer(const ExperimentConfig& cfg, std::string command, std::ostream& log)
      : cfg_(cfg), command_(std::move(command)), log_(log), dir_(cfg.output.dir) {
    std::filesystem::create_directories(dir_);
  }
  bool csv() const { return cfg_.output.wants("csv"); }
  bool json_out() const { return cfg_.output.wants("json"); }

  void write_csv(const std::string& name, const CsvTable& t) {
    t.write(dir_ / name);
    log_ << "wrote " << (dir_ / name).string() << '\n';
  }
  // Wraps `body` with the command name and the resolved configuration.
  void write_json(const std::string& name, json body) {
    json doc;
    doc["command"] = command_;
    doc["config"] = resolved_config(cfg_);
    for (auto& [k, v] : body.items()) doc[k] = v;
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    out << doc.dump(2) << '\n';
    log_ << "wrote " << (dir_ / name).string() << '\n';
  }

 private:
  const ExperimentConfig& cfg_;
  std::string command_;
  std::ostream& log_;
  std::filesystem::path dir_;
};

void require_times(const ExperimentConfig& cfg, const char* command) {
  if (cfg.times.empty()) {
    throw ConfigError("times", std::string(command) + " needs at least one sample time");
  }
}

std::vector<std::size_t> non_bottleneck_stations(const NetworkConfig& net,
                                                 const FluidReference& ref) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < net.stations(); ++j) {
    if (!ref.bottleneck() || *ref.bottleneck() != j) out.push_back(j);
  }
  return out;
}

RootResult checked_root(const CompoundSpec& spec, const SolverOptions& opts, double t,
                        std::size_t station) {
  RootResult r = satellite_root(spec, opts);
  if (!r.converged && !r.degenerate) {
    std::ostringstream os;
    os << "root solver did not converge (t=" << format_number(t) << ", station " << station
       << ", residual " << format_number(r.residual) << ")";
    throw NumericError(os.str());
  }
  return r;
}

// Analytic reference rho_j(t) and phi_j(t) under a given set of rates.
struct StationReference {
  double q_bar;
  double rho;
  double phi;
};

StationReference station_reference(const ExperimentConfig& cfg, const std::vector<double>& mu,
                                   std::size_t j, double q_bar, double t) {
  const NetworkConfig& net = cfg.network;
  const CompoundSpec spec(net.hub_service, net.p[j], q_bar, mu[j]);
  const RootResult r = checked_root(spec, cfg.solver, t, j);
  return {q_bar, rho_of_t(net.lambda(), net.p[j], mu[j], q_bar), r.root};
}

// ---- solve -------------------------------------------------------------

int cmd_solve(const ExperimentConfig& cfg, std::ostream& log) {
  const auto rows = solve_rows(cfg);
  Writer w(cfg, "solve", log);
  if (w.csv()) {
    CsvTable t({"t", "station", "q_bar", "rho", "phi", "iterations", "residual"});
    for (const auto& r : rows) {
      t.row() << r.t << r.station << r.q_bar << r.rho << r.root.root << r.root.iterations
              << r.root.residual;
    }
    w.write_csv("solve.csv", t);
  }
  if (w.json_out()) {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"t", r.t},
                     {"station", r.station},
                     {"q_bar", r.q_bar},
                     {"rho", r.rho},
                     {"phi", r.root.root},
                     {"iterations", r.root.iterations},
                     {"residual", r.root.residual},
                     {"method", std::string(method_name(r.root.method))},
                     {"degenerate", r.root.degenerate}});
    }
    w.write_json("solve.json", {{"rows", arr}});
  }
  return kExitOk;
}

// ---- bounds ------------------------------------------------------------

int cmd_bounds(const ExperimentConfig& cfg, std::ostream& log) {
  double epsilon = 0.0;
  const auto rows = bounds_rows(cfg, &epsilon);
  if (!check_condition_f1(cfg.network.hub_service)) {
    log << "warning: hub service law has r <= 2/lambda^2; rows carry f1_satisfied=false\n";
  }
  Writer w(cfg, "bounds", log);
  if (w.csv()) {
    CsvTable t({"t", "station", "rho", "ell", "rolski_lo", "rolski_hi", "eps_lo", "eps_hi",
                "root", "lower", "upper", "epsilon", "f1_satisfied", "f2_satisfied", "inside"});
    for (const auto& r : rows) {
      const auto& b = r.report;
      t.row() << r.t << r.station << b.rho << b.ell << b.rolski_lo << b.rolski_hi << b.eps_lo
              << b.eps_hi << r.root << b.lower << b.upper << r.epsilon << yes_no(b.f1_satisfied)
              << yes_no(b.f2_satisfied) << yes_no(r.inside);
    }
    w.write_csv("bounds.csv", t);
  }
  if (w.json_out()) {
    json arr = json::array();
    for (const auto& r : rows) {
      const auto& b = r.report;
      arr.push_back({{"t", r.t},
                     {"station", r.station},
                     {"rho", b.rho},
                     {"ell", b.ell},
                     {"a", b.a},
                     {"b", b.b},
                     {"rolski_lo", b.rolski_lo},
                     {"rolski_hi", b.rolski_hi},
                     {"eps_lo", b.eps_lo},
                     {"eps_hi", b.eps_hi},
                     {"root", r.root},
                     {"lower", b.lower},
                     {"upper", b.upper},
                     {"theorem", std::string(theorem_name(b.theorem))},
                     {"variant", std::string(variant_name(b.variant))},
                     {"f1_satisfied", b.f1_satisfied},
                     {"f2_satisfied", b.f2_satisfied},
                     {"degenerate", b.degenerate},
                     {"inside", r.inside}});
    }
    w.write_json("bounds.json", {{"epsilon", epsilon}, {"rows", arr}});
  }
  return kExitOk;
}

// ---- fluid -------------------------------------------------------------

int cmd_fluid(const ExperimentConfig& cfg, std::ostream& log) {
  require_times(cfg, "fluid");
  const FluidReference ref(cfg.network, cfg.network.mu);
  Writer w(cfg, "fluid", log);
  if (w.csv()) {
    CsvTable t({"t", "q_bar", "q"});
    for (double s : cfg.times) {
      const double qb = ref.q_bar(s);
      t.row() << s << qb << 1.0 - qb;
    }
    w.write_csv("fluid.csv", t);
  }
  if (w.json_out()) {
    json arr = json::array();
    for (double s : cfg.times) {
      const double qb = ref.q_bar(s);
      arr.push_back({{"t", s}, {"q_bar", qb}, {"q", 1.0 - qb}});
    }
    json body;
    body["bottleneck"] = ref.bottleneck() ? json(*ref.bottleneck()) : json(nullptr);
    body["rows"] = arr;
    w.write_json("fluid.json", body);
  }
  return kExitOk;
}

// ---- simulate ----------------------------------------------------------

ReplicateOptions replicate_options(const ExperimentConfig& cfg) {
  if (!(cfg.sim.horizon > 0.0)) {
    throw ConfigError("sim.horizon", "must be positive (set it or give sample times)");
  }
  ReplicateOptions o;
  o.horizon = cfg.sim.horizon;
  o.sample_times = cfg.times;
  o.base_seed = cfg.sim.base_seed;
  o.replications = cfg.sim.replications;
  o.workers = cfg.sim.workers;
  o.offspring_window = cfg.sim.offspring_window;
  return o;
}

json estimate_to_json(const SimEstimate& est) {
  json occ = json::array();
  for (std::size_t s = 0; s < est.sample_times.size(); ++s) {
    occ.push_back({{"t", est.sample_times[s]},
                   {"mean", est.hub_occupancy[s].mean},
                   {"half_width", est.hub_occupancy[s].half_width}});
  }
  json sats = json::array();
  for (std::size_t j = 0; j < est.satellite_counts.size(); ++j) {
    json per_time = json::array();
    for (std::size_t s = 0; s < est.sample_times.size(); ++s) {
      per_time.push_back({{"t", est.sample_times[s]}, {"counts", est.satellite_counts[j][s]}});
    }
    sats.push_back({{"station", j},
                    {"arrivals", est.arrivals[j]},
                    {"services", est.services[j]},
                    {"histograms", per_time}});
  }
  json off = json::array();
  for (const auto& o : est.offspring) {
    off.push_back({{"station", o.station},
                   {"defined", o.defined},
                   {"mean", o.estimate.mean},
                   {"half_width", o.estimate.half_width},
                   {"busy_periods", o.busy_periods}});
  }
  json hub = json::array();
  for (std::size_t K = 0; K < est.hub_service_by_k.size(); ++K) {
    const auto& h = est.hub_service_by_k[K];
    if (h.count == 0) continue;
    hub.push_back({{"K", K}, {"count", h.count}, {"mean", h.sum / static_cast<double>(h.count)}});
  }
  json seeds = json::array();
  for (auto s : est.seeds) seeds.push_back(s);
  json out;
  out["replications"] = est.replications;
  out["units"] = est.units;
  out["horizon"] = est.horizon;
  out["seeds"] = seeds;
  out["hub_occupancy"] = occ;
  out["satellites"] = sats;
  out["offspring_window"] = {est.offspring_window_start, est.offspring_window_end};
  out["offspring"] = off;
  out["hub_services"] = est.hub_services;
  out["hub_integral"] = est.hub_integral;
  out["service_load"] = est.service_load;
  out["hub_service_by_k"] = hub;
  return out;
}

void write_event_log(const ExperimentConfig& cfg, Writer& w) {
  SimOptions opts;
  opts.record_events = true;
  const std::uint64_t seed = split_seed(cfg.sim.base_seed, 0);
  const Trace tr = simulate(cfg.network, cfg.sim.horizon, {}, seed, opts);
  CsvTable t({"time", "event_type", "station", "hub_count", "queue_vector"});
  for (const auto& e : tr.events) {
    std::string qv;
    for (std::size_t j = 0; j < e.queues.size(); ++j) {
      qv += (j ? ";" : "") + std::to_string(e.queues[j]);
    }
    t.row() << e.time << (e.type == EventType::HubCompletion ? "hub_completion" : "station_completion")
            << e.station << e.hub_count << qv;
  }
  w.write_csv("events.csv", t);
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  const SimEstimate est = replicate(cfg.network, replicate_options(cfg));
  Writer w(cfg, "simulate", log);
  if (w.csv()) {
    CsvTable hub({"t", "q_bar_N", "half_width"});
    for (std::size_t s = 0; s < est.sample_times.size(); ++s) {
      hub.row() << est.sample_times[s] << est.hub_occupancy[s].mean
                << est.hub_occupancy[s].half_width;
    }
    w.write_csv("simulate_hub.csv", hub);
    CsvTable sat({"t", "station", "queue_length", "count"});
    for (std::size_t j = 0; j < est.satellite_counts.size(); ++j) {
      for (std::size_t s = 0; s < est.sample_times.size(); ++s) {
        const auto& c = est.satellite_counts[j][s];
        for (std::size_t n = 0; n < c.size(); ++n) {
          if (c[n] > 0) sat.row() << est.sample_times[s] << j << n << c[n];
        }
      }
    }
    w.write_csv("simulate_satellites.csv", sat);
    if (cfg.sim.event_log) write_event_log(cfg, w);
  }
  if (w.json_out()) w.write_json("simulate.json", {{"estimate", estimate_to_json(est)}});
  return kExitOk;
}

// ---- validate ----------------------------------------------------------

int cmd_validate(const ExperimentConfig& cfg, std::ostream& log) {
  const ValidationReport rep = run_validation(cfg);
  Writer w(cfg, "validate", log);
  if (w.csv()) {
    CsvTable t({"check", "t", "station", "observed", "reference", "deviation", "tolerance",
                "enforced", "pass"});
    for (const auto& c : rep.checks) {
      t.row() << c.name << (std::isnan(c.t) ? std::string() : format_number(c.t))
              << (c.station < 0 ? std::string() : std::to_string(c.station)) << c.observed
              << c.reference << c.deviation << c.tolerance << yes_no(c.enforced)
              << yes_no(c.passed);
    }
    w.write_csv("validate.csv", t);
  }
  if (w.json_out()) {
    json arr = json::array();
    for (const auto& c : rep.checks) {
      arr.push_back({{"check", c.name},
                     {"t", number_or_null(c.t)},
                     {"station", c.station < 0 ? json(nullptr) : json(c.station)},
                     {"observed", c.observed},
                     {"reference", c.reference},
                     {"deviation", c.deviation},
                     {"tolerance", c.tolerance},
                     {"enforced", c.enforced},
                     {"pass", c.passed}});
    }
    w.write_json("validate.json", {{"passed", rep.passed()},
                                   {"checks", arr},
                                   {"estimate", estimate_to_json(rep.estimate)}});
  }
  if (rep.passed()) return kExitOk;
  for (const auto& c : rep.checks) {
    if (c.enforced && !c.passed) {
      log << "tolerance breach: " << c.name;
      if (!std::isnan(c.t)) log << " t=" << format_number(c.t);
      if (c.station >= 0) log << " station=" << c.station;
      log << " deviation=" << format_number(c.deviation)
          << " tolerance=" << format_number(c.tolerance) << '\n';
    }
  }
  return kExitTolerance;
}

// ---- metrics -----------------------------------------------------------

int cmd_metrics(const ExperimentConfig& cfg, std::ostream& log) {
  const Distribution& g = cfg.network.hub_service;
  const ClosenessReport rep = closeness_report(g, cfg.grid);
  const bool f1 = check_condition_f1(g);
  Writer w(cfg, "metrics", log);
  if (w.csv()) {
    CsvTable t({"family", "mean", "second_moment", "epsilon_hat", "kolmogorov_exp", "aging",
                "grid_tolerance", "x_points", "y_points", "f1_satisfied"});
    t.row() << std::string(family_name(g.family())) << g.mean() << g.second_moment()
            << rep.epsilon_hat << rep.kolmogorov_exp << std::string(aging_name(rep.aging))
            << rep.grid.tolerance << rep.grid.x.size() << rep.grid.y.size() << yes_no(f1);
    w.write_csv("metrics.csv", t);
  }
  if (w.json_out()) {
    w.write_json("metrics.json", {{"distribution", distribution_to_json(g)},
                                  {"mean", g.mean()},
                                  {"second_moment", g.second_moment()},
                                  {"epsilon_hat", rep.epsilon_hat},
                                  {"kolmogorov_exp", rep.kolmogorov_exp},
                                  {"aging", std::string(aging_name(rep.aging))},
                                  {"grid", rep.grid.describe()},
                                  {"grid_tolerance", rep.grid.tolerance},
                                  {"f1_satisfied", f1}});
  }
  return kExitOk;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<SolveRow> solve_rows(const ExperimentConfig& cfg) {
  require_times(cfg, "solve");
  const NetworkConfig& net = cfg.network;
  const FluidReference ref(net, net.mu);
  std::vector<SolveRow> rows;
  for (double t : cfg.times) {
    const double qb = ref.q_bar(t);
    for (std::size_t j : non_bottleneck_stations(net, ref)) {
      const CompoundSpec spec(net.hub_service, net.p[j], qb, net.mu[j]);
      rows.push_back({t, j, qb, rho_of_t(net.lambda(), net.p[j], net.mu[j], qb),
                      checked_root(spec, cfg.solver, t, j)});
    }
  }
  return rows;
}

std::vector<BoundsRow> bounds_rows(const ExperimentConfig& cfg, double* epsilon_used) {
  require_times(cfg, "bounds");
  const NetworkConfig& net = cfg.network;
  const double epsilon = cfg.bounds.epsilon
                             ? *cfg.bounds.epsilon
                             : closeness_report(net.hub_service, cfg.grid).epsilon_hat;
  if (epsilon_used) *epsilon_used = epsilon;
  const FluidReference ref(net, net.mu);
  std::vector<BoundsRow> rows;
  for (double t : cfg.times) {
    const double qb = ref.q_bar(t);
    for (std::size_t j : non_bottleneck_stations(net, ref)) {
      if (!(net.p[j] < 1.0)) {
        throw ConfigError("network.p", "bounds need every routing probability below 1");
      }
      BoundsRow row{t, j, epsilon, 0.0, false, {}};
      row.report = theorem_envelope(net.hub_service, net.p[j], net.mu[j], qb, epsilon,
                                    cfg.bounds.theorem, cfg.bounds.variant, cfg.solver);
      const CompoundSpec spec(net.hub_service, net.p[j], qb, net.mu[j]);
      row.root = checked_root(spec, cfg.solver, t, j).root;
      row.inside = row.report.lower - kEnvelopeSlack <= row.root &&
                   row.root <= row.report.upper + kEnvelopeSlack;
      rows.push_back(row);
    }
  }
  return rows;
}

bool ValidationReport::passed() const {
  for (const auto& c : checks) {
    if (c.enforced && !c.passed) return false;
  }
  return true;
}

ValidationReport run_validation(const ExperimentConfig& cfg) {
  require_times(cfg, "validate");
  const NetworkConfig& net = cfg.network;
  const ValidateSettings& vs = cfg.validate;
  const std::vector<double>& mu = vs.reference_mu ? *vs.reference_mu : net.mu;
  const FluidReference ref(net, mu);
  const auto stations = non_bottleneck_stations(net, ref);

  ValidationReport rep;
  rep.estimate = replicate(net, replicate_options(cfg));
  const SimEstimate& est = rep.estimate;
  const double lambda = net.lambda();
  const bool law_enforced = cfg.sim.replications >= vs.law_min_replications;

  for (std::size_t s = 0; s < cfg.times.size(); ++s) {
    const double t = cfg.times[s];
    const double qb = ref.q_bar(t);
    const double obs = est.hub_occupancy[s].mean;
    const double dev = std::abs(obs - qb);
    rep.checks.push_back(
        {"fluid", t, -1, obs, qb, dev, vs.fluid_tolerance, true, dev <= vs.fluid_tolerance});
  }

  for (std::size_t s = 0; s < cfg.times.size(); ++s) {
    const double t = cfg.times[s];
    for (std::size_t j : stations) {
      const StationReference sr = station_reference(cfg, mu, j, ref.q_bar(t), t);
      if (!(sr.rho > 0.0)) continue;  // t = 0 with the trivial empty-station law
      const QueueLengthLaw law = queue_length_law(sr.rho, sr.phi);
      const LawComparison cmp = compare_to_law(est, law, j, s);
      rep.checks.push_back({"law_tv", t, static_cast<int>(j), cmp.tv_distance, 0.0,
                            cmp.tv_distance, vs.tv_tolerance, law_enforced,
                            cmp.tv_distance <= vs.tv_tolerance});
    }
  }

  // Routed arrivals against their compensator p_j * lambda * integral of the
  // service-start occupancy; a martingale identity only for exponential G.
  const bool markov = net.hub_service.family() == Family::Exponential;
  for (std::size_t j = 0; j < net.stations(); ++j) {
    const double expected = net.p[j] * lambda * est.service_load;
    const double observed = static_cast<double>(est.arrivals[j]);
    const double z = expected > 0.0 ? std::abs(observed - expected) / std::sqrt(expected) : 0.0;
    rep.checks.push_back({"compensator", kNaN, static_cast<int>(j), observed, expected, z,
                          vs.compensator_sigmas, markov, z <= vs.compensator_sigmas});
  }

  // Hub service durations started at occupancy K have mean 1 / (K lambda)
  // and variance Var(G) / K^2; pooled z-score over all K.
  {
    const double var_g = net.hub_service.second_moment() - 1.0 / (lambda * lambda);
    double observed = 0.0, expected = 0.0, variance = 0.0;
    for (std::size_t K = 1; K < est.hub_service_by_k.size(); ++K) {
      const auto& h = est.hub_service_by_k[K];
      const double n = static_cast<double>(h.count);
      const double k = static_cast<double>(K);
      observed += h.sum;
      expected += n / (k * lambda);
      variance += n * var_g / (k * k);
    }
    const double z = variance > 0.0 ? std::abs(observed - expected) / std::sqrt(variance) : 0.0;
    rep.checks.push_back({"hub_service", kNaN, -1, observed, expected, z, vs.compensator_sigmas,
                          variance > 0.0, z <= vs.compensator_sigmas});
  }

  const double w0 = est.offspring_window_start;
  const double w1 = est.offspring_window_end;
  const double t_mid = 0.5 * (w0 + w1);
  const double qb_avg = ref.q_bar_average(w0, w1);
  for (const StationOffspring& o : est.offspring) {
    if (ref.bottleneck() && *ref.bottleneck() == o.station) continue;
    const StationReference sr = station_reference(cfg, mu, o.station, qb_avg, t_mid);
    const double se = o.estimate.half_width / kNormalQuantile975;
    const double tol = vs.offspring_sigmas * se;
    const double dev = std::abs(o.estimate.mean - sr.phi);
    const bool enforced = o.defined && se > 0.0;
    rep.checks.push_back({"offspring", kNaN, static_cast<int>(o.station), o.estimate.mean, sr.phi,
                          dev, tol, enforced, enforced && dev <= tol});
  }
  return rep;
}

int run_command(const std::string& name, const ExperimentConfig& cfg, std::ostream& log) {
  for (const auto& w : cfg.warnings) log << "warning: " << w << '\n';
  if (name == "solve") return cmd_solve(cfg, log);
  if (name == "bounds") return cmd_bounds(cfg, log);
  if (name == "fluid") return cmd_fluid(cfg, log);
  if (name == "simulate") return cmd_simulate(cfg, log);
  if (name == "validate") return cmd_validate(cfg, log);
  if (name == "metrics") return cmd_metrics(cfg, log);
  throw ConfigError("command", "unknown subcommand " + name);
}

}  // namespace hubnet
