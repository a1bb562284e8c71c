#include "hubnet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hubnet/errors.hpp"

namespace hubnet {
namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

template <typename T>
std::string_view type_label() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else if constexpr (std::is_same_v<T, std::string>) return "a string";
  else return "an array";
}

template <typename T>
T convert(const json& v, const std::string& field) {
  bool ok = false;
  if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
  else if constexpr (std::is_integral_v<T>) ok = v.is_number_integer();
  else if constexpr (std::is_floating_point_v<T>) ok = v.is_number();
  else if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
  else ok = v.is_array();
  if (ok) {
    try {
      return v.get<T>();
    } catch (const nlohmann::json::exception&) {
      ok = false;
    }
  }
  throw ConfigError(field, "expected " + std::string(type_label<T>()));
}

// One JSON object; remembers the keys read so that leftovers can be
// reported as unknown.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) {
      throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key);
  }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return doc_.at(key);
  }
  std::string field(const std::string& key) const { return join(path_, key); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(doc_.at(key), field(key));
  }
  template <typename T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key), "is required");
    return convert<T>(doc_.at(key), field(key));
  }
  Section sub(const std::string& key) {
    static const json empty = json::object();
    if (!has(key)) return Section(empty, field(key));
    return Section(doc_.at(key), field(key));
  }

  void finish() const {
    for (const auto& [k, v] : doc_.items()) {
      if (!seen_.count(k)) throw ConfigError(field(k), "unknown key");
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

void require_positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive");
}

void parse_network(Section s, ExperimentConfig& cfg) {
  NetworkConfig& net = cfg.network;
  net.units = s.require<long long>("N");
  net.hub_service = distribution_from_json(s.raw("hub_service"), s.field("hub_service"));
  net.p = s.require<std::vector<double>>("p");
  net.mu = s.require<std::vector<double>>("mu");
  if (s.has("bottleneck")) net.bottleneck = s.require<std::size_t>("bottleneck");
  net.initial = s.get<std::vector<long long>>("initial", {});
  net.allow_irregular = s.get<bool>("allow_irregular", false);
  s.finish();
  cfg.warnings = net.validate();
}

void parse_times(const json& doc, ExperimentConfig& cfg) {
  if (!doc.contains("times")) return;
  cfg.times = convert<std::vector<double>>(doc.at("times"), "times");
  for (double t : cfg.times) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("times", "must be finite and >= 0");
  }
  if (!std::is_sorted(cfg.times.begin(), cfg.times.end())) {
    throw ConfigError("times", "must be in ascending order");
  }
}

void parse_solver(Section s, SolverOptions& o) {
  o.tolerance = s.get<double>("tolerance", o.tolerance);
  o.max_iterations = s.get<long>("max_iterations", o.max_iterations);
  o.max_bisections = s.get<int>("max_bisections", o.max_bisections);
  o.plateau_ratio = s.get<double>("plateau_ratio", o.plateau_ratio);
  o.plateau_window = s.get<long>("plateau_window", o.plateau_window);
  s.finish();
  require_positive(o.tolerance, s.field("tolerance"));
  if (o.max_iterations < 1) throw ConfigError(s.field("max_iterations"), "must be >= 1");
  if (o.max_bisections < 0) throw ConfigError(s.field("max_bisections"), "must be >= 0");
  if (!(o.plateau_ratio > 0.0 && o.plateau_ratio < 1.0)) {
    throw ConfigError(s.field("plateau_ratio"), "must lie in (0, 1)");
  }
  if (o.plateau_window < 1) throw ConfigError(s.field("plateau_window"), "must be >= 1");
}

void parse_bounds(Section s, BoundsSettings& b) {
  if (s.has("epsilon_source")) {
    const json& v = s.raw("epsilon_source");
    if (v.is_string() && v.get<std::string>() == "measured") {
      b.epsilon.reset();
    } else if (v.is_number()) {
      b.epsilon = v.get<double>();
      if (!(*b.epsilon >= 0.0) || !std::isfinite(*b.epsilon)) {
        throw ConfigError(s.field("epsilon_source"), "explicit epsilon must be >= 0");
      }
    } else {
      throw ConfigError(s.field("epsilon_source"), "expected \"measured\" or a number");
    }
  }
  const auto variant = s.get<std::string>("variant", "corrected");
  if (variant == "corrected") b.variant = MomentVariant::Corrected;
  else if (variant == "legacy") b.variant = MomentVariant::Legacy;
  else throw ConfigError(s.field("variant"), "expected \"corrected\" or \"legacy\"");
  const auto theorem = s.get<std::string>("theorem", "T1");
  if (theorem == "T1") b.theorem = Theorem::T1;
  else if (theorem == "T2") b.theorem = Theorem::T2;
  else throw ConfigError(s.field("theorem"), "expected \"T1\" or \"T2\"");
  s.finish();
}

void parse_grid(Section s, GridSpec& g) {
  g.x_points = s.get<int>("x_points", g.x_points);
  g.y_points = s.get<int>("y_points", g.y_points);
  g.x_tail = s.get<double>("x_tail", g.x_tail);
  g.y_tail = s.get<double>("y_tail", g.y_tail);
  g.survival_floor = s.get<double>("survival_floor", g.survival_floor);
  g.decades = s.get<double>("decades", g.decades);
  s.finish();
  if (g.x_points < 2) throw ConfigError(s.field("x_points"), "must be >= 2");
  if (g.y_points < 1) throw ConfigError(s.field("y_points"), "must be >= 1");
  auto unit_interval = [&](double v, const char* key) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(s.field(key), "must lie in (0, 1)");
  };
  unit_interval(g.x_tail, "x_tail");
  unit_interval(g.y_tail, "y_tail");
  unit_interval(g.survival_floor, "survival_floor");
  require_positive(g.decades, s.field("decades"));
}

void parse_sim(Section s, ExperimentConfig& cfg) {
  SimSettings& sim = cfg.sim;
  sim.replications = s.get<long long>("replications", sim.replications);
  sim.base_seed = s.get<std::uint64_t>("base_seed", sim.base_seed);
  const bool explicit_horizon = s.has("horizon");
  sim.horizon = s.get<double>("horizon", 0.0);
  sim.workers = s.get<int>("workers", sim.workers);
  if (s.has("offspring_window")) {
    const auto w = s.require<std::vector<double>>("offspring_window");
    if (w.size() != 2 || !(w[0] >= 0.0) || !(w[1] >= w[0])) {
      throw ConfigError(s.field("offspring_window"), "expected [t0, t1] with 0 <= t0 <= t1");
    }
    sim.offspring_window = std::make_pair(w[0], w[1]);
  }
  sim.event_log = s.get<bool>("event_log", false);
  s.finish();
  if (sim.replications < 1) throw ConfigError(s.field("replications"), "must be >= 1");
  if (sim.workers < 1) throw ConfigError(s.field("workers"), "must be >= 1");
  double needed = cfg.times.empty() ? 0.0 : cfg.times.back();
  if (sim.offspring_window) needed = std::max(needed, sim.offspring_window->second);
  if (explicit_horizon) {
    require_positive(sim.horizon, s.field("horizon"));
    if (sim.horizon < needed) {
      throw ConfigError(s.field("horizon"), "must cover every sample time and the offspring window");
    }
  } else {
    sim.horizon = needed;
  }
}

void parse_validate(Section s, ExperimentConfig& cfg) {
  ValidateSettings& v = cfg.validate;
  v.fluid_tolerance = s.get<double>("fluid_tolerance", v.fluid_tolerance);
  v.tv_tolerance = s.get<double>("tv_tolerance", v.tv_tolerance);
  v.law_min_replications = s.get<long long>("law_min_replications", v.law_min_replications);
  v.compensator_sigmas = s.get<double>("compensator_sigmas", v.compensator_sigmas);
  v.offspring_sigmas = s.get<double>("offspring_sigmas", v.offspring_sigmas);
  Section ref = s.sub("reference");
  if (ref.has("mu")) v.reference_mu = ref.require<std::vector<double>>("mu");
  ref.finish();
  s.finish();
  require_positive(v.fluid_tolerance, s.field("fluid_tolerance"));
  require_positive(v.tv_tolerance, s.field("tv_tolerance"));
  require_positive(v.compensator_sigmas, s.field("compensator_sigmas"));
  require_positive(v.offspring_sigmas, s.field("offspring_sigmas"));
  if (v.law_min_replications < 1) {
    throw ConfigError(s.field("law_min_replications"), "must be >= 1");
  }
  if (v.reference_mu) {
    if (v.reference_mu->size() != cfg.network.p.size()) {
      throw ConfigError(ref.field("mu"), "needs one rate per station");
    }
    for (double m : *v.reference_mu) require_positive(m, ref.field("mu"));
  }
}

void parse_output(Section s, OutputSettings& o) {
  o.dir = s.get<std::string>("dir", o.dir);
  o.formats = s.get<std::vector<std::string>>("formats", o.formats);
  s.finish();
  if (o.formats.empty()) throw ConfigError(s.field("formats"), "must not be empty");
  for (const auto& f : o.formats) {
    if (f != "csv" && f != "json") throw ConfigError(s.field("formats"), "unknown format " + f);
  }
}

}  // namespace

json distribution_to_json(const Distribution& d) {
  json params = json::object();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, law::Exponential>) {
          params["rate"] = p.rate;
        } else if constexpr (std::is_same_v<T, law::Erlang>) {
          params["k"] = p.k;
          params["rate"] = p.rate;
        } else if constexpr (std::is_same_v<T, law::HyperExp2>) {
          params["weight"] = p.weight;
          params["rate1"] = p.rate1;
          params["rate2"] = p.rate2;
        } else if constexpr (std::is_same_v<T, law::Deterministic>) {
          params["value"] = p.value;
        } else {
          params["shape"] = p.shape;
          params["rate"] = p.rate;
        }
      },
      d.params());
  json out;
  out["family"] = std::string(family_name(d.family()));
  out["params"] = params;
  return out;
}

Distribution distribution_from_json(const json& j, const std::string& path) {
  Section s(j, path);
  const auto family = s.require<std::string>("family");
  Section p = s.sub("params");
  s.finish();
  auto build = [&]() -> Distribution {
    if (family == "exponential") return Distribution::exponential(p.require<double>("rate"));
    if (family == "erlang") {
      const int k = p.require<int>("k");
      return Distribution::erlang(k, p.require<double>("rate"));
    }
    if (family == "hyperexp2") {
      const double w = p.require<double>("weight");
      const double r1 = p.require<double>("rate1");
      return Distribution::hyperexp2(w, r1, p.require<double>("rate2"));
    }
    if (family == "deterministic") return Distribution::deterministic(p.require<double>("value"));
    if (family == "gamma") {
      const double shape = p.require<double>("shape");
      return Distribution::gamma(shape, p.require<double>("rate"));
    }
    throw ConfigError(s.field("family"),
                      "unknown family \"" + family +
                          "\" (exponential, erlang, hyperexp2, deterministic, gamma)");
  };
  try {
    Distribution d = build();
    p.finish();
    return d;
  } catch (const DomainError& e) {
    throw ConfigError(s.field("params"), e.what());
  }
}

bool OutputSettings::wants(const std::string& f) const {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  Section root(doc, "");
  parse_network(root.sub("network"), cfg);
  root.has("times");
  parse_times(doc, cfg);
  parse_solver(root.sub("solver"), cfg.solver);
  parse_bounds(root.sub("bounds"), cfg.bounds);
  parse_grid(root.sub("grid"), cfg.grid);
  parse_sim(root.sub("sim"), cfg);
  parse_validate(root.sub("validate"), cfg);
  parse_output(root.sub("output"), cfg.output);
  root.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("--config", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json resolved_config(const ExperimentConfig& cfg) {
  const NetworkConfig& net = cfg.network;
  json network;
  network["N"] = net.units;
  network["hub_service"] = distribution_to_json(net.hub_service);
  network["p"] = net.p;
  network["mu"] = net.mu;
  if (net.bottleneck) network["bottleneck"] = *net.bottleneck;
  else if (auto b = net.bottleneck_index()) network["bottleneck"] = *b;
  else network["bottleneck"] = nullptr;
  network["initial"] = net.initial_state();
  network["allow_irregular"] = net.allow_irregular;

  json solver;
  solver["tolerance"] = cfg.solver.tolerance;
  solver["max_iterations"] = cfg.solver.max_iterations;
  solver["max_bisections"] = cfg.solver.max_bisections;
  solver["plateau_ratio"] = cfg.solver.plateau_ratio;
  solver["plateau_window"] = cfg.solver.plateau_window;

  json bounds;
  if (cfg.bounds.epsilon) bounds["epsilon_source"] = *cfg.bounds.epsilon;
  else bounds["epsilon_source"] = "measured";
  bounds["variant"] = std::string(variant_name(cfg.bounds.variant));
  bounds["theorem"] = std::string(theorem_name(cfg.bounds.theorem));

  json grid;
  grid["x_points"] = cfg.grid.x_points;
  grid["y_points"] = cfg.grid.y_points;
  grid["x_tail"] = cfg.grid.x_tail;
  grid["y_tail"] = cfg.grid.y_tail;
  grid["survival_floor"] = cfg.grid.survival_floor;
  grid["decades"] = cfg.grid.decades;

  json sim;
  sim["replications"] = cfg.sim.replications;
  sim["base_seed"] = cfg.sim.base_seed;
  sim["horizon"] = cfg.sim.horizon;
  if (cfg.sim.offspring_window) {
    sim["offspring_window"] = {cfg.sim.offspring_window->first, cfg.sim.offspring_window->second};
  } else {
    sim["offspring_window"] = {0.0, cfg.sim.horizon};
  }
  sim["event_log"] = cfg.sim.event_log;

  json validate;
  validate["fluid_tolerance"] = cfg.validate.fluid_tolerance;
  validate["tv_tolerance"] = cfg.validate.tv_tolerance;
  validate["law_min_replications"] = cfg.validate.law_min_replications;
  validate["compensator_sigmas"] = cfg.validate.compensator_sigmas;
  validate["offspring_sigmas"] = cfg.validate.offspring_sigmas;
  json reference = json::object();
  if (cfg.validate.reference_mu) reference["mu"] = *cfg.validate.reference_mu;
  validate["reference"] = reference;

  json out;
  out["network"] = network;
  out["times"] = cfg.times;
  out["solver"] = solver;
  out["bounds"] = bounds;
  out["grid"] = grid;
  out["sim"] = sim;
  out["validate"] = validate;
  out["output"] = {{"formats", cfg.output.formats}};
  return out;
}

FluidReference::FluidReference(const NetworkConfig& net, const std::vector<double>& mu) {
  NetworkConfig copy = net;
  copy.mu = mu;
  switch (copy.regime()) {
    case Regime::SingleBottleneck: {
      bottleneck_ = copy.bottleneck_index();
      const std::size_t k = *bottleneck_;
      params_ = FluidParams{copy.lambda(), copy.p[k], copy.mu[k]};
      break;
    }
    case Regime::NoBottleneck:
      break;
    case Regime::MultipleBottlenecks:
      throw ConfigError("network.mu",
                        "the analytic reference needs at most one bottleneck station");
  }
}

double FluidReference::q_bar(double t) const {
  return params_ ? hub_fluid(*params_, t) : 1.0;
}

double FluidReference::q_bar_average(double t0, double t1) const {
  return params_ ? hub_fluid_average(*params_, t0, t1) : 1.0;
}

}  // namespace hubnet
