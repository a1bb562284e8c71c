// hubnet: bottleneck analysis of closed hub/satellite networks.
//
//   hubnet <solve|bounds|fluid|simulate|validate|metrics> --config cfg.json
//          [--seed U64] [--out DIR] [--format csv|json] [--workers INT]

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "hubnet/commands.hpp"
#include "hubnet/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bottleneck analysis of closed hub/satellite queueing networks"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::optional<int> workers;

  const char* blurbs[] = {
      "least roots phi_j(t) of the satellite fixed-point equation",
      "Rolski bounds and continuity envelopes per (t, station)",
      "fluid hub occupancy curve q_bar(t)",
      "replicated discrete-event simulation",
      "simulation against the fluid limit and queue-length laws",
      "closeness of the hub service law to the exponential",
  };
  std::size_t i = 0;
  for (const auto& name : hubnet::command_names()) {
    CLI::App* sub = app.add_subcommand(name, blurbs[i++]);
    sub->add_option("--config", config_path, "experiment JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "root seed (overrides sim.base_seed)");
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--format", format, "write only this format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", workers, "replication threads (overrides sim.workers)")
        ->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hubnet::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    hubnet::ExperimentConfig cfg = hubnet::load_config(config_path);
    if (seed) cfg.sim.base_seed = *seed;
    if (out_dir) cfg.output.dir = *out_dir;
    if (format) cfg.output.formats = {*format};
    if (workers) cfg.sim.workers = *workers;
    return hubnet::run_command(command, cfg, std::cerr);
  } catch (const hubnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return hubnet::kExitConfig;
  } catch (const hubnet::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return hubnet::kExitConfig;
  } catch (const hubnet::DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return hubnet::kExitConfig;
  } catch (const hubnet::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return hubnet::kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hubnet::kExitNumeric;
  }
}
