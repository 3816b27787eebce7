#include <iostream>
#include <utility>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "json.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> input;
  std::optional<std::string> params;
  std::optional<std::uint64_t> seed;
  std::optional<double> eta;
  std::optional<std::string> method;
  std::optional<std::string> tau;
  std::optional<std::size_t> dimension;
  std::optional<std::string> main_effects;
  std::optional<std::string> interaction;
  std::optional<double> split;
  std::optional<double> dt;
  std::optional<std::string> out;
  bool reproducible = false;
};

void add_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config, "JSON run configuration");
  cmd.add_option("--input", o.input, "event CSV");
  cmd.add_option("--params", o.params, "parameter file");
  cmd.add_option("--seed", o.seed, "random seed");
  cmd.add_option("--eta", o.eta, "Adam step size");
  cmd.add_option("--method", o.method, "em or adam");
  cmd.add_option("--tau", o.tau, "mle, zero or adjacency");
  cmd.add_option("--d", o.dimension, "interaction dimension");
  cmd.add_option("--main", o.main_effects, "absent, poisson, markov or hawkes");
  cmd.add_option("--interaction", o.interaction, "absent, poisson, markov or hawkes");
  cmd.add_option("--split", o.split, "train/test split time in seconds");
  cmd.add_option("--dt", o.dt, "tie offset in seconds");
  cmd.add_option("--out", o.out, "output directory");
  cmd.add_flag("--reproducible", o.reproducible, "fixed-order reductions");
}

meg::RunConfig build_config(const Overrides& o) {
  meg::RunConfig cfg = o.config.empty() ? meg::RunConfig{} : meg::read_run_config_file(o.config);
  if (o.input) cfg.input = *o.input;
  if (o.params) cfg.params = *o.params;
  if (o.seed) cfg.seed = cfg.adam.seed = cfg.em.seed = *o.seed;
  if (o.eta) cfg.adam.eta = *o.eta;
  if (o.method) cfg.method = meg::parse_fit_method(*o.method);
  if (o.tau) cfg.spec.tau = meg::parse_tau_strategy(*o.tau);
  if (o.dimension) cfg.spec.dimension = *o.dimension;
  if (o.main_effects) cfg.spec.main = meg::parse_memory(*o.main_effects);
  if (o.interaction) cfg.spec.interaction = meg::parse_memory(*o.interaction);
  if (o.split) cfg.split = *o.split;
  if (o.dt) cfg.tie_offset = *o.dt;
  if (o.out) cfg.output_dir = *o.out;
  if (o.reproducible) cfg.reproducible = true;
  meg::validate(cfg.spec);
  return cfg;
}

void error_record(const std::string& kind, const std::string& message) {
  nlohmann::json record{{"error", kind}, {"message", message}};
  std::cerr << record.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mutually exciting point-process graphs: simulate, fit, score, evaluate"};
  app.require_subcommand(1);
  Overrides overrides;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "simulate events from a parameter file"},
      {"fit", "fit a model to an event CSV"},
      {"score", "time-rescaling p-values and KS scores"},
      {"evaluate", "fit on the training period, score training and test periods"},
  };
  for (const auto& [name, help] : commands) add_options(*app.add_subcommand(name, help), overrides);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    meg::cli::run(command, build_config(overrides), std::cout);
  } catch (const meg::Error& e) {
    error_record(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_record("internal", e.what());
    return 1;
  }
  return 0;
}
