#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "meg/adam.hpp"
#include "meg/em.hpp"
#include "meg/event_index.hpp"
#include "meg/score.hpp"
#include "meg/simulate.hpp"

namespace meg::cli {
namespace {

namespace fs = std::filesystem;

std::string output_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  return out;
}

Dataset load_events(const RunConfig& cfg) {
  if (cfg.input.empty()) throw InvalidArgument("no input event file configured");
  IngestOptions options;
  options.bipartite = cfg.bipartite;
  options.tie_offset = cfg.tie_offset;
  options.horizon = cfg.horizon;
  return ingest_file(cfg.input, options);
}

void report_dataset(const Dataset& data, std::ostream& log) {
  log << "events: " << data.log.events.size() << '\n';
  log << "duplicates_removed: " << data.duplicates << '\n';
  log << "sources: " << data.shape.sources() << '\n';
  log << "destinations: " << data.shape.destinations() << '\n';
  log << "horizon: " << format_double(data.log.horizon) << '\n';
}

SplitResult split_dataset(const RunConfig& cfg, const Dataset& data, std::ostream& log) {
  SplitResult s = split(data.log, *cfg.split);
  log << "train_events: " << s.train.events.size() << '\n';
  log << "test_events: " << s.test.events.size() << '\n';
  log << "train_edges: " << s.train_edges << '\n';
  log << "test_edges: " << s.test_edges << '\n';
  log << "new_edges: " << s.new_edges << '\n';
  for (const auto& w : s.warnings) log << "warning: " << w << '\n';
  return s;
}

FitReport fit_log(const RunConfig& cfg, const EventLog& train, const GraphShape& shape) {
  const EventIndex index = build_event_index(train, shape);
  const TauMatrix tau = estimate_tau(index, cfg.spec.tau);
  const ModelContext ctx(index, tau, cfg.spec);
  const Params init = default_init(index, cfg.spec, cfg.seed, cfg.init);
  if (cfg.method == FitMethod::em) return em_fit(ctx, init, cfg.em);
  return adam_fit(ctx, init, cfg.adam);
}

void write_fit(const RunConfig& cfg, const FitReport& fit, const Dataset& data,
               std::ostream& log) {
  ModelFile model{data.shape, cfg.spec, fit.params, data.sources, data.destinations};
  const std::string params_path = output_path(cfg, "params.txt");
  write_model_file(params_path, model);

  auto trace = open_output(output_path(cfg, "trace.csv"));
  trace << "iteration,log_likelihood\n";
  for (std::size_t k = 0; k < fit.trace.size(); ++k) {
    trace << k << ',' << format_double(fit.trace[k]) << '\n';
  }

  auto summary = open_output(output_path(cfg, "fit_summary.txt"));
  for (std::ostream* out : {static_cast<std::ostream*>(&summary), &log}) {
    *out << "method: " << (cfg.method == FitMethod::em ? "em" : "adam") << '\n';
    *out << "log_likelihood: " << format_double(fit.log_likelihood) << '\n';
    *out << "converged: " << (fit.converged ? "true" : "false") << '\n';
    *out << "iterations: " << fit.iterations << '\n';
    *out << "best_restart: " << fit.best_restart << '\n';
    *out << "failed_restarts: " << fit.failed_restarts << '\n';
    for (const auto& note : fit.notes) *out << "note: " << note << '\n';
  }
  log << "params: " << params_path << '\n';
}

void write_scores(const RunConfig& cfg, const ScoreReport& report, const Dataset& data,
                  const std::string& suffix) {
  auto scores = open_output(output_path(cfg, "scores" + suffix + ".csv"));
  scores << "time,source,destination,pvalue,new_edge\n";
  for (const auto& r : report.records) {
    scores << format_double(r.time) << ',' << data.sources[r.source] << ','
           << data.destinations[r.destination] << ',' << format_double(r.pvalue) << ','
           << (r.new_edge ? 1 : 0) << '\n';
  }
  auto edges = open_output(output_path(cfg, "per_edge_ks" + suffix + ".csv"));
  edges << "source,destination,events,ks\n";
  for (const auto& e : per_edge_ks(report)) {
    edges << data.sources[e.source] << ',' << data.destinations[e.destination] << ','
          << e.events << ',' << format_double(e.ks) << '\n';
  }
  if (report.records.empty()) return;
  auto qq = open_output(output_path(cfg, "qq" + suffix + ".csv"));
  qq << "theoretical,empirical\n";
  for (const auto& [x, y] : qq_points(report.pvalues())) {
    qq << format_double(x) << ',' << format_double(y) << '\n';
  }
}

void summarise(std::ostream& out, const std::string& prefix, const ScoreReport& report) {
  out << prefix << "events: " << report.records.size() << '\n';
  out << prefix << "ks: " << format_double(report.ks) << '\n';
  if (!report.records.empty()) {
    out << prefix << "ks_pvalue: " << format_double(ks_pvalue(report.ks, report.records.size()))
        << '\n';
  }
  out << prefix << "tau_infinite: " << report.tau_infinite << '\n';
  out << prefix << "ks_active: " << format_double(report.ks_active) << '\n';
}

}  // namespace

void run_simulate(const RunConfig& cfg, std::ostream& log) {
  if (cfg.params.empty()) throw InvalidArgument("simulate needs a parameter file ('params')");
  const ModelFile model = read_model_file(cfg.params);
  TauMatrix tau(model.shape, 0.0);
  if (!model.shape.is_bipartite() && !cfg.simulate.self_loops) {
    for (NodeId i = 0; i < model.shape.sources(); ++i) tau(i, i) = kInfinity;
  }
  SimConfig sim;
  sim.seed = cfg.seed;
  sim.max_events = cfg.simulate.max_events;
  EventLog events;
  if (cfg.simulate.events) {
    events = simulate_n_events(model.params, tau, model.spec, model.shape, *cfg.simulate.events,
                               sim);
  } else {
    const auto horizon = cfg.simulate.horizon ? cfg.simulate.horizon : cfg.horizon;
    if (!horizon) throw InvalidArgument("simulate needs simulate.horizon or simulate.events");
    sim.horizon = *horizon;
    events = simulate(model.params, tau, model.spec, model.shape, sim);
  }
  const std::string path = output_path(cfg, "events.csv");
  auto out = open_output(path);
  write_events(out, events, model.shape);
  log << "events: " << events.events.size() << '\n';
  log << "horizon: " << format_double(events.horizon) << '\n';
  log << "output: " << path << '\n';
}

void run_fit(const RunConfig& cfg, std::ostream& log) {
  const Dataset data = load_events(cfg);
  report_dataset(data, log);
  EventLog train = data.log;
  if (cfg.split) train = split_dataset(cfg, data, log).train;
  const FitReport fit = fit_log(cfg, train, data.shape);
  write_fit(cfg, fit, data, log);
}

void run_score(const RunConfig& cfg, std::ostream& log) {
  if (cfg.params.empty()) throw InvalidArgument("score needs a parameter file ('params')");
  const Dataset data = load_events(cfg);
  report_dataset(data, log);
  const ModelFile model = read_model_file(cfg.params);
  if (!(model.shape == data.shape)) {
    throw InvalidArgument("parameter file graph does not match the event data");
  }
  ScoreReport report;
  if (cfg.split) {
    const SplitResult s = split_dataset(cfg, data, log);
    report = score_events(model.params, model.spec, data.shape, s.train, s.test);
  } else {
    report = score_in_sample(model.params, model.spec, data.shape, data.log);
  }
  write_scores(cfg, report, data, "");
  auto summary = open_output(output_path(cfg, "ks_summary.txt"));
  summarise(summary, "", report);
  summarise(log, "", report);
}

void run_evaluate(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.split) throw InvalidArgument("evaluate needs a split time");
  const Dataset data = load_events(cfg);
  report_dataset(data, log);
  const SplitResult s = split_dataset(cfg, data, log);
  const FitReport fit = fit_log(cfg, s.train, data.shape);
  write_fit(cfg, fit, data, log);

  const ScoreReport train = score_in_sample(fit.params, cfg.spec, data.shape, s.train);
  const ScoreReport test = score_events(fit.params, cfg.spec, data.shape, s.train, s.test);
  write_scores(cfg, train, data, "_train");
  write_scores(cfg, test, data, "_test");
  auto summary = open_output(output_path(cfg, "ks_summary.txt"));
  for (std::ostream* out : {static_cast<std::ostream*>(&summary), &log}) {
    summarise(*out, "train_", train);
    summarise(*out, "test_", test);
  }
}

void run(const std::string& command, const RunConfig& cfg, std::ostream& log) {
  if (command == "simulate") return run_simulate(cfg, log);
  if (command == "fit") return run_fit(cfg, log);
  if (command == "score") return run_score(cfg, log);
  if (command == "evaluate") return run_evaluate(cfg, log);
  throw InvalidArgument("unknown command '" + command + "'");
}

}  // namespace meg::cli
