#include "meg/adam.hpp"

#include <algorithm>
#include <cmath>

#include "meg/random.hpp"

namespace meg {
namespace {

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

Memory markov_version(Memory m) { return m == Memory::hawkes ? Memory::markov : m; }

AdamRun fit_once(const ModelContext& ctx, const Params& start, const AdamConfig& cfg) {
  Params work = start;
  const Objective f = [&](std::span<const double> x, std::span<double> grad) {
    work.assign(x);
    const auto value = evaluate_likelihood(work, ctx, true);
    const auto flat = value.gradient.flatten();
    std::copy(flat.begin(), flat.end(), grad.begin());
    return value.value;
  };
  const auto x0 = start.flatten();
  return adam_maximize(f, x0, cfg);
}

}  // namespace

Params default_init(const EventIndex& index, const ModelSpec& spec, std::uint64_t seed,
                    InitVariant variant) {
  validate(spec);
  const GraphShape& shape = index.shape();
  const double horizon = index.horizon();
  if (!(horizon > 0.0)) throw InvalidArgument("initialisation needs a positive horizon");

  // Per-edge share of each node's activity.
  const auto rates = [&](std::size_t nodes, std::size_t partners, auto times_of) {
    std::vector<double> u(nodes);
    const double scale = static_cast<double>(partners) * horizon;
    for (NodeId k = 0; k < nodes; ++k) {
      const auto n = static_cast<double>(times_of(k).size());
      u[k] = n > 0 ? n / scale : 0.01 / scale;
    }
    return u;
  };
  const auto u_src = rates(shape.sources(), shape.destinations(),
                           [&](NodeId k) { return index.source_times(k); });
  const auto u_dst = rates(shape.destinations(), shape.sources(),
                           [&](NodeId k) { return index.destination_times(k); });

  Params p = Params::filled(shape, spec, 1.0);
  if (spec.has_main()) {
    p.source.base = u_src;
    p.destination.base = u_dst;
    if (spec.main_excites()) {
      p.source.jump = u_src;
      p.destination.jump = u_dst;
      for (std::size_t i = 0; i < u_src.size(); ++i) p.source.decay_offset[i] = 3.0 * u_src[i];
      for (std::size_t j = 0; j < u_dst.size(); ++j) {
        p.destination.decay_offset[j] = 3.0 * u_dst[j];
      }
    }
  }
  if (spec.has_interaction()) {
    const std::size_t d = spec.dimension;
    RandomStream rng(seed, 0x1d17);
    const auto fill = [&](Matrix& m, double value, const std::vector<double>* root) {
      for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t q = 0; q < m.cols(); ++q) {
          const double centre = root != nullptr ? std::sqrt((*root)[r]) : value;
          double x = centre;
          if (d > 1) {
            do {
              x = centre + 2e-5 * rng.normal();
            } while (!(x > 0.0));
          }
          m(r, q) = x;
        }
      }
    };
    const bool sqrt_base = variant == InitVariant::sqrt_baseline;
    fill(p.source_factors.base, 1e-4, sqrt_base ? &u_src : nullptr);
    fill(p.destination_factors.base, 1e-4, sqrt_base ? &u_dst : nullptr);
    if (spec.interaction_excites()) {
      fill(p.source_factors.jump, 1e-4, nullptr);
      fill(p.destination_factors.jump, 1e-4, nullptr);
      fill(p.source_factors.decay_offset, 5e-4, nullptr);
      fill(p.destination_factors.decay_offset, 5e-4, nullptr);
    }
  }
  return p;
}

void adam_step(AdamState& state, std::span<double> x, std::span<const double> gradient,
               const AdamConfig& cfg) {
  if (state.m.size() != x.size()) {
    state.m.assign(x.size(), 0.0);
    state.v.assign(x.size(), 0.0);
    state.step = 0;
  }
  ++state.step;
  const double k = static_cast<double>(state.step);
  const double correct1 = 1.0 - std::pow(cfg.rho1, k);
  const double correct2 = 1.0 - std::pow(cfg.rho2, k);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = gradient[i] * x[i];
    state.m[i] = cfg.rho1 * state.m[i] + (1.0 - cfg.rho1) * g;
    state.v[i] = cfg.rho2 * state.v[i] + (1.0 - cfg.rho2) * g * g;
    const double mhat = state.m[i] / correct1;
    const double vhat = state.v[i] / correct2;
    x[i] *= std::exp(cfg.eta * mhat / (std::sqrt(vhat) + cfg.epsilon));
  }
}

AdamRun adam_maximize(const Objective& f, std::span<const double> x0, const AdamConfig& cfg) {
  if (!(cfg.eta > 0.0) || !(cfg.rho1 > 0.0 && cfg.rho1 < 1.0) ||
      !(cfg.rho2 > 0.0 && cfg.rho2 < 1.0) || !(cfg.epsilon > 0.0)) {
    throw InvalidArgument("Adam needs eta > 0, rho1 and rho2 in (0, 1), and epsilon > 0");
  }
  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> grad(x.size());
  AdamState state;
  AdamRun run;
  run.best_value = -kInfinity;
  std::size_t calm = 0;
  double previous = 0.0;
  for (std::size_t it = 0; it <= cfg.max_iterations; ++it) {
    const double value = f(x, grad);
    if (!std::isfinite(value) || !all_finite(grad)) {
      throw NumericFailure("objective or gradient is not finite at iteration " +
                           std::to_string(it));
    }
    run.trace.push_back(value);
    if (value > run.best_value) {
      run.best_value = value;
      run.best = x;
    }
    if (it > 0) {
      calm = std::abs(value - previous) < cfg.tolerance * (1.0 + std::abs(value)) ? calm + 1 : 0;
      if (calm >= cfg.window) {
        run.converged = true;
        break;
      }
    }
    previous = value;
    if (it == cfg.max_iterations) break;
    adam_step(state, x, grad, cfg);
    run.iterations = it + 1;
  }
  return run;
}

FitReport adam_fit(const ModelContext& ctx, const Params& init, const AdamConfig& cfg) {
  const GraphShape& shape = ctx.index.shape();
  validate(init, shape, ctx.spec);
  if (cfg.restarts == 0) throw InvalidArgument("at least one restart is required");

  FitReport report;
  report.log_likelihood = -kInfinity;
  Params start = init;

  const bool warm = cfg.warm_start &&
                    (ctx.spec.main == Memory::hawkes || ctx.spec.interaction == Memory::hawkes);
  if (warm) {
    ModelSpec markov = ctx.spec;
    markov.main = markov_version(markov.main);
    markov.interaction = markov_version(markov.interaction);
    const ModelContext warm_ctx(ctx.index, ctx.tau, markov, ctx.horizon);
    try {
      Params fitted = init;
      fitted.assign(fit_once(warm_ctx, init, cfg).best);
      start = fitted;
      report.notes.push_back("warm start from markov fit");
    } catch (const NumericFailure& e) {
      report.notes.push_back(std::string("markov warm start failed: ") + e.what());
    }
  }

  RandomStream rng(cfg.seed, 0xada);
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    Params candidate = start;
    if (r > 0) {
      for_each_block(candidate, [&](std::string_view, std::vector<double>& values) {
        for (double& v : values) {
          v = cfg.restart_init == RestartInit::uniform
                  ? rng.uniform(cfg.uniform_low, cfg.uniform_high)
                  : v * std::exp(cfg.jitter_sigma * rng.normal());
        }
      });
    }
    try {
      const AdamRun run = fit_once(ctx, candidate, cfg);
      if (run.best_value > report.log_likelihood) {
        report.log_likelihood = run.best_value;
        report.params = candidate;
        report.params.assign(run.best);
        report.trace = run.trace;
        report.converged = run.converged;
        report.iterations = run.iterations;
        report.best_restart = r;
      }
    } catch (const NumericFailure& e) {
      ++report.failed_restarts;
      report.notes.push_back("restart " + std::to_string(r) + " failed: " + e.what());
    }
  }
  if (report.failed_restarts == cfg.restarts) {
    throw NumericFailure("all " + std::to_string(cfg.restarts) + " restarts failed");
  }
  return report;
}

}  // namespace meg
