#include "meg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace meg {
namespace {

// Exponentially decaying excitation sum, stored as its value at `time`.
struct Decaying {
  double value = 0.0;
  double time = 0.0;

  double at(double t, double rate) const {
    return value == 0.0 ? 0.0 : value * std::exp(-rate * (t - time));
  }
  void fire(double t, double rate, bool markov) {
    value = markov ? 1.0 : at(t, rate) + 1.0;
    time = t;
  }
};

class Simulator {
 public:
  Simulator(const Params& p, const TauMatrix& tau, const ModelSpec& spec, const GraphShape& shape)
      : p_(p), spec_(spec), shape_(shape) {
    validate(p, shape, spec);
    if (tau.sources() != shape.sources() || tau.destinations() != shape.destinations()) {
      throw InvalidArgument("tau matrix does not match the graph shape");
    }
    const std::size_t ns = shape.sources();
    const std::size_t nd = shape.destinations();
    for (NodeId i = 0; i < ns; ++i) {
      for (NodeId j = 0; j < nd; ++j) {
        const double start = tau(i, j);
        if (std::isnan(start) || start < 0.0) {
          throw InvalidArgument("edge start times must be non-negative");
        }
        if (std::isfinite(start)) pending_.push_back({start, i, j});
      }
    }
    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const Pending& a, const Pending& b) { return a.start < b.start; });

    if (spec.main_excites()) {
      main_markov_ = spec.main == Memory::markov;
      source_rate_.resize(ns);
      destination_rate_.resize(nd);
      for (std::size_t i = 0; i < ns; ++i) source_rate_[i] = p.source.jump[i] + p.source.decay_offset[i];
      for (std::size_t j = 0; j < nd; ++j) {
        destination_rate_[j] = p.destination.jump[j] + p.destination.decay_offset[j];
      }
      source_state_.resize(ns);
      destination_state_.resize(nd);
      source_now_.resize(ns);
      destination_now_.resize(nd);
    }
    if (spec.interaction_excites()) {
      interaction_markov_ = spec.interaction == Memory::markov;
      latent_state_.resize(shape.pairs() * spec.dimension);
    }
  }

  EventLog run(double horizon, std::size_t target, const SimConfig& cfg) {
    RandomStream rng(cfg.seed, cfg.stream);
    EventLog log;
    double t = 0.0;
    while (log.events.size() < target) {
      while (next_pending_ < pending_.size() && pending_[next_pending_].start <= t) {
        const auto& e = pending_[next_pending_++];
        active_.push_back({e.source, e.destination, baseline(e.source, e.destination)});
      }
      const double activation =
          next_pending_ < pending_.size() ? pending_[next_pending_].start : kInfinity;

      const double bound = total_intensity(t);
      if (!(bound > 0.0)) {
        if (std::isfinite(activation) && activation <= horizon) {
          t = activation;
          continue;
        }
        if (std::isfinite(horizon)) break;
        throw NumericFailure("process has zero intensity and can never reach " +
                             std::to_string(target) + " events");
      }
      const double candidate = t + rng.exponential(bound);
      if (candidate >= activation) {
        // Intensities are memoryless between events: restart at the activation.
        if (activation > horizon) break;
        t = activation;
        continue;
      }
      if (candidate > horizon) break;

      const double u = rng.uniform() * bound;
      refresh_nodes(candidate);
      double cumulative = 0.0;
      std::size_t chosen = active_.size();
      for (std::size_t a = 0; a < active_.size(); ++a) {
        cumulative += edge_intensity(active_[a], candidate);
        if (u < cumulative) {
          chosen = a;
          break;
        }
      }
      t = candidate;
      if (chosen == active_.size()) continue;

      const ActiveEdge& edge = active_[chosen];
      log.events.push_back({t, edge.source, edge.destination});
      fire(edge.source, edge.destination, t);
      if (log.events.size() > cfg.max_events) {
        log.horizon = t;
        throw SimulationTruncated(
            "simulation exceeded max_events=" + std::to_string(cfg.max_events), std::move(log));
      }
    }
    log.horizon = std::isfinite(horizon) ? horizon : (log.events.empty() ? 0.0 : t);
    return log;
  }

 private:
  struct Pending {
    double start;
    NodeId source;
    NodeId destination;
  };
  struct ActiveEdge {
    NodeId source;
    NodeId destination;
    double baseline;
  };

  double baseline(NodeId i, NodeId j) const {
    double b = 0.0;
    if (spec_.has_main()) b += p_.source.base[i] + p_.destination.base[j];
    if (spec_.has_interaction()) {
      for (std::size_t q = 0; q < spec_.dimension; ++q) {
        b += p_.source_factors.base(i, q) * p_.destination_factors.base(j, q);
      }
    }
    return b;
  }

  void refresh_nodes(double t) {
    if (!spec_.main_excites()) return;
    for (std::size_t i = 0; i < source_state_.size(); ++i) {
      source_now_[i] = p_.source.jump[i] * source_state_[i].at(t, source_rate_[i]);
    }
    for (std::size_t j = 0; j < destination_state_.size(); ++j) {
      destination_now_[j] = p_.destination.jump[j] * destination_state_[j].at(t, destination_rate_[j]);
    }
  }

  double latent_rate(NodeId i, NodeId j, std::size_t q) const {
    return (p_.source_factors.jump(i, q) + p_.source_factors.decay_offset(i, q)) *
           (p_.destination_factors.jump(j, q) + p_.destination_factors.decay_offset(j, q));
  }

  double edge_intensity(const ActiveEdge& e, double t) const {
    double rate = e.baseline;
    if (spec_.main_excites()) rate += source_now_[e.source] + destination_now_[e.destination];
    if (spec_.interaction_excites()) {
      const std::size_t d = spec_.dimension;
      const std::size_t base = (e.source * shape_.destinations() + e.destination) * d;
      for (std::size_t q = 0; q < d; ++q) {
        const Decaying& s = latent_state_[base + q];
        if (s.value == 0.0) continue;
        rate += p_.source_factors.jump(e.source, q) * p_.destination_factors.jump(e.destination, q) *
                s.at(t, latent_rate(e.source, e.destination, q));
      }
    }
    return rate;
  }

  double total_intensity(double t) {
    refresh_nodes(t);
    double total = 0.0;
    for (const auto& e : active_) total += edge_intensity(e, t);
    return total;
  }

  void fire(NodeId i, NodeId j, double t) {
    if (spec_.main_excites()) {
      source_state_[i].fire(t, source_rate_[i], main_markov_);
      destination_state_[j].fire(t, destination_rate_[j], main_markov_);
    }
    if (spec_.interaction_excites()) {
      const std::size_t d = spec_.dimension;
      const std::size_t base = (i * shape_.destinations() + j) * d;
      for (std::size_t q = 0; q < d; ++q) {
        latent_state_[base + q].fire(t, latent_rate(i, j, q), interaction_markov_);
      }
    }
  }

  const Params& p_;
  ModelSpec spec_;
  GraphShape shape_;
  std::vector<Pending> pending_;
  std::size_t next_pending_ = 0;
  std::vector<ActiveEdge> active_;
  bool main_markov_ = false;
  bool interaction_markov_ = false;
  std::vector<double> source_rate_;
  std::vector<double> destination_rate_;
  std::vector<Decaying> source_state_;
  std::vector<Decaying> destination_state_;
  std::vector<double> source_now_;
  std::vector<double> destination_now_;
  std::vector<Decaying> latent_state_;
};

}  // namespace

EventLog simulate(const Params& params, const TauMatrix& tau, const ModelSpec& spec,
                  const GraphShape& shape, const SimConfig& cfg) {
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) {
    throw InvalidArgument("simulation horizon must be positive and finite");
  }
  if (cfg.max_events == 0) throw InvalidArgument("max_events must be positive");
  Simulator sim(params, tau, spec, shape);
  return sim.run(cfg.horizon, static_cast<std::size_t>(-1), cfg);
}

EventLog simulate_n_events(const Params& params, const TauMatrix& tau, const ModelSpec& spec,
                           const GraphShape& shape, std::size_t events, const SimConfig& cfg) {
  if (cfg.max_events == 0) throw InvalidArgument("max_events must be positive");
  Simulator sim(params, tau, spec, shape);
  return sim.run(kInfinity, events, cfg);
}

}  // namespace meg
