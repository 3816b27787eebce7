#include "meg/likelihood.hpp"

#include <cmath>
#include <map>
#include <string>

namespace meg {
namespace {

std::string edge_name(NodeId i, NodeId j) {
  return "edge (" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

double inner_product(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) s += a[q] * b[q];
  return s;
}

struct NodeIntegral {
  double integral = 0.0;
  double derivative = 0.0;
};

// Integral of a node's unit-jump excitation over [start, horizon], memoised
// per start time (most edges without events share start 0).
class NodeIntegralCache {
 public:
  NodeIntegralCache(std::size_t nodes, bool markov, double lag, double horizon)
      : cache_(nodes), markov_(markov), lag_(lag), horizon_(horizon) {}

  const NodeIntegral& get(NodeId node, std::span<const double> times, double rate, double start) {
    auto& slot = cache_[node];
    const auto it = slot.find(start);
    if (it != slot.end()) return it->second;
    ExcitationCursor cursor(times, rate, markov_, lag_);
    cursor.seek(start);
    cursor.advance(horizon_);
    return slot.emplace(start, NodeIntegral{cursor.integral(), cursor.integral_derivative()})
        .first->second;
  }

 private:
  std::vector<std::map<double, NodeIntegral>> cache_;
  bool markov_;
  double lag_;
  double horizon_;
};

// Per-track score components: d/d(jump) and d/d(rate) of the edge likelihood.
struct TrackScore {
  double jump = 0.0;
  double rate = 0.0;
};

void add_baseline_gradient(Params& grad, const Params& p, const ModelSpec& spec, NodeId i,
                           NodeId j, double score) {
  if (spec.has_main()) {
    grad.source.base[i] += score;
    grad.destination.base[j] += score;
  }
  if (spec.has_interaction()) {
    auto gi = grad.source_factors.base.row(i);
    auto gj = grad.destination_factors.base.row(j);
    const auto pi = p.source_factors.base.row(i);
    const auto pj = p.destination_factors.base.row(j);
    for (std::size_t q = 0; q < spec.dimension; ++q) {
      gi[q] += score * pj[q];
      gj[q] += score * pi[q];
    }
  }
}

void add_track_gradient(Params& grad, const Params& p, NodeId i, NodeId j,
                        const ExcitationTrack& track, const TrackScore& score) {
  switch (track.kind) {
    case TrackKind::source:
      grad.source.jump[i] += score.jump + score.rate;
      grad.source.decay_offset[i] += score.rate;
      break;
    case TrackKind::destination:
      grad.destination.jump[j] += score.jump + score.rate;
      grad.destination.decay_offset[j] += score.rate;
      break;
    case TrackKind::latent: {
      const std::size_t q = track.dimension;
      const double nu_i = p.source_factors.jump(i, q);
      const double nu_j = p.destination_factors.jump(j, q);
      const double c_i = nu_i + p.source_factors.decay_offset(i, q);
      const double c_j = nu_j + p.destination_factors.decay_offset(j, q);
      grad.source_factors.jump(i, q) += score.jump * nu_j + score.rate * c_j;
      grad.source_factors.decay_offset(i, q) += score.rate * c_j;
      grad.destination_factors.jump(j, q) += score.jump * nu_i + score.rate * c_i;
      grad.destination_factors.decay_offset(j, q) += score.rate * c_i;
      break;
    }
  }
}

}  // namespace

EdgeScanner::EdgeScanner(const Params& p, const ModelContext& ctx, NodeId i, NodeId j)
    : source_(i), destination_(j) {
  const ModelSpec& spec = ctx.spec;
  const EventIndex& index = ctx.index;
  if (i >= index.shape().sources() || j >= index.shape().destinations()) {
    throw InvalidArgument(edge_name(i, j) + " is outside the graph");
  }
  start_ = ctx.tau(i, j);
  active_ = std::isfinite(start_);
  if (const auto e = index.find_edge(i, j)) times_ = index.edges()[*e].times;

  if (spec.has_main()) baseline_ += p.source.base[i] + p.destination.base[j];
  if (spec.has_interaction()) {
    baseline_ += inner_product(p.source_factors.base.row(i), p.destination_factors.base.row(j));
  }

  const double lag = index.tie_offset();
  if (spec.main_excites()) {
    const bool markov = spec.main == Memory::markov;
    const double mu_i = p.source.jump[i];
    const double mu_j = p.destination.jump[j];
    const double rate_i = mu_i + p.source.decay_offset[i];
    const double rate_j = mu_j + p.destination.decay_offset[j];
    tracks_.push_back({TrackKind::source, 0, mu_i, rate_i,
                       ExcitationCursor(index.source_times(i), rate_i, markov, lag)});
    tracks_.push_back({TrackKind::destination, 0, mu_j, rate_j,
                       ExcitationCursor(index.destination_times(j), rate_j, markov, lag)});
  }
  if (spec.interaction_excites()) {
    const bool markov = spec.interaction == Memory::markov;
    for (std::size_t q = 0; q < spec.dimension; ++q) {
      const double nu_i = p.source_factors.jump(i, q);
      const double nu_j = p.destination_factors.jump(j, q);
      const double rate =
          (nu_i + p.source_factors.decay_offset(i, q)) *
          (nu_j + p.destination_factors.decay_offset(j, q));
      tracks_.push_back(
          {TrackKind::latent, q, nu_i * nu_j, rate, ExcitationCursor(times_, rate, markov, lag)});
    }
  }

  if (active_) {
    now_ = start_;
    for (auto& track : tracks_) track.cursor.seek(start_);
  }
}

void EdgeScanner::require_active() const {
  if (!active_) {
    throw InvalidArgument(edge_name(source_, destination_) + " never becomes active");
  }
}

EdgeScanner::Step EdgeScanner::next() {
  require_active();
  if (done()) throw InvalidArgument(edge_name(source_, destination_) + ": no events left");
  const double t = times_[position_];
  if (t < start_) {
    throw InvalidArgument(edge_name(source_, destination_) + ": event at " + std::to_string(t) +
                          " precedes the edge start " + std::to_string(start_));
  }
  const double increment = advance_to(t);
  ++position_;
  return Step{t, intensity(), increment};
}

double EdgeScanner::advance_to(double t) {
  require_active();
  if (t < now_) {
    throw InvalidArgument(edge_name(source_, destination_) + ": cannot move back in time");
  }
  double increment = baseline_ * (t - now_);
  for (auto& track : tracks_) {
    track.cursor.advance(t);
    increment += track.jump * track.cursor.take_segment();
  }
  now_ = t;
  return increment;
}

double EdgeScanner::intensity() const {
  double rate = baseline_;
  for (const auto& track : tracks_) rate += track.jump * track.cursor.value();
  return rate;
}

double EdgeScanner::compensator() const {
  if (!active_) return 0.0;
  double total = baseline_ * (now_ - start_);
  for (const auto& track : tracks_) total += track.jump * track.cursor.integral();
  return total;
}

RecursionState EdgeScanner::state() const {
  RecursionState s;
  for (const auto& track : tracks_) {
    switch (track.kind) {
      case TrackKind::source: s.source = track.cursor.value(); break;
      case TrackKind::destination: s.destination = track.cursor.value(); break;
      case TrackKind::latent: s.latent.push_back(track.cursor.value()); break;
    }
  }
  return s;
}

double intensity(const Params& params, const ModelContext& ctx, NodeId i, NodeId j, double t) {
  EdgeScanner scanner(params, ctx, i, j);
  if (!scanner.active() || t < scanner.start()) {
    throw InvalidArgument("intensity of " + edge_name(i, j) + " is undefined at t=" +
                          std::to_string(t) + " before its start time");
  }
  scanner.advance_to(t);
  return scanner.intensity();
}

double compensator(const Params& params, const ModelContext& ctx, NodeId i, NodeId j, double t) {
  EdgeScanner scanner(params, ctx, i, j);
  if (!scanner.active() || t <= scanner.start()) return 0.0;
  return scanner.advance_to(t);
}

double compensator_increment(const Params& params, const ModelContext& ctx, NodeId i, NodeId j,
                             std::size_t k) {
  EdgeScanner scanner(params, ctx, i, j);
  if (k >= scanner.size()) {
    throw InvalidArgument(edge_name(i, j) + ": event index " + std::to_string(k) +
                          " out of range");
  }
  if (!scanner.active()) return 0.0;
  EdgeScanner::Step step{};
  for (std::size_t h = 0; h <= k; ++h) step = scanner.next();
  return step.increment;
}

EdgeLikelihood edge_log_likelihood(const Params& params, const ModelContext& ctx, NodeId i,
                                   NodeId j) {
  EdgeScanner scanner(params, ctx, i, j);
  EdgeLikelihood out;
  if (!scanner.active() || scanner.start() > ctx.horizon) return out;
  CompensatedSum logs;
  while (!scanner.done()) {
    const auto step = scanner.next();
    if (!(step.intensity > 0.0) || !std::isfinite(step.intensity)) {
      throw NumericFailure("non-positive or non-finite intensity on " + edge_name(i, j));
    }
    logs.add(std::log(step.intensity));
  }
  scanner.advance_to(ctx.horizon);
  out.sum_log_intensity = logs.value();
  out.compensator = scanner.compensator();
  return out;
}

double log_likelihood(const Params& params, const ModelContext& ctx) {
  return evaluate_likelihood(params, ctx, false).value;
}

LikelihoodValue evaluate_likelihood(const Params& p, const ModelContext& ctx, bool with_gradient) {
  const ModelSpec& spec = ctx.spec;
  const EventIndex& index = ctx.index;
  const GraphShape& shape = index.shape();
  const double horizon = ctx.horizon;

  LikelihoodValue result;
  if (with_gradient) result.gradient = Params::filled(shape, spec, 0.0);
  Params& grad = result.gradient;
  CompensatedSum total;

  std::vector<TrackScore> scores;
  for (const EdgeEvents& edge : index.edges()) {
    const NodeId i = edge.source;
    const NodeId j = edge.destination;
    EdgeScanner scanner(p, ctx, i, j);
    if (!scanner.active() || scanner.start() > horizon) continue;

    const auto tracks = scanner.tracks();
    scores.assign(tracks.size(), TrackScore{});
    CompensatedSum logs;
    double baseline_score = 0.0;
    while (!scanner.done()) {
      const auto step = scanner.next();
      if (!(step.intensity > 0.0) || !std::isfinite(step.intensity)) {
        throw NumericFailure("non-positive or non-finite intensity on " + edge_name(i, j));
      }
      logs.add(std::log(step.intensity));
      if (with_gradient) {
        const double inv = 1.0 / step.intensity;
        baseline_score += inv;
        for (std::size_t t = 0; t < tracks.size(); ++t) {
          scores[t].jump += tracks[t].cursor.value() * inv;
          scores[t].rate += tracks[t].cursor.derivative() * inv;
        }
      }
    }
    scanner.advance_to(horizon);
    const double value = logs.value() - scanner.compensator();
    if (!std::isfinite(value)) throw NumericFailure("non-finite likelihood on " + edge_name(i, j));
    total.add(value);

    if (with_gradient) {
      add_baseline_gradient(grad, p, spec, i, j, baseline_score - (horizon - scanner.start()));
      for (std::size_t t = 0; t < tracks.size(); ++t) {
        const auto& track = tracks[t];
        const TrackScore s{scores[t].jump - track.cursor.integral(),
                           track.jump * (scores[t].rate - track.cursor.integral_derivative())};
        add_track_gradient(grad, p, i, j, track, s);
      }
    }
  }

  // Edges without events: baseline exposure plus node excitation integrals.
  const bool markov = spec.main == Memory::markov;
  const double lag = index.tie_offset();
  NodeIntegralCache source_cache(shape.sources(), markov, lag, horizon);
  NodeIntegralCache destination_cache(shape.destinations(), markov, lag, horizon);
  const auto edges = index.edges();
  std::size_t cursor = 0;
  for (NodeId i = 0; i < shape.sources(); ++i) {
    for (NodeId j = 0; j < shape.destinations(); ++j) {
      while (cursor < edges.size() &&
             (edges[cursor].source < i ||
              (edges[cursor].source == i && edges[cursor].destination < j))) {
        ++cursor;
      }
      if (cursor < edges.size() && edges[cursor].source == i && edges[cursor].destination == j) {
        continue;
      }
      const double start = ctx.tau(i, j);
      if (!(start < horizon)) continue;

      double baseline = 0.0;
      if (spec.has_main()) baseline += p.source.base[i] + p.destination.base[j];
      if (spec.has_interaction()) {
        baseline +=
            inner_product(p.source_factors.base.row(i), p.destination_factors.base.row(j));
      }
      double comp = baseline * (horizon - start);
      const NodeIntegral* src = nullptr;
      const NodeIntegral* dst = nullptr;
      if (spec.main_excites()) {
        src = &source_cache.get(i, index.source_times(i),
                                p.source.jump[i] + p.source.decay_offset[i], start);
        dst = &destination_cache.get(j, index.destination_times(j),
                                     p.destination.jump[j] + p.destination.decay_offset[j],
                                     start);
        comp += p.source.jump[i] * src->integral + p.destination.jump[j] * dst->integral;
      }
      total.add(-comp);

      if (with_gradient) {
        add_baseline_gradient(grad, p, spec, i, j, -(horizon - start));
        if (src != nullptr) {
          const double rate_score_i = -p.source.jump[i] * src->derivative;
          grad.source.jump[i] += -src->integral + rate_score_i;
          grad.source.decay_offset[i] += rate_score_i;
          const double rate_score_j = -p.destination.jump[j] * dst->derivative;
          grad.destination.jump[j] += -dst->integral + rate_score_j;
          grad.destination.decay_offset[j] += rate_score_j;
        }
      }
    }
  }

  result.value = total.value();
  if (!std::isfinite(result.value)) throw NumericFailure("log-likelihood is not finite");
  return result;
}

}  // namespace meg
