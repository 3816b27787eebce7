#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "meg/event_index.hpp"
#include "meg/excitation.hpp"
#include "meg/params.hpp"
#include "meg/types.hpp"

namespace meg {

/// Borrowed view of everything a likelihood evaluation needs besides the
/// parameters. The referenced index and tau matrix must outlive the context.
struct ModelContext {
  const EventIndex& index;
  const TauMatrix& tau;
  ModelSpec spec;
  double horizon;

  ModelContext(const EventIndex& index_, const TauMatrix& tau_, const ModelSpec& spec_)
      : index(index_), tau(tau_), spec(spec_), horizon(index_.horizon()) {}
  ModelContext(const EventIndex& index_, const TauMatrix& tau_, const ModelSpec& spec_,
               double horizon_)
      : index(index_), tau(tau_), spec(spec_), horizon(horizon_) {}
};

enum class TrackKind { source, destination, latent };

/// One excitation component of an edge intensity: jump * psi(t) where psi
/// decays at `rate`.
struct ExcitationTrack {
  TrackKind kind;
  std::size_t dimension;  // latent dimension q; 0 for node tracks
  double jump;
  double rate;
  ExcitationCursor cursor;
};

/// Excitation sums of one edge at the scanner's current time: the source-node,
/// destination-node, and per-dimension edge accumulators. Empty when the
/// corresponding component does not excite.
struct RecursionState {
  double source = 0.0;
  double destination = 0.0;
  std::vector<double> latent;
};

/// Walks one edge's events in time order, maintaining the excitation sums
/// recursively. Construction positions the scanner at the edge start time.
class EdgeScanner {
 public:
  struct Step {
    double time;
    double intensity;  // left limit at the event
    double increment;  // compensator growth since the previous checkpoint
  };

  EdgeScanner(const Params& params, const ModelContext& ctx, NodeId source, NodeId destination);

  bool active() const noexcept { return active_; }
  double start() const noexcept { return start_; }
  double now() const noexcept { return now_; }
  double baseline() const noexcept { return baseline_; }

  std::size_t size() const noexcept { return times_.size(); }
  std::size_t position() const noexcept { return position_; }
  bool done() const noexcept { return position_ >= times_.size(); }

  /// Moves to the next edge event.
  Step next();

  /// Compensator growth from the previous checkpoint up to t.
  double advance_to(double t);

  /// Intensity at the current time (left limit).
  double intensity() const;

  /// Compensator accumulated since the edge start.
  double compensator() const;

  RecursionState state() const;
  std::span<const ExcitationTrack> tracks() const noexcept { return tracks_; }

 private:
  void require_active() const;

  NodeId source_;
  NodeId destination_;
  bool active_ = false;
  double start_ = kInfinity;
  double now_ = 0.0;
  double baseline_ = 0.0;
  std::span<const double> times_;
  std::size_t position_ = 0;
  std::vector<ExcitationTrack> tracks_;
};

/// Conditional intensity of edge (i, j) at t (left limit). Throws
/// InvalidArgument when t precedes the edge start time.
double intensity(const Params& params, const ModelContext& ctx, NodeId source,
                 NodeId destination, double t);

/// Integrated intensity of edge (i, j) from its start time up to t; zero for
/// inactive edges and for t before the start.
double compensator(const Params& params, const ModelContext& ctx, NodeId source,
                   NodeId destination, double t);

/// Increment of the compensator between edge events k-1 and k (k = 0 measures
/// from the edge start time).
double compensator_increment(const Params& params, const ModelContext& ctx, NodeId source,
                             NodeId destination, std::size_t k);

struct EdgeLikelihood {
  double sum_log_intensity = 0.0;
  double compensator = 0.0;
  double value() const noexcept { return sum_log_intensity - compensator; }
};

/// The contribution of a single edge, over [tau_ij, horizon].
EdgeLikelihood edge_log_likelihood(const Params& params, const ModelContext& ctx,
                                   NodeId source, NodeId destination);

/// Exact log-likelihood of all edges with a finite start time.
double log_likelihood(const Params& params, const ModelContext& ctx);

struct LikelihoodValue {
  double value = 0.0;
  Params gradient;  // same shape as the parameters; empty unless requested
};

/// Log-likelihood and, optionally, its gradient with respect to every
/// parameter, from one recursive pass.
LikelihoodValue evaluate_likelihood(const Params& params, const ModelContext& ctx,
                                    bool with_gradient);

}  // namespace meg
