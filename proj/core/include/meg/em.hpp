#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "meg/adam.hpp"
#include "meg/likelihood.hpp"
#include "meg/params.hpp"

namespace meg {

/// Node effects as baseline, ratio jump / (jump + offset) in (0, 1), and
/// decay rate jump + offset.
struct TildeNodeEffects {
  std::vector<double> base;
  std::vector<double> ratio;
  std::vector<double> rate;
};

/// Latent factors as baseline, ratio nu / (nu + theta), and nu + theta.
struct TildeLatentFactors {
  Matrix base;
  Matrix ratio;
  Matrix rate;
};

struct TildeParams {
  TildeNodeEffects source;
  TildeNodeEffects destination;
  TildeLatentFactors source_factors;
  TildeLatentFactors destination_factors;
};

TildeParams to_tilde(const Params& params);
Params from_tilde(const TildeParams& tilde);

/// Branching probabilities of one event: background shares and, per parent
/// event, the share of each excitation kernel. Parents are indexed by their
/// position in the source node, destination node, and edge sequences.
struct EventResponsibilities {
  double source_background = 0.0;       // alpha_i / lambda
  double destination_background = 0.0;  // beta_j / lambda
  std::vector<double> latent_background;  // gamma_iq gamma'_jq / lambda
  std::vector<double> source_parents;
  std::vector<double> destination_parents;
  std::vector<std::vector<double>> latent_parents;  // [q][k]

  double total() const;
};

/// Responsibilities of the k-th event on edge (i, j), by direct evaluation.
EventResponsibilities event_responsibilities(const Params& params, const ModelContext& ctx,
                                             NodeId source, NodeId destination, std::size_t k);

/// Expected branching counts summed per parameter block. For every kernel,
/// `mass` is the summed responsibility and `age` the responsibility-weighted
/// time since the parent.
struct EmStatistics {
  struct Node {
    double background = 0.0;
    double mass = 0.0;
    double age = 0.0;
  };
  struct Edge {
    NodeId source = 0;
    NodeId destination = 0;
    std::vector<double> background;  // per dimension
    std::vector<double> mass;
    std::vector<double> age;
  };
  std::vector<Node> source;
  std::vector<Node> destination;
  std::vector<Edge> edges;  // edges with events, in index order
};

/// E-step: streams over edges once; per-event responsibilities are never
/// stored. Requires every present component to be hawkes.
EmStatistics e_step(const TildeParams& tilde, const ModelContext& ctx);

/// M-step: closed-form baselines and ratios, fixed-point decay rates, sources
/// before destinations. Blocks without responsibility mass keep their value
/// and are listed in `held`.
TildeParams m_step(const EmStatistics& stats, const TildeParams& tilde, const ModelContext& ctx,
                   std::vector<std::string>* held = nullptr);

struct EmConfig {
  std::size_t max_iterations = 1000;
  double tolerance = 1e-8;  // on |change in log L| / (1 + |log L|)
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  double uniform_low = 0.1;  // later restarts draw every entry uniformly
  double uniform_high = 1.0;
};

/// EM from `init` (restart 0) and random restarts; keeps the best run.
FitReport em_fit(const ModelContext& ctx, const Params& init, const EmConfig& cfg);

}  // namespace meg
