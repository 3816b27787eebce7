#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "meg/event_index.hpp"
#include "meg/params.hpp"
#include "meg/types.hpp"

namespace meg {

struct ScoreRecord {
  double time = 0.0;
  NodeId source = 0;
  NodeId destination = 0;
  double pvalue = 1.0;
  bool new_edge = false;      // no training events on this edge
  bool tau_infinite = false;  // edge never active under the model; p-value set to 1
};

struct EdgeKs {
  NodeId source = 0;
  NodeId destination = 0;
  std::size_t events = 0;
  double ks = 0.0;
};

struct ScoreReport {
  std::vector<ScoreRecord> records;  // in event order
  double ks = 0.0;                   // over all records; 0 when there are none
  double ks_active = 0.0;            // excluding tau_infinite records
  std::size_t tau_infinite = 0;

  std::vector<double> pvalues() const;
};

/// Scores every test event by p = exp(-(Lambda(t_k) - Lambda(t_{k-1}))), with
/// t_{k-1} the previous event on the same edge (possibly a training event) or
/// the edge start time. Start times come from the training events under
/// spec.tau; with the mle strategy an edge first seen in the test period
/// starts at its first test event. Test events must lie in (train.horizon,
/// test.horizon].
ScoreReport score_events(const Params& params, const ModelSpec& spec, const GraphShape& shape,
                         const EventLog& train, const EventLog& test);

/// In-sample p-values for every event of a log.
ScoreReport score_in_sample(const Params& params, const ModelSpec& spec, const GraphShape& shape,
                            const EventLog& log);

/// One-sample Kolmogorov-Smirnov distance from Uniform(0, 1).
double ks_statistic(std::span<const double> pvalues);

/// Asymptotic p-value of the KS statistic d for a sample of size m.
double ks_pvalue(double d, std::size_t m);

/// KS statistic per scored edge, in (source, destination) order.
std::vector<EdgeKs> per_edge_ks(const ScoreReport& report);

/// (theoretical quantile, empirical quantile) pairs at probabilities
/// (k + 0.5) / points.
std::vector<std::pair<double, double>> qq_points(std::span<const double> pvalues,
                                                 std::size_t points = 1000);

}  // namespace meg
