#include "meg/score.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "meg/likelihood.hpp"

namespace meg {
namespace {

ScoreReport score_index(const Params& params, const ModelSpec& spec, const EventIndex& index,
                        const TauMatrix& tau, const EventIndex* train,
                        std::size_t first_scored) {
  const ModelContext ctx(index, tau, spec);
  ScoreReport report;
  report.records.resize(index.event_count() - first_scored);
  for (const EdgeEvents& edge : index.edges()) {
    const bool is_new = train != nullptr && !train->adjacent(edge.source, edge.destination);
    EdgeScanner scanner(params, ctx, edge.source, edge.destination);
    for (std::size_t k = 0; k < edge.times.size(); ++k) {
      const std::size_t id = edge.event_ids[k];
      double p = 1.0;
      if (scanner.active()) {
        const double increment = scanner.next().increment;
        p = std::exp(-increment);
      }
      if (id < first_scored) continue;
      ScoreRecord& r = report.records[id - first_scored];
      r.time = edge.times[k];
      r.source = edge.source;
      r.destination = edge.destination;
      r.pvalue = p;
      r.new_edge = is_new;
      r.tau_infinite = !scanner.active();
    }
  }
  std::vector<double> all;
  std::vector<double> active;
  for (const auto& r : report.records) {
    all.push_back(r.pvalue);
    if (r.tau_infinite) {
      ++report.tau_infinite;
    } else {
      active.push_back(r.pvalue);
    }
  }
  if (!all.empty()) report.ks = ks_statistic(all);
  if (!active.empty()) report.ks_active = ks_statistic(active);
  return report;
}

}  // namespace

std::vector<double> ScoreReport::pvalues() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.pvalue);
  return out;
}

ScoreReport score_events(const Params& params, const ModelSpec& spec, const GraphShape& shape,
                         const EventLog& train, const EventLog& test) {
  validate(params, shape, spec);
  for (std::size_t k = 0; k < test.events.size(); ++k) {
    if (!(test.events[k].time > train.horizon)) {
      throw InvalidArgument("test event " + std::to_string(k) + " at t=" +
                            std::to_string(test.events[k].time) +
                            " does not follow the training horizon " +
                            std::to_string(train.horizon));
    }
  }
  EventLog merged;
  merged.horizon = std::max(test.horizon, train.horizon);
  merged.tie_offset = train.tie_offset;
  merged.events.reserve(train.events.size() + test.events.size());
  merged.events = train.events;
  merged.events.insert(merged.events.end(), test.events.begin(), test.events.end());

  const EventIndex train_index = build_event_index(train, shape);
  const EventIndex index = build_event_index(merged, shape);
  const TauMatrix tau = spec.tau == TauStrategy::mle ? estimate_tau(index, TauStrategy::mle)
                                                     : estimate_tau(train_index, spec.tau);
  return score_index(params, spec, index, tau, &train_index, train.events.size());
}

ScoreReport score_in_sample(const Params& params, const ModelSpec& spec, const GraphShape& shape,
                            const EventLog& log) {
  validate(params, shape, spec);
  const EventIndex index = build_event_index(log, shape);
  const TauMatrix tau = estimate_tau(index, spec.tau);
  return score_index(params, spec, index, tau, nullptr, 0);
}

double ks_statistic(std::span<const double> pvalues) {
  if (pvalues.empty()) throw InvalidArgument("KS statistic needs at least one value");
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  for (const double p : sorted) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgument("p-value outside [0, 1]: " + std::to_string(p));
    }
  }
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double above = static_cast<double>(i + 1) / m - sorted[i];
    const double below = sorted[i] - static_cast<double>(i) / m;
    d = std::max({d, above, below});
  }
  return d;
}

double ks_pvalue(double d, std::size_t m) {
  if (m == 0) throw InvalidArgument("KS p-value needs a positive sample size");
  const double root = std::sqrt(static_cast<double>(m));
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

std::vector<EdgeKs> per_edge_ks(const ScoreReport& report) {
  std::map<std::pair<NodeId, NodeId>, std::vector<double>> groups;
  for (const auto& r : report.records) groups[{r.source, r.destination}].push_back(r.pvalue);
  std::vector<EdgeKs> out;
  out.reserve(groups.size());
  for (const auto& [edge, values] : groups) {
    out.push_back({edge.first, edge.second, values.size(), ks_statistic(values)});
  }
  return out;
}

std::vector<std::pair<double, double>> qq_points(std::span<const double> pvalues,
                                                 std::size_t points) {
  if (pvalues.empty()) throw InvalidArgument("Q-Q data needs at least one value");
  if (points == 0) throw InvalidArgument("Q-Q data needs at least one point");
  std::vector<double> sorted(pvalues.begin(), pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  const double last = static_cast<double>(sorted.size() - 1);
  std::vector<std::pair<double, double>> out;
  out.reserve(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double prob = (static_cast<double>(k) + 0.5) / static_cast<double>(points);
    const double pos = prob * last;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    out.emplace_back(prob, sorted[lo] + frac * (sorted[hi] - sorted[lo]));
  }
  return out;
}

}  // namespace meg
