#include "instances.hpp"

#include <algorithm>
#include <cmath>

namespace meg::testing {

EventLog random_log(const GraphShape& shape, std::size_t events, double horizon,
                    std::mt19937_64& rng, double tie_offset) {
  std::uniform_real_distribution<double> when(0.0, horizon);
  std::uniform_int_distribution<NodeId> src(0, static_cast<NodeId>(shape.sources() - 1));
  std::uniform_int_distribution<NodeId> dst(0, static_cast<NodeId>(shape.destinations() - 1));
  EventLog log;
  log.horizon = horizon;
  log.tie_offset = tie_offset;
  for (std::size_t k = 0; k < events; ++k) {
    NodeId i = src(rng);
    NodeId j = dst(rng);
    if (!shape.is_bipartite()) {
      while (i == j && shape.sources() > 1) j = dst(rng);
    }
    log.events.push_back({when(rng), i, j});
  }
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const Event& a, const Event& b) { return a.time < b.time; });
  return log;
}

Params random_params(const GraphShape& shape, const ModelSpec& spec, std::mt19937_64& rng,
                     double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Params p = Params::filled(shape, spec, 1.0);
  for_each_block(p, [&](std::string_view, std::vector<double>& values) {
    for (double& v : values) v = std::exp(u(rng));
  });
  return p;
}

Instance make_instance(const EventLog& log, const GraphShape& shape, const ModelSpec& spec,
                       Params params) {
  Instance inst;
  inst.index = build_event_index(log, shape);
  inst.tau = estimate_tau(inst.index, spec.tau);
  inst.spec = spec;
  inst.params = std::move(params);
  return inst;
}

}  // namespace meg::testing
