#include "meg/event_index.hpp"

#include <algorithm>

namespace meg {
namespace {

std::uint64_t edge_key(NodeId i, NodeId j) {
  return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
}

}  // namespace

std::optional<std::size_t> EventIndex::find_edge(NodeId i, NodeId j) const {
  const auto it = edge_lookup_.find(edge_key(i, j));
  if (it == edge_lookup_.end()) return std::nullopt;
  return it->second;
}

EventIndex build_event_index(const EventLog& log, const GraphShape& shape) {
  validate(log, shape);

  EventIndex index;
  index.shape_ = shape;
  index.horizon_ = log.horizon;
  index.tie_offset_ = log.tie_offset;
  index.event_count_ = log.events.size();
  index.source_times_.resize(shape.sources());
  index.destination_times_.resize(shape.destinations());

  // Edges are created in first-seen order, then renumbered by (source, dest).
  std::vector<EdgeEvents> edges;
  std::unordered_map<std::uint64_t, std::size_t> lookup;
  for (std::size_t k = 0; k < log.events.size(); ++k) {
    const Event& e = log.events[k];
    auto& src = index.source_times_[e.source];
    auto& dst = index.destination_times_[e.destination];
    const auto [it, inserted] = lookup.try_emplace(edge_key(e.source, e.destination), edges.size());
    if (inserted) {
      edges.push_back(EdgeEvents{e.source, e.destination, {}, {}, {}, {}});
    }
    EdgeEvents& edge = edges[it->second];
    edge.times.push_back(e.time);
    edge.source_position.push_back(static_cast<std::uint32_t>(src.size()));
    edge.destination_position.push_back(static_cast<std::uint32_t>(dst.size()));
    edge.event_ids.push_back(static_cast<std::uint32_t>(k));
    src.push_back(e.time);
    dst.push_back(e.time);
  }

  std::vector<std::size_t> order(edges.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return edge_key(edges[a].source, edges[a].destination) <
           edge_key(edges[b].source, edges[b].destination);
  });
  index.edges_.reserve(edges.size());
  for (const std::size_t k : order) {
    index.edge_lookup_.emplace(edge_key(edges[k].source, edges[k].destination),
                               index.edges_.size());
    index.edges_.push_back(std::move(edges[k]));
  }
  return index;
}

TauMatrix estimate_tau(const EventIndex& index, TauStrategy strategy) {
  const GraphShape& shape = index.shape();
  switch (strategy) {
    case TauStrategy::zero:
      return TauMatrix(shape, 0.0);
    case TauStrategy::adjacency: {
      TauMatrix tau(shape, kInfinity);
      for (const EdgeEvents& e : index.edges()) tau(e.source, e.destination) = 0.0;
      return tau;
    }
    case TauStrategy::mle: {
      TauMatrix tau(shape, kInfinity);
      for (const EdgeEvents& e : index.edges()) tau(e.source, e.destination) = e.times.front();
      return tau;
    }
  }
  return TauMatrix(shape, kInfinity);
}

}  // namespace meg
