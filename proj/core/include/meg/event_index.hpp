#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "meg/types.hpp"

namespace meg {

/// Events observed on one edge, in time order. `source_position[k]` is the
/// position of the k-th edge event inside the source node's event sequence
/// (and likewise for the destination), so that
/// source_times(source)[source_position[k]] == times[k].
struct EdgeEvents {
  NodeId source = 0;
  NodeId destination = 0;
  std::vector<double> times;
  std::vector<std::uint32_t> source_position;
  std::vector<std::uint32_t> destination_position;
  std::vector<std::uint32_t> event_ids;  // positions in the originating EventLog
};

/// Per-node and per-edge views of an event log, built in one pass.
class EventIndex {
 public:
  EventIndex() = default;

  const GraphShape& shape() const noexcept { return shape_; }
  double horizon() const noexcept { return horizon_; }
  double tie_offset() const noexcept { return tie_offset_; }
  std::size_t event_count() const noexcept { return event_count_; }

  std::span<const double> source_times(NodeId i) const { return source_times_[i]; }
  std::span<const double> destination_times(NodeId j) const { return destination_times_[j]; }

  /// Edges with at least one event, sorted by (source, destination).
  std::span<const EdgeEvents> edges() const noexcept { return edges_; }
  std::optional<std::size_t> find_edge(NodeId i, NodeId j) const;
  bool adjacent(NodeId i, NodeId j) const { return find_edge(i, j).has_value(); }

  friend EventIndex build_event_index(const EventLog& log, const GraphShape& shape);

 private:
  GraphShape shape_;
  double horizon_ = 0.0;
  double tie_offset_ = 0.0;
  std::size_t event_count_ = 0;
  std::vector<std::vector<double>> source_times_;
  std::vector<std::vector<double>> destination_times_;
  std::vector<EdgeEvents> edges_;
  std::unordered_map<std::uint64_t, std::size_t> edge_lookup_;
};

/// Validates the log against the shape and builds the index in O(m).
EventIndex build_event_index(const EventLog& log, const GraphShape& shape);

/// Edge start times, one per ordered node pair; +inf marks an edge that never
/// becomes active.
class TauMatrix {
 public:
  TauMatrix() = default;
  TauMatrix(const GraphShape& shape, double fill)
      : cols_(shape.destinations()), values_(shape.pairs(), fill) {}

  double operator()(NodeId i, NodeId j) const { return values_[i * cols_ + j]; }
  double& operator()(NodeId i, NodeId j) { return values_[i * cols_ + j]; }
  std::size_t destinations() const noexcept { return cols_; }
  std::size_t sources() const noexcept { return cols_ == 0 ? 0 : values_.size() / cols_; }

 private:
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// mle: first event time on the edge (inf without events); zero: 0 everywhere;
/// adjacency: 0 on observed edges, inf elsewhere.
TauMatrix estimate_tau(const EventIndex& index, TauStrategy strategy);

}  // namespace meg
