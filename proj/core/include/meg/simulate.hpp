#pragma once

#include <cstddef>
#include <cstdint>

#include "meg/event_index.hpp"
#include "meg/params.hpp"
#include "meg/random.hpp"
#include "meg/types.hpp"

namespace meg {

struct SimConfig {
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;  // replication id under one seed
  std::size_t max_events = 10'000'000;
};

/// Thrown when a simulation exceeds max_events; carries the events generated
/// so far (horizon set to the time reached).
class SimulationTruncated : public Error {
 public:
  SimulationTruncated(const std::string& message, EventLog partial)
      : Error("truncated", message), partial_(std::move(partial)) {}
  const EventLog& partial() const noexcept { return partial_; }

 private:
  EventLog partial_;
};

/// Simulates the process on [0, cfg.horizon] by thinning. Edges whose start
/// time is infinite never fire. Self-loops fire only if their tau is finite.
EventLog simulate(const Params& params, const TauMatrix& tau, const ModelSpec& spec,
                  const GraphShape& shape, const SimConfig& cfg);

/// Simulates until exactly `events` events have occurred; the returned log's
/// horizon is the last event time. cfg.horizon is ignored.
EventLog simulate_n_events(const Params& params, const TauMatrix& tau, const ModelSpec& spec,
                           const GraphShape& shape, std::size_t events, const SimConfig& cfg);

}  // namespace meg
