#include "meg/types.hpp"

#include <cmath>

namespace meg {

void validate(const EventLog& log, const GraphShape& shape) {
  if (!(log.tie_offset >= 0.0) || !std::isfinite(log.tie_offset)) {
    throw InvalidArgument("tie offset must be a finite non-negative number of seconds");
  }
  double previous = 0.0;
  for (std::size_t k = 0; k < log.events.size(); ++k) {
    const Event& e = log.events[k];
    const auto where = [&] {
      return "event " + std::to_string(k) + " (t=" + std::to_string(e.time) + ", " +
             std::to_string(e.source) + " -> " + std::to_string(e.destination) + ")";
    };
    if (!std::isfinite(e.time) || e.time < 0.0) {
      throw InvalidArgument(where() + ": time must be finite and non-negative");
    }
    if (e.time < previous) {
      throw InvalidArgument(where() + ": times must be nondecreasing");
    }
    if (e.time > log.horizon) {
      throw InvalidArgument(where() + ": time exceeds the horizon " + std::to_string(log.horizon));
    }
    if (e.source >= shape.sources()) {
      throw InvalidArgument(where() + ": source node out of range");
    }
    if (e.destination >= shape.destinations()) {
      throw InvalidArgument(where() + ": destination node out of range");
    }
    previous = e.time;
  }
}

void validate(const ModelSpec& spec) {
  if (!spec.has_main() && !spec.has_interaction()) {
    throw InvalidArgument("model needs main effects, interactions, or both");
  }
  if (spec.has_interaction() && spec.dimension == 0) {
    throw InvalidArgument("interaction dimension must be at least 1");
  }
}

std::string_view to_string(Memory memory) {
  switch (memory) {
    case Memory::absent: return "absent";
    case Memory::poisson: return "poisson";
    case Memory::markov: return "markov";
    case Memory::hawkes: return "hawkes";
  }
  return "absent";
}

std::string_view to_string(TauStrategy strategy) {
  switch (strategy) {
    case TauStrategy::mle: return "mle";
    case TauStrategy::zero: return "zero";
    case TauStrategy::adjacency: return "adjacency";
  }
  return "mle";
}

Memory parse_memory(std::string_view text) {
  if (text == "absent") return Memory::absent;
  if (text == "poisson") return Memory::poisson;
  if (text == "markov") return Memory::markov;
  if (text == "hawkes") return Memory::hawkes;
  throw InvalidArgument("unknown component kind '" + std::string(text) +
                        "' (expected absent|poisson|markov|hawkes)");
}

TauStrategy parse_tau_strategy(std::string_view text) {
  if (text == "mle") return TauStrategy::mle;
  if (text == "zero") return TauStrategy::zero;
  if (text == "adjacency") return TauStrategy::adjacency;
  throw InvalidArgument("unknown tau strategy '" + std::string(text) +
                        "' (expected mle|zero|adjacency)");
}

}  // namespace meg
