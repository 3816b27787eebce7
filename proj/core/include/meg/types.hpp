#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace meg {

using NodeId = std::uint32_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Error hierarchy. Everything thrown by the library derives from meg::Error so
// callers (the CLI in particular) can map failures to a single error record.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message) : Error("invalid_argument", message) {}
};

class NumericFailure : public Error {
 public:
  explicit NumericFailure(const std::string& message) : Error("numeric_failure", message) {}
};

class UnsupportedSpec : public Error {
 public:
  explicit UnsupportedSpec(const std::string& message) : Error("unsupported_spec", message) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("parse_error", "line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct Event {
  double time = 0.0;
  NodeId source = 0;
  NodeId destination = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Directed graphs use one node set for both ends of an edge; bipartite graphs
/// keep separate source and destination node sets.
class GraphShape {
 public:
  GraphShape() = default;

  static GraphShape directed(std::size_t nodes) { return GraphShape(false, nodes, nodes); }
  static GraphShape bipartite(std::size_t sources, std::size_t destinations) {
    return GraphShape(true, sources, destinations);
  }

  bool is_bipartite() const noexcept { return bipartite_; }
  std::size_t sources() const noexcept { return sources_; }
  std::size_t destinations() const noexcept { return destinations_; }
  std::size_t pairs() const noexcept { return sources_ * destinations_; }

  friend bool operator==(const GraphShape&, const GraphShape&) = default;

 private:
  GraphShape(bool bipartite, std::size_t sources, std::size_t destinations)
      : bipartite_(bipartite), sources_(sources), destinations_(destinations) {}

  bool bipartite_ = false;
  std::size_t sources_ = 0;
  std::size_t destinations_ = 0;
};

/// Time-ordered dyadic events observed on [0, horizon].
///
/// Events sharing a timestamp keep their file order. An event at time s
/// excites intensities from s + tie_offset onwards; with a zero offset it
/// excites strictly after s.
struct EventLog {
  std::vector<Event> events;
  double horizon = 0.0;
  double tie_offset = 0.0;
};

/// Throws InvalidArgument naming the first offending event.
void validate(const EventLog& log, const GraphShape& shape);

/// Memory order of an excitation component: poisson keeps no history (r=0),
/// markov only the latest event (r=1), hawkes every event (r=inf).
enum class Memory { absent, poisson, markov, hawkes };

enum class TauStrategy { mle, zero, adjacency };

struct ModelSpec {
  Memory main = Memory::hawkes;
  Memory interaction = Memory::absent;
  std::size_t dimension = 1;
  TauStrategy tau = TauStrategy::mle;

  bool has_main() const noexcept { return main != Memory::absent; }
  bool has_interaction() const noexcept { return interaction != Memory::absent; }
  bool main_excites() const noexcept { return main == Memory::markov || main == Memory::hawkes; }
  bool interaction_excites() const noexcept {
    return interaction == Memory::markov || interaction == Memory::hawkes;
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

void validate(const ModelSpec& spec);

std::string_view to_string(Memory memory);
std::string_view to_string(TauStrategy strategy);
Memory parse_memory(std::string_view text);
TauStrategy parse_tau_strategy(std::string_view text);

}  // namespace meg
