#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "meg/adam.hpp"
#include "meg/em.hpp"
#include "meg/params.hpp"
#include "meg/types.hpp"

namespace meg {

/// Node labels by dense id.
struct LabelTable {
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return labels.size(); }
  const std::string& operator[](NodeId id) const { return labels[id]; }
  friend bool operator==(const LabelTable&, const LabelTable&) = default;
};

struct IngestOptions {
  bool bipartite = false;
  double tie_offset = 0.0;
  std::optional<double> horizon;  // overrides the file header and the last event time
};

struct Dataset {
  EventLog log;
  GraphShape shape;
  LabelTable sources;
  LabelTable destinations;  // same table as `sources` for directed graphs
  std::size_t duplicates = 0;
  std::string epoch;
};

/// Reads "time,source,destination" records. Lines starting with '#' are
/// header comments; recognised keys are epoch, horizon, nodes, sources and
/// destinations. When node counts are declared, labels must be integer ids
/// below the count; otherwise labels are arbitrary and numbered in order of
/// first appearance after a stable sort by time. Exact duplicate records are
/// dropped and counted.
Dataset ingest(std::istream& in, const IngestOptions& options);
Dataset ingest_file(const std::string& path, const IngestOptions& options);

/// Writes a log in the format read by ingest, declaring node counts so that
/// re-reading reproduces the log exactly.
void write_events(std::ostream& out, const EventLog& log, const GraphShape& shape,
                  const std::string& epoch = "");

struct SplitResult {
  EventLog train;  // t <= split, horizon = split
  EventLog test;   // t > split, horizon = original horizon
  std::size_t train_edges = 0;
  std::size_t test_edges = 0;
  std::size_t shared_edges = 0;
  std::size_t new_edges = 0;  // test edges without training events
  std::vector<std::string> warnings;
};

SplitResult split(const EventLog& log, double split_time);

struct ModelFile {
  GraphShape shape;
  ModelSpec spec;
  Params params;
  LabelTable sources;
  LabelTable destinations;
};

/// Plain-text parameter file with one named block per parameter array, at
/// full precision. write -> read -> write is byte-identical.
void write_model(std::ostream& out, const ModelFile& model);
ModelFile read_model(std::istream& in);
void write_model_file(const std::string& path, const ModelFile& model);
ModelFile read_model_file(const std::string& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

enum class FitMethod { adam, em };

struct SimulateSettings {
  std::optional<double> horizon;
  std::optional<std::size_t> events;
  std::size_t max_events = 10'000'000;
  bool self_loops = false;  // directed graphs only
};

struct RunConfig {
  std::string input;
  std::string params;  // parameter file to read (simulate, score)
  std::string output_dir = ".";
  bool bipartite = false;
  ModelSpec spec;
  std::optional<double> split;
  std::optional<double> horizon;
  double tie_offset = 0.0;
  std::uint64_t seed = 0;
  bool reproducible = false;
  FitMethod method = FitMethod::adam;
  InitVariant init = InitVariant::standard;
  AdamConfig adam;
  EmConfig em;
  SimulateSettings simulate;
};

/// Reads a JSON run configuration. Unknown keys are rejected.
RunConfig read_run_config(std::istream& in);
RunConfig read_run_config_file(const std::string& path);

FitMethod parse_fit_method(const std::string& text);

}  // namespace meg
