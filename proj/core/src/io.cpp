#include "meg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "json.hpp"
#include "meg/event_index.hpp"

namespace meg {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::optional<std::uint64_t> parse_count(std::string_view text) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  return out;
}

struct RawEvent {
  double time;
  std::string source;
  std::string destination;
};

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw NumericFailure("cannot format a number");
  return std::string(buffer, ptr);
}

Dataset ingest(std::istream& in, const IngestOptions& options) {
  Dataset data;
  std::optional<double> header_horizon;
  std::optional<std::uint64_t> nodes, sources, destinations;
  std::vector<RawEvent> raw;
  bool seen_header = false;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const auto colon = text.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(std::string_view(text).substr(1, colon - 1));
      const std::string value = trim(std::string_view(text).substr(colon + 1));
      const auto count = [&] {
        const auto v = parse_count(value);
        if (!v) throw ParseError(number, "bad count for '" + key + "': " + value);
        return *v;
      };
      if (key == "epoch") {
        data.epoch = value;
      } else if (key == "horizon") {
        header_horizon = parse_double(value);
        if (!header_horizon) throw ParseError(number, "bad horizon: " + value);
      } else if (key == "nodes") {
        nodes = count();
      } else if (key == "sources") {
        sources = count();
      } else if (key == "destinations") {
        destinations = count();
      }
      continue;
    }
    const auto fields = split_fields(text, ',');
    if (!seen_header) {
      if (fields != std::vector<std::string>{"time", "source", "destination"}) {
        throw ParseError(number, "expected the header 'time,source,destination'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(number, "expected 3 fields, found " + std::to_string(fields.size()));
    }
    const auto t = parse_double(fields[0]);
    if (!t || !std::isfinite(*t) || *t < 0.0) {
      throw ParseError(number, "time must be a non-negative number: '" + fields[0] + "'");
    }
    if (fields[1].empty() || fields[2].empty()) throw ParseError(number, "empty node label");
    raw.push_back({*t, fields[1], fields[2]});
  }
  if (!seen_header) throw ParseError(number, "missing header 'time,source,destination'");

  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawEvent& a, const RawEvent& b) { return a.time < b.time; });
  std::set<std::tuple<double, std::string, std::string>> seen;
  std::vector<RawEvent> unique;
  unique.reserve(raw.size());
  for (auto& e : raw) {
    if (seen.emplace(e.time, e.source, e.destination).second) {
      unique.push_back(std::move(e));
    } else {
      ++data.duplicates;
    }
  }

  const bool declared = options.bipartite ? (sources && destinations) : nodes.has_value();
  if (declared) {
    const std::size_t ns = options.bipartite ? *sources : *nodes;
    const std::size_t nd = options.bipartite ? *destinations : *nodes;
    data.shape = options.bipartite ? GraphShape::bipartite(ns, nd) : GraphShape::directed(ns);
    for (std::size_t k = 0; k < ns; ++k) data.sources.labels.push_back(std::to_string(k));
    for (std::size_t k = 0; k < nd; ++k) data.destinations.labels.push_back(std::to_string(k));
    for (std::size_t k = 0; k < unique.size(); ++k) {
      const auto s = parse_count(unique[k].source);
      const auto d = parse_count(unique[k].destination);
      if (!s || !d || *s >= ns || *d >= nd) {
        throw InvalidArgument("record at t=" + format_double(unique[k].time) + " (" +
                              unique[k].source + " -> " + unique[k].destination +
                              ") is not a valid node id for the declared node counts");
      }
      data.log.events.push_back(
          {unique[k].time, static_cast<NodeId>(*s), static_cast<NodeId>(*d)});
    }
  } else {
    std::unordered_map<std::string, NodeId> src_ids;
    std::unordered_map<std::string, NodeId> dst_ids;
    auto& dst_map = options.bipartite ? dst_ids : src_ids;
    auto& dst_table = options.bipartite ? data.destinations : data.sources;
    const auto id_of = [](std::unordered_map<std::string, NodeId>& map, LabelTable& table,
                          const std::string& label) {
      const auto [it, inserted] = map.try_emplace(label, static_cast<NodeId>(table.size()));
      if (inserted) table.labels.push_back(label);
      return it->second;
    };
    for (const auto& e : unique) {
      const NodeId s = id_of(src_ids, data.sources, e.source);
      const NodeId d = id_of(dst_map, dst_table, e.destination);
      data.log.events.push_back({e.time, s, d});
    }
    if (!options.bipartite) data.destinations = data.sources;
    data.shape = options.bipartite
                     ? GraphShape::bipartite(data.sources.size(), data.destinations.size())
                     : GraphShape::directed(data.sources.size());
  }

  const double last = data.log.events.empty() ? 0.0 : data.log.events.back().time;
  data.log.horizon = options.horizon.value_or(header_horizon.value_or(last));
  data.log.tie_offset = options.tie_offset;
  validate(data.log, data.shape);
  return data;
}

Dataset ingest_file(const std::string& path, const IngestOptions& options) {
  auto in = open_input(path);
  return ingest(in, options);
}

void write_events(std::ostream& out, const EventLog& log, const GraphShape& shape,
                  const std::string& epoch) {
  if (!epoch.empty()) out << "# epoch: " << epoch << '\n';
  if (shape.is_bipartite()) {
    out << "# sources: " << shape.sources() << '\n';
    out << "# destinations: " << shape.destinations() << '\n';
  } else {
    out << "# nodes: " << shape.sources() << '\n';
  }
  out << "# horizon: " << format_double(log.horizon) << '\n';
  out << "time,source,destination\n";
  for (const Event& e : log.events) {
    out << format_double(e.time) << ',' << e.source << ',' << e.destination << '\n';
  }
}

SplitResult split(const EventLog& log, double split_time) {
  if (!std::isfinite(split_time) || split_time <= 0.0 || split_time >= log.horizon) {
    throw InvalidArgument("split time " + format_double(split_time) +
                          " must lie strictly inside (0, " + format_double(log.horizon) + ")");
  }
  SplitResult r;
  r.train.horizon = split_time;
  r.test.horizon = log.horizon;
  r.train.tie_offset = r.test.tie_offset = log.tie_offset;
  std::set<std::pair<NodeId, NodeId>> train_edges, test_edges;
  for (const Event& e : log.events) {
    if (e.time <= split_time) {
      r.train.events.push_back(e);
      train_edges.emplace(e.source, e.destination);
    } else {
      r.test.events.push_back(e);
      test_edges.emplace(e.source, e.destination);
    }
  }
  r.train_edges = train_edges.size();
  r.test_edges = test_edges.size();
  for (const auto& e : test_edges) {
    if (train_edges.count(e) != 0) {
      ++r.shared_edges;
    } else {
      ++r.new_edges;
    }
  }
  if (r.train.events.empty()) r.warnings.push_back("training period has no events");
  if (r.test.events.empty()) r.warnings.push_back("test period has no events");
  return r;
}

void write_model(std::ostream& out, const ModelFile& m) {
  const GraphShape& shape = m.shape;
  out << "meg-params 1\n";
  if (shape.is_bipartite()) {
    out << "graph bipartite " << shape.sources() << ' ' << shape.destinations() << '\n';
  } else {
    out << "graph directed " << shape.sources() << '\n';
  }
  out << "main " << to_string(m.spec.main) << '\n';
  out << "interaction " << to_string(m.spec.interaction) << '\n';
  out << "dimension " << m.spec.dimension << '\n';
  out << "tau " << to_string(m.spec.tau) << '\n';
  const auto labels = [&](const char* side, const LabelTable& table) {
    if (table.labels.empty()) return;
    out << "labels " << side << ' ' << table.size() << '\n';
    for (const auto& l : table.labels) out << l << '\n';
  };
  labels("source", m.sources);
  if (shape.is_bipartite()) labels("destination", m.destinations);

  const Params& p = m.params;
  const auto write_block = [&](std::string_view name, const std::vector<double>& values,
                               std::size_t cols) {
    if (values.empty()) return;
    const std::size_t rows = values.size() / cols;
    out << "block " << name << ' ' << rows << ' ' << cols << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (c > 0) out << ' ';
        out << format_double(values[r * cols + c]);
      }
      out << '\n';
    }
  };
  const std::size_t d = m.spec.has_interaction() ? m.spec.dimension : 1;
  for_each_block(p, [&](std::string_view name, const std::vector<double>& values) {
    write_block(name, values, name.find("factors") != std::string_view::npos ? d : 1);
  });
}

ModelFile read_model(std::istream& in) {
  ModelFile m;
  std::string line;
  std::size_t number = 0;
  const auto next_line = [&]() -> std::optional<std::string> {
    while (std::getline(in, line)) {
      ++number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!trim(line).empty()) return line;
    }
    return std::nullopt;
  };
  const auto words = [](const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    for (std::string w; ss >> w;) out.push_back(w);
    return out;
  };
  const auto count = [&](const std::string& text) {
    const auto v = parse_count(text);
    if (!v) throw ParseError(number, "expected a count, found '" + text + "'");
    return static_cast<std::size_t>(*v);
  };

  auto first = next_line();
  if (!first || trim(*first) != "meg-params 1") {
    throw ParseError(number, "not a parameter file (missing 'meg-params 1')");
  }
  std::map<std::string, std::vector<double>> blocks;
  bool have_graph = false;
  while (auto l = next_line()) {
    const auto w = words(*l);
    const std::string& key = w[0];
    if (key == "graph") {
      if (w.size() == 3 && w[1] == "directed") {
        m.shape = GraphShape::directed(count(w[2]));
      } else if (w.size() == 4 && w[1] == "bipartite") {
        m.shape = GraphShape::bipartite(count(w[2]), count(w[3]));
      } else {
        throw ParseError(number, "bad graph line");
      }
      have_graph = true;
    } else if (key == "main" && w.size() == 2) {
      try {
        m.spec.main = parse_memory(w[1]);
      } catch (const Error& e) {
        throw ParseError(number, e.what());
      }
    } else if (key == "interaction" && w.size() == 2) {
      try {
        m.spec.interaction = parse_memory(w[1]);
      } catch (const Error& e) {
        throw ParseError(number, e.what());
      }
    } else if (key == "dimension" && w.size() == 2) {
      m.spec.dimension = count(w[1]);
    } else if (key == "tau" && w.size() == 2) {
      try {
        m.spec.tau = parse_tau_strategy(w[1]);
      } catch (const Error& e) {
        throw ParseError(number, e.what());
      }
    } else if (key == "labels" && w.size() == 3) {
      LabelTable& table = w[1] == "source" ? m.sources : m.destinations;
      if (w[1] != "source" && w[1] != "destination") throw ParseError(number, "bad labels side");
      const std::size_t n = count(w[2]);
      for (std::size_t k = 0; k < n; ++k) {
        if (!std::getline(in, line)) throw ParseError(number, "truncated label table");
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        table.labels.push_back(line);
      }
    } else if (key == "block" && w.size() == 4) {
      const std::size_t rows = count(w[2]);
      const std::size_t cols = count(w[3]);
      std::vector<double> values;
      values.reserve(rows * cols);
      for (std::size_t r = 0; r < rows; ++r) {
        const auto row = next_line();
        if (!row) throw ParseError(number, "truncated block " + w[1]);
        const auto cells = words(*row);
        if (cells.size() != cols) {
          throw ParseError(number, "block " + w[1] + " expects " + std::to_string(cols) +
                                       " values per row");
        }
        for (const auto& c : cells) {
          const auto v = parse_double(c);
          if (!v) throw ParseError(number, "bad number '" + c + "'");
          values.push_back(*v);
        }
      }
      if (!blocks.emplace(w[1], std::move(values)).second) {
        throw ParseError(number, "duplicate block " + w[1]);
      }
    } else {
      throw ParseError(number, "unrecognised line '" + trim(*l) + "'");
    }
  }
  if (!have_graph) throw ParseError(number, "missing graph line");
  validate(m.spec);
  if (!m.shape.is_bipartite()) m.destinations = m.sources;

  m.params = Params::filled(m.shape, m.spec, 0.0);
  for_each_block(m.params, [&](std::string_view name, std::vector<double>& values) {
    const auto it = blocks.find(std::string(name));
    if (values.empty()) {
      if (it != blocks.end()) {
        throw InvalidArgument("block " + std::string(name) + " is not used by this model");
      }
      return;
    }
    if (it == blocks.end()) throw InvalidArgument("missing block " + std::string(name));
    if (it->second.size() != values.size()) {
      throw InvalidArgument("block " + std::string(name) + " has the wrong size");
    }
    values = it->second;
    blocks.erase(it);
  });
  if (!blocks.empty()) {
    throw InvalidArgument("unknown block " + blocks.begin()->first);
  }
  validate(m.params, m.shape, m.spec);
  return m;
}

void write_model_file(const std::string& path, const ModelFile& model) {
  auto out = open_output(path);
  write_model(out, model);
}

ModelFile read_model_file(const std::string& path) {
  auto in = open_input(path);
  return read_model(in);
}

FitMethod parse_fit_method(const std::string& text) {
  if (text == "adam") return FitMethod::adam;
  if (text == "em") return FitMethod::em;
  throw InvalidArgument("unknown fitting method '" + text + "' (expected adam or em)");
}

RunConfig read_run_config(std::istream& in) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("run configuration must be a JSON object");

  const auto check_keys = [](const json& obj, std::initializer_list<const char*> allowed,
                             const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        throw InvalidArgument("unknown configuration key '" + where + key + "'");
      }
    }
  };
  check_keys(j,
             {"input", "params", "output_dir", "graph", "model", "split", "horizon", "dt", "seed",
              "reproducible", "method", "init", "adam", "em", "simulate"},
             "");

  RunConfig c;
  try {
    c.input = j.value("input", c.input);
    c.params = j.value("params", c.params);
    c.output_dir = j.value("output_dir", c.output_dir);
    const std::string graph = j.value("graph", std::string("directed"));
    if (graph != "directed" && graph != "bipartite") {
      throw InvalidArgument("graph must be 'directed' or 'bipartite'");
    }
    c.bipartite = graph == "bipartite";
    if (j.contains("model")) {
      const json& m = j.at("model");
      check_keys(m, {"main", "interaction", "dimension", "tau"}, "model.");
      if (m.contains("main")) c.spec.main = parse_memory(m.at("main").get<std::string>());
      if (m.contains("interaction")) {
        c.spec.interaction = parse_memory(m.at("interaction").get<std::string>());
      }
      c.spec.dimension = m.value("dimension", c.spec.dimension);
      if (m.contains("tau")) c.spec.tau = parse_tau_strategy(m.at("tau").get<std::string>());
    }
    if (j.contains("split")) c.split = j.at("split").get<double>();
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<double>();
    c.tie_offset = j.value("dt", c.tie_offset);
    c.seed = j.value("seed", c.seed);
    c.reproducible = j.value("reproducible", c.reproducible);
    if (j.contains("method")) c.method = parse_fit_method(j.at("method").get<std::string>());
    if (j.contains("init")) {
      const auto v = j.at("init").get<std::string>();
      if (v == "standard") {
        c.init = InitVariant::standard;
      } else if (v == "sqrt_baseline") {
        c.init = InitVariant::sqrt_baseline;
      } else {
        throw InvalidArgument("init must be 'standard' or 'sqrt_baseline'");
      }
    }
    if (j.contains("adam")) {
      const json& a = j.at("adam");
      check_keys(a,
                 {"eta", "rho1", "rho2", "epsilon", "max_iterations", "tolerance", "window",
                  "restarts", "restart_init", "jitter_sigma", "warm_start"},
                 "adam.");
      c.adam.eta = a.value("eta", c.adam.eta);
      c.adam.rho1 = a.value("rho1", c.adam.rho1);
      c.adam.rho2 = a.value("rho2", c.adam.rho2);
      c.adam.epsilon = a.value("epsilon", c.adam.epsilon);
      c.adam.max_iterations = a.value("max_iterations", c.adam.max_iterations);
      c.adam.tolerance = a.value("tolerance", c.adam.tolerance);
      c.adam.window = a.value("window", c.adam.window);
      c.adam.restarts = a.value("restarts", c.adam.restarts);
      c.adam.jitter_sigma = a.value("jitter_sigma", c.adam.jitter_sigma);
      c.adam.warm_start = a.value("warm_start", c.adam.warm_start);
      if (a.contains("restart_init")) {
        const auto v = a.at("restart_init").get<std::string>();
        if (v == "jitter") {
          c.adam.restart_init = RestartInit::jitter;
        } else if (v == "uniform") {
          c.adam.restart_init = RestartInit::uniform;
        } else {
          throw InvalidArgument("adam.restart_init must be 'jitter' or 'uniform'");
        }
      }
    }
    if (j.contains("em")) {
      const json& e = j.at("em");
      check_keys(e, {"max_iterations", "tolerance", "restarts"}, "em.");
      c.em.max_iterations = e.value("max_iterations", c.em.max_iterations);
      c.em.tolerance = e.value("tolerance", c.em.tolerance);
      c.em.restarts = e.value("restarts", c.em.restarts);
    }
    if (j.contains("simulate")) {
      const json& s = j.at("simulate");
      check_keys(s, {"horizon", "events", "max_events", "self_loops"}, "simulate.");
      if (s.contains("horizon")) c.simulate.horizon = s.at("horizon").get<double>();
      if (s.contains("events")) c.simulate.events = s.at("events").get<std::size_t>();
      c.simulate.max_events = s.value("max_events", c.simulate.max_events);
      c.simulate.self_loops = s.value("self_loops", c.simulate.self_loops);
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad configuration value: ") + e.what());
  }
  c.adam.seed = c.seed;
  c.em.seed = c.seed;
  return c;
}

RunConfig read_run_config_file(const std::string& path) {
  auto in = open_input(path);
  return read_run_config(in);
}

}  // namespace meg
