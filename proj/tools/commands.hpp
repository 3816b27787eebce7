#pragma once

#include <iosfwd>
#include <string>

#include "meg/io.hpp"

namespace meg::cli {

// Each command writes its artifacts under cfg.output_dir and a short
// "key: value" report to `log`.
void run_simulate(const RunConfig& cfg, std::ostream& log);
void run_fit(const RunConfig& cfg, std::ostream& log);
void run_score(const RunConfig& cfg, std::ostream& log);
void run_evaluate(const RunConfig& cfg, std::ostream& log);

// Dispatches by command name; throws InvalidArgument for unknown commands.
void run(const std::string& command, const RunConfig& cfg, std::ostream& log);

}  // namespace meg::cli
