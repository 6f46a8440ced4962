#pragma once

// Graph description files: JSON with sections `vertices`, `edges`, `weights`.
// The parser is strict — unknown keys anywhere are errors, so typos cannot
// silently change an experiment.  Schema documented in README.md.

#include <string>

#include "graphdiff/metric_graph.hpp"

namespace graphdiff {

// Parses and validates; throws ConfigError with the offending key/id on any
// schema violation or invariant failure.
MetricGraph load_graph(const std::string& path);

// Same, from an in-memory document (tests build graphs from literals).
MetricGraph parse_graph(const std::string& json_text, const std::string& origin = "<inline>");

}  // namespace graphdiff
