#pragma once

#include <stdexcept>
#include <string>

namespace graphdiff {

// Thrown when a graph description or run configuration is rejected before
// any simulation work starts.  The CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a numerical routine cannot produce a usable answer (e.g. a
// time-change equation system with no root in the search bracket).  The CLI
// maps this to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace graphdiff
