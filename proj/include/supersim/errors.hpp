#pragma once

#include <stdexcept>
#include <string>

namespace supersim {

// Invalid numeric input (NaN arguments, empty samples, malformed data).
// Plain std::invalid_argument is used for these throughout.

// Parameter combinations outside a module's supported regime.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Simulation exceeded a hard resource limit (population cap, memory budget).
struct resource_error : std::runtime_error {
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

// Requested measurement is finer than the discretization can support.
struct resolution_error : std::runtime_error {
    explicit resolution_error(const std::string& what) : std::runtime_error(what) {}
};

// Too few samples or replicates survived filtering to report a statistic.
struct insufficient_sample_error : std::runtime_error {
    explicit insufficient_sample_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace supersim
