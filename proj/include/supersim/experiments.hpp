#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "supersim/model.hpp"

namespace supersim {

// One CLI invocation: which experiment to run and with what parameters.
// Flag and config-file keys match the field names.
struct ExperimentConfig {
    std::string experiment;          // kernel-table, stable-check, laplace-duality,
                                     // compensator, jump-tail, dichotomy, exponents
    ModelParams params;
    double t = 1.0;
    std::int64_t n_particles = 10'000;
    std::int64_t replicates = 100;
    std::uint64_t seed = 42;
    std::filesystem::path out = "out";
    int workers = 1;
    // stable-check discretization (kappa is always 1 + beta).
    double truncation = 1e-3;
    double mesh = 1e-3;
};

// Validates parameter ranges and the regime gates of the requested
// experiment; throws config_error with a named inequality on failure.
void validate_config(const ExperimentConfig& config);

struct ExperimentOutcome {
    bool all_checks_passed = true;
    std::string summary;            // contents written to summary.txt
};

// Runs the experiment and writes manifest.json, summary.txt, and the
// experiment's data files under config.out. Returns the summary.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

} // namespace supersim
