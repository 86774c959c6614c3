#pragma once

#include <cstdint>
#include <vector>

#include "supersim/model.hpp"
#include "supersim/rng.hpp"

namespace supersim {

struct EvolveOptions {
    // Record branching jumps with mass r = K/N at or above this threshold.
    // Non-positive selects the default 5/N. Recording can be disabled entirely
    // when jumps are not consumed (large runs).
    double jump_record_threshold = 0.0;
    bool record_jumps = true;
    // Number of (time, mass) checkpoints in the returned mass series.
    int mass_checkpoints = 65;
    // Hard particle-count cap; exceeding it aborts the replicate.
    std::int64_t population_cap = 10'000'000;
};

struct EvolveResult {
    ParticleCloud cloud;                            // state at the final time
    std::vector<JumpEvent> jumps;                   // recorded branching jumps
    std::vector<std::pair<double, double>> mass_series; // sampled (time, total mass)
    double mass_time_integral = 0.0;                // exact int_0^t mass ds
    bool censored = false;                          // population cap hit
    double censored_at = 0.0;
};

// Interacting-particle approximation at scale N: each particle carries mass
// 1/N, moves by independent symmetric alpha-stable motion, branches at rate
// b (1+beta) N^beta into the critical offspring law, and (for a != 0) gains
// independent binary birth (rate a+) and death (rate a-) clocks. Motion
// updates are lazy: a particle's position advances only when it is touched,
// which is exact because stable increments over any elapsed time are sampled
// directly.
EvolveResult evolve(const ModelParams& params, const ParticleCloud& initial, double t,
                    std::int64_t scale_n, std::uint64_t seed,
                    const EvolveOptions& options = {});

// Cloud of round(total_mass * N) particles at a common site.
ParticleCloud point_mass_cloud(double site, double total_mass, std::int64_t scale_n);

struct CompensatorCheck {
    double r0 = 0.0;
    double observed = 0.0;   // pooled count of recorded jumps with r >= r0
    double predicted = 0.0;  // rho * (pooled mass-time integral) * r0^{-1-beta} / (1+beta)
};

// Jump-frequency consistency at a single threshold. The caller pools jumps
// and mass integrals over replicates.
CompensatorCheck compensator_tail_check(const ModelParams& params,
                                        const std::vector<JumpEvent>& pooled_jumps,
                                        double pooled_mass_integral, double r0,
                                        double atom_mass);

struct JumpMassEventScan {
    double gamma = 0.0;
    double lambda_exponent = 0.0;           // 1/(1+beta) - gamma
    std::vector<double> thresholds;         // c grid
    std::vector<double> probabilities;      // P(event) per threshold
    std::vector<double> std_errors;
    std::int64_t replicates = 0;
};

// Probability that some recorded jump (s, x, r) with |x| <= x_window satisfies
// r > c ((t-s) |x|)^{lambda}. Evaluated for all thresholds on the same
// replicates, so the scan is monotone nonincreasing in c by construction.
JumpMassEventScan jump_mass_event_probability(const ModelParams& params,
                                              const ParticleCloud& initial, double t,
                                              double gamma,
                                              const std::vector<double>& thresholds,
                                              double x_window, std::int64_t scale_n,
                                              std::int64_t replicates, std::uint64_t seed,
                                              const EvolveOptions& options = {},
                                              int workers = 1);

} // namespace supersim
