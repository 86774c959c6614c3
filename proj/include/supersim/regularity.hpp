#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "supersim/model.hpp"

namespace supersim {

// Predicted Holder exponents of the density at a fixed time (d = 1):
// eta_c = alpha/(1+beta) - 1 governs the local (uniform over small intervals)
// modulus, eta_bar_c = min((1+alpha)/(1+beta) - 1, 1) the pointwise modulus at
// a given spatial point. Requires the continuity regime alpha > 1 + beta.
struct RegularityTargets {
    double eta_c = 0.0;
    double eta_bar_c = 0.0;
    bool optimality = false;     // pointwise target sharp iff beta > (alpha-1)/2
    bool at_gap_boundary = false; // eta_bar_c hit the cap 1
};

RegularityTargets compute_targets(const ModelParams& params);

struct HolderEstimate {
    double exponent = 0.0;
    double ci_low = 0.0;      // 90% bootstrap band over scale subsets
    double ci_high = 0.0;
    double fit_r2 = 0.0;
    int n_scales = 0;
    bool degenerate = false;  // zero oscillation at some scale
    bool clamped = false;     // raw slope left [0, 1.5]
};

// Geometric radii grid from r_min to r_max (inclusive), n points.
std::vector<double> make_radii(double r_min, double r_max, int n);

// Slope of log osc(r) against log r at a single point z, where
// osc(r) = sup_{|x-z| <= r} |f(x) - f(z)| over grid nodes. Radii must number
// at least 5, span at least 1.5 decades, and start no lower than twice the
// grid bandwidth (so KDE smoothness is not read as path smoothness).
HolderEstimate pointwise_holder(const DensityGrid& density, double z,
                                const std::vector<double>& radii);

// Same slope fit applied to the worst-case modulus over a z-grid in the
// interval: L(r) = max_z osc_z(r).
HolderEstimate local_holder(const DensityGrid& density, double interval_lo,
                            double interval_hi, const std::vector<double>& radii);

struct ExponentExperimentOptions {
    double window_half_width = 0.8;   // estimation window around z
    double interval_half_width = 0.5; // local-modulus interval around z
    Eigen::Index n_nodes = 2048;
    // KDE bandwidth h = coeff * N^{-1/2}: tied to the particle scale so the
    // admissible radii (from 2h up) can span 1.5 decades below r_max.
    double bandwidth_coefficient = 1.2;
    double r_max = 0.25;
    int n_radii = 12;
    double density_floor_fraction = 0.1; // retain if f(z) >= fraction * mean f(z)
    std::int64_t population_cap = 10'000'000;
    int bootstrap_resamples = 2000;
};

struct ReplicateExponent {
    std::int64_t replicate = 0;
    double density_at_z = 0.0;
    bool retained = false;
    bool censored = false;
    HolderEstimate pointwise;
    HolderEstimate local;
};

struct ExponentReport {
    RegularityTargets targets;
    double bandwidth = 0.0;
    std::vector<double> radii;
    std::int64_t n_attempted = 0;
    std::int64_t n_retained = 0;
    std::int64_t n_censored = 0;
    double pointwise_median = 0.0;
    double pointwise_iqr = 0.0;
    double local_median = 0.0;
    double local_iqr = 0.0;
    // One-sided bootstrap p-value for median(pointwise) <= median(local);
    // small values support the predicted pointwise > local ordering.
    double ordering_pvalue = 1.0;
    std::vector<ReplicateExponent> per_replicate;
};

// End-to-end exponent measurement: simulate replicates from a point mass,
// estimate the density by KDE, keep replicates whose density at z clears the
// floor, and report pointwise and local exponent medians against the targets.
// Requires the continuity and optimality regimes.
ExponentReport exponent_experiment(const ModelParams& params, double t, double z,
                                   std::int64_t scale_n, std::int64_t replicates,
                                   std::uint64_t seed,
                                   const ExponentExperimentOptions& options = {},
                                   int workers = 1);

} // namespace supersim
