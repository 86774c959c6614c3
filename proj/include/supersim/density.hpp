#pragma once

#include <cstdint>
#include <vector>

#include "supersim/kernel.hpp"
#include "supersim/model.hpp"

namespace supersim {

// Sentinel: pick the bandwidth by the normal-reference rule
// 1.06 sigma_hat n_window^{-1/5}, floored at twice the node spacing.
inline constexpr double kde_auto_bandwidth = -1.0;

// Gaussian kernel density estimate of the cloud on n_nodes uniform nodes over
// [window_lo, window_hi]. Particles outside the window still contribute
// through their kernel tails. Every bandwidth is floored at 2 dx to prevent
// spiky aliasing.
DensityGrid kde_density(const ParticleCloud& cloud, double window_lo, double window_hi,
                        Eigen::Index n_nodes, double bandwidth = kde_auto_bandwidth);

// Expected-density component: (mu * p_t)(x) for the initial measure mu.
// Subtracting it isolates the jump-driven fluctuation of the density field.
double z1_component(const ModelParams& params, const ParticleCloud& mu, double t, double x);
DensityGrid z1_component_grid(const ModelParams& params, const ParticleCloud& mu, double t,
                              double window_lo, double window_hi, Eigen::Index n_nodes);

// Bandwidth rule for refinement scans: h = atoms_per_bandwidth / N keeps the
// expected atom count under one kernel window fixed, so growing N buys pure
// resolution at constant local count noise. Peaks of an unbounded density
// then grow with the resolution while bounded densities plateau.
double refinement_bandwidth(std::int64_t scale_n, double atoms_per_bandwidth = 30.0);

struct RefineMaxRow {
    std::int64_t scale_n = 0;
    double bandwidth = 0.0;
    double median_max = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    std::int64_t replicates = 0;
};

// Median (and quartiles) over replicates of the window maximum of the KDE,
// one row per particle scale, starting from a unit point mass at the origin
// re-atomized at each scale. In the bounded-density regime the medians
// stabilize as N grows; in the unbounded regime they keep increasing.
std::vector<RefineMaxRow> refine_max_scan(const ModelParams& params, double t,
                                          double window_lo, double window_hi,
                                          Eigen::Index n_nodes,
                                          const std::vector<std::int64_t>& scales,
                                          std::int64_t replicates, std::uint64_t seed,
                                          int workers = 1);

} // namespace supersim
