#include "supersim/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "supersim/branching.hpp"
#include "supersim/errors.hpp"
#include "supersim/parallel.hpp"
#include "supersim/statistics.hpp"

namespace supersim {

namespace {

constexpr double kSqrt2Pi = 2.506628274631000502415765284811;

} // namespace

DensityGrid kde_density(const ParticleCloud& cloud, double window_lo, double window_hi,
                        Eigen::Index n_nodes, double bandwidth) {
    if (!(window_hi > window_lo)) throw std::invalid_argument("window must be non-empty");
    if (n_nodes < 8) throw std::invalid_argument("need at least 8 grid nodes");
    if (cloud.positions.size() == 0) throw std::invalid_argument("empty particle cloud");

    DensityGrid grid;
    grid.x0 = window_lo;
    grid.dx = (window_hi - window_lo) / static_cast<double>(n_nodes - 1);
    grid.values = Eigen::ArrayXd::Zero(n_nodes);
    grid.n_particles = cloud.positions.size();

    double h = bandwidth;
    if (h == kde_auto_bandwidth) {
        // Normal-reference rule over the particles inside the window.
        MeanAccumulator acc;
        for (Eigen::Index i = 0; i < cloud.positions.size(); ++i) {
            double x = cloud.positions(i);
            if (x >= window_lo && x <= window_hi) acc.add(x);
        }
        if (acc.count() == 0)
            throw insufficient_sample_error("window excludes every particle");
        double sigma = std::sqrt(acc.variance());
        h = 1.06 * sigma * std::pow(static_cast<double>(acc.count()), -0.2);
    } else if (!(h > 0.0)) {
        throw std::invalid_argument("bandwidth must be positive or AUTO");
    }
    h = std::max(h, 2.0 * grid.dx); // spiky-aliasing floor
    grid.bandwidth = h;

    // Kernel support is cut at 8 h (relative tail mass under 1e-14).
    double reach = 8.0 * h;
    double coeff = cloud.atom_mass / (h * kSqrt2Pi);
    double inv_h = 1.0 / h;
    bool touched = false;
    for (Eigen::Index i = 0; i < cloud.positions.size(); ++i) {
        double x = cloud.positions(i);
        if (x < window_lo - reach || x > window_hi + reach) continue;
        touched = true;
        auto j_lo = static_cast<Eigen::Index>(std::ceil((x - reach - window_lo) / grid.dx));
        auto j_hi = static_cast<Eigen::Index>(std::floor((x + reach - window_lo) / grid.dx));
        j_lo = std::max<Eigen::Index>(j_lo, 0);
        j_hi = std::min<Eigen::Index>(j_hi, n_nodes - 1);
        for (Eigen::Index j = j_lo; j <= j_hi; ++j) {
            double z = (grid.x0 + grid.dx * static_cast<double>(j) - x) * inv_h;
            grid.values(j) += coeff * std::exp(-0.5 * z * z);
        }
    }
    if (!touched) throw insufficient_sample_error("window excludes every particle");
    return grid;
}

double z1_component(const ModelParams& params, const ParticleCloud& mu, double t, double x) {
    params.validate();
    StableKernel kernel(KernelConfig{.alpha = params.alpha});
    return semigroup_apply(kernel, mu, t, x);
}

DensityGrid z1_component_grid(const ModelParams& params, const ParticleCloud& mu, double t,
                              double window_lo, double window_hi, Eigen::Index n_nodes) {
    params.validate();
    if (!(window_hi > window_lo)) throw std::invalid_argument("window must be non-empty");
    if (n_nodes < 8) throw std::invalid_argument("need at least 8 grid nodes");
    StableKernel kernel(KernelConfig{.alpha = params.alpha});
    DensityGrid grid;
    grid.x0 = window_lo;
    grid.dx = (window_hi - window_lo) / static_cast<double>(n_nodes - 1);
    grid.values.resize(n_nodes);
    grid.n_particles = mu.positions.size();
    for (Eigen::Index j = 0; j < n_nodes; ++j)
        grid.values(j) = semigroup_apply(kernel, mu, t, grid.x_at(j));
    return grid;
}

double refinement_bandwidth(std::int64_t scale_n, double atoms_per_bandwidth) {
    if (scale_n < 1) throw std::invalid_argument("scale must be positive");
    if (!(atoms_per_bandwidth > 0.0))
        throw std::invalid_argument("atoms per bandwidth must be positive");
    return atoms_per_bandwidth / static_cast<double>(scale_n);
}

std::vector<RefineMaxRow> refine_max_scan(const ModelParams& params, double t,
                                          double window_lo, double window_hi,
                                          Eigen::Index n_nodes,
                                          const std::vector<std::int64_t>& scales,
                                          std::int64_t replicates, std::uint64_t seed,
                                          int workers) {
    params.validate();
    if (!params.density_regime())
        throw config_error("density refinement requires d < alpha/beta");
    if (scales.empty()) throw std::invalid_argument("empty scale list");
    if (replicates < 3) throw std::invalid_argument("need at least 3 replicates");
    double dx = (window_hi - window_lo) / static_cast<double>(n_nodes - 1);
    for (std::int64_t n : scales)
        if (refinement_bandwidth(n) < 2.0 * dx)
            throw std::invalid_argument("grid too coarse for the finest refinement bandwidth");

    std::vector<RefineMaxRow> rows;
    EvolveOptions evolve_options;
    evolve_options.record_jumps = false;
    for (std::size_t s = 0; s < scales.size(); ++s) {
        std::int64_t n = scales[s];
        ParticleCloud initial = point_mass_cloud(0.0, 1.0, n);
        double h = refinement_bandwidth(n);
        std::vector<double> slot(static_cast<std::size_t>(replicates),
                                 std::numeric_limits<double>::quiet_NaN());
        parallel_replicates(replicates, workers, [&](std::int64_t rep) {
            // Stream id mixes the scale index and replicate so every cell of
            // the scan draws an independent stream.
            auto rep_seed = derive_seed(seed, StreamModule::density,
                                        (static_cast<std::uint64_t>(s) << 32) |
                                            static_cast<std::uint64_t>(rep));
            EvolveResult run = evolve(params, initial, t, n, rep_seed, evolve_options);
            if (run.censored || run.cloud.positions.size() == 0) return;
            bool in_window = false;
            for (Eigen::Index i = 0; i < run.cloud.positions.size() && !in_window; ++i)
                in_window = run.cloud.positions(i) >= window_lo - 8.0 * h &&
                            run.cloud.positions(i) <= window_hi + 8.0 * h;
            if (!in_window) return;
            DensityGrid grid = kde_density(run.cloud, window_lo, window_hi, n_nodes, h);
            slot[static_cast<std::size_t>(rep)] = grid.values.maxCoeff();
        });
        std::vector<double> maxima;
        for (double v : slot)
            if (!std::isnan(v)) maxima.push_back(v);
        if (maxima.size() < 3)
            throw insufficient_sample_error("too few surviving replicates in refinement scan");
        RefineMaxRow row;
        row.scale_n = n;
        row.bandwidth = h;
        row.median_max = median(maxima);
        row.q25 = quantile(maxima, 0.25);
        row.q75 = quantile(maxima, 0.75);
        row.replicates = static_cast<std::int64_t>(maxima.size());
        rows.push_back(row);
    }
    return rows;
}

} // namespace supersim
