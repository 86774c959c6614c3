#include "supersim/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "supersim/branching.hpp"
#include "supersim/density.hpp"
#include "supersim/parallel.hpp"
#include "supersim/statistics.hpp"

namespace supersim {

namespace {

constexpr double kExponentCap = 1.5;
constexpr double kMinDecades = 1.5;

// Oscillation sup_{|x-z|<=r} |f(x) - f(z)| for every radius (ascending),
// expanding the scanned index range incrementally.
std::vector<double> oscillations_at(const DensityGrid& density, Eigen::Index iz,
                                    const std::vector<double>& radii) {
    std::vector<double> osc(radii.size(), 0.0);
    double fz = density.values(iz);
    double running = 0.0;
    Eigen::Index reached = 0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        auto m = static_cast<Eigen::Index>(std::floor(radii[k] / density.dx + 1e-12));
        for (Eigen::Index d = reached + 1; d <= m; ++d) {
            if (iz - d >= 0)
                running = std::max(running, std::abs(density.values(iz - d) - fz));
            if (iz + d < density.size())
                running = std::max(running, std::abs(density.values(iz + d) - fz));
        }
        reached = std::max(reached, m);
        osc[k] = running;
    }
    return osc;
}

void check_radii(const DensityGrid& density, const std::vector<double>& radii) {
    if (radii.size() < 5) throw std::invalid_argument("need at least 5 radii");
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] < radii[i + 1]))
            throw std::invalid_argument("radii must be strictly increasing");
    if (!(radii.front() > 0.0)) throw std::invalid_argument("radii must be positive");
    if (std::log10(radii.back() / radii.front()) < kMinDecades - 1e-9)
        throw std::invalid_argument("radii must span at least 1.5 decades");
    // Reading scales below the smoothing bandwidth would measure the kernel,
    // not the field.
    if (radii.front() < 2.0 * density.bandwidth - 1e-12)
        throw std::invalid_argument("smallest radius must be at least twice the bandwidth");
}

HolderEstimate fit_exponent(const std::vector<double>& radii, const std::vector<double>& osc,
                            std::uint64_t rng_salt) {
    HolderEstimate estimate;
    estimate.n_scales = static_cast<int>(radii.size());
    for (double v : osc) {
        if (v <= 0.0) {
            estimate.degenerate = true;
            estimate.clamped = true;
            estimate.exponent = kExponentCap;
            estimate.ci_low = kExponentCap;
            estimate.ci_high = kExponentCap;
            return estimate;
        }
    }
    std::vector<double> lx(radii.size()), ly(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) {
        lx[i] = std::log(radii[i]);
        ly[i] = std::log(osc[i]);
    }
    LinearFit fit = linear_fit(lx, ly);
    estimate.fit_r2 = fit.r2;
    estimate.exponent = fit.slope;
    Rng rng = make_rng(splitmix64(rng_salt ^ 0x9e3779b97f4a7c15ULL));
    auto band = bootstrap_slope_band(lx, ly, 0.90, 400, rng);
    estimate.ci_low = band.first;
    estimate.ci_high = band.second;
    if (estimate.exponent < 0.0 || estimate.exponent > kExponentCap) {
        estimate.clamped = true;
        estimate.exponent = std::clamp(estimate.exponent, 0.0, kExponentCap);
    }
    estimate.ci_low = std::clamp(estimate.ci_low, 0.0, kExponentCap);
    estimate.ci_high = std::clamp(estimate.ci_high, 0.0, kExponentCap);
    return estimate;
}

} // namespace

RegularityTargets compute_targets(const ModelParams& params) {
    params.validate();
    if (!params.continuity_regime())
        throw config_error("exponent targets require alpha > 1 + beta");
    RegularityTargets targets;
    targets.eta_c = params.alpha / (1.0 + params.beta) - 1.0;
    double raw = (1.0 + params.alpha) / (1.0 + params.beta) - 1.0;
    targets.eta_bar_c = std::min(raw, 1.0);
    targets.at_gap_boundary = raw >= 1.0;
    targets.optimality = params.optimality_regime();
    return targets;
}

std::vector<double> make_radii(double r_min, double r_max, int n) {
    if (!(r_min > 0.0 && r_max > r_min)) throw std::invalid_argument("invalid radius range");
    if (n < 2) throw std::invalid_argument("need at least 2 radii");
    std::vector<double> radii(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        radii[static_cast<std::size_t>(i)] =
            r_min * std::pow(r_max / r_min, static_cast<double>(i) / static_cast<double>(n - 1));
    return radii;
}

HolderEstimate pointwise_holder(const DensityGrid& density, double z,
                                const std::vector<double>& radii) {
    check_radii(density, radii);
    double r_max = radii.back();
    if (z - r_max < density.x0 - 1e-12 || z + r_max > density.x_max() + 1e-12)
        throw std::invalid_argument("window must contain z with max-radius margin");
    auto iz = static_cast<Eigen::Index>(std::llround((z - density.x0) / density.dx));
    iz = std::clamp<Eigen::Index>(iz, 0, density.size() - 1);
    std::vector<double> osc = oscillations_at(density, iz, radii);
    return fit_exponent(radii, osc, static_cast<std::uint64_t>(iz));
}

HolderEstimate local_holder(const DensityGrid& density, double interval_lo,
                            double interval_hi, const std::vector<double>& radii) {
    check_radii(density, radii);
    if (!(interval_hi > interval_lo))
        throw std::invalid_argument("interval must be non-empty");
    double r_max = radii.back();
    if (interval_lo - r_max < density.x0 - 1e-12 ||
        interval_hi + r_max > density.x_max() + 1e-12)
        throw std::invalid_argument("window must contain the interval with max-radius margin");

    auto j_lo = static_cast<Eigen::Index>(std::ceil((interval_lo - density.x0) / density.dx - 1e-12));
    auto j_hi = static_cast<Eigen::Index>(std::floor((interval_hi - density.x0) / density.dx + 1e-12));
    j_lo = std::clamp<Eigen::Index>(j_lo, 0, density.size() - 1);
    j_hi = std::clamp<Eigen::Index>(j_hi, j_lo, density.size() - 1);

    // Worst-case modulus over the z-grid: L(r) = max_z osc_z(r).
    std::vector<double> worst(radii.size(), 0.0);
    for (Eigen::Index iz = j_lo; iz <= j_hi; ++iz) {
        std::vector<double> osc = oscillations_at(density, iz, radii);
        for (std::size_t k = 0; k < radii.size(); ++k)
            worst[k] = std::max(worst[k], osc[k]);
    }
    return fit_exponent(radii, worst, static_cast<std::uint64_t>(j_lo) * 1315423911ULL +
                                          static_cast<std::uint64_t>(j_hi));
}

ExponentReport exponent_experiment(const ModelParams& params, double t, double z,
                                   std::int64_t scale_n, std::int64_t replicates,
                                   std::uint64_t seed,
                                   const ExponentExperimentOptions& options,
                                   int workers) {
    params.validate();
    if (!params.continuity_regime())
        throw config_error("exponent experiment requires alpha > 1 + beta");
    if (!params.optimality_regime())
        throw config_error("exponent experiment requires beta > (alpha-1)/2");
    if (!(t > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (replicates < 30) throw std::invalid_argument("need at least 30 replicates");
    if (!(options.window_half_width > options.interval_half_width + options.r_max))
        throw std::invalid_argument("window must contain the interval with max-radius margin");

    ExponentReport report;
    report.targets = compute_targets(params);
    report.bandwidth = options.bandwidth_coefficient /
                       std::sqrt(static_cast<double>(scale_n));
    report.radii = make_radii(2.0 * report.bandwidth, options.r_max, options.n_radii);
    report.n_attempted = replicates;

    double window_lo = z - options.window_half_width;
    double window_hi = z + options.window_half_width;

    EvolveOptions evolve_options;
    evolve_options.record_jumps = false;
    evolve_options.population_cap = options.population_cap;
    ParticleCloud initial = point_mass_cloud(z, 1.0, scale_n);

    // Pass one: simulate and estimate densities; retention depends on the
    // ensemble mean at z, so estimates are kept until the floor is known.
    // Each replicate writes only its own slot and the reduction afterwards
    // runs in index order, so the report is independent of the worker count.
    std::vector<DensityGrid> grids(static_cast<std::size_t>(replicates));
    report.per_replicate.resize(static_cast<std::size_t>(replicates));
    auto iz_probe = [&](const DensityGrid& grid) {
        auto iz = static_cast<Eigen::Index>(std::llround((z - grid.x0) / grid.dx));
        return grid.values(std::clamp<Eigen::Index>(iz, 0, grid.size() - 1));
    };
    parallel_replicates(replicates, workers, [&](std::int64_t rep) {
        auto idx = static_cast<std::size_t>(rep);
        ReplicateExponent& entry = report.per_replicate[idx];
        entry.replicate = rep;
        auto rep_seed = derive_seed(seed, StreamModule::regularity,
                                    static_cast<std::uint64_t>(rep));
        EvolveResult run = evolve(params, initial, t, scale_n, rep_seed, evolve_options);
        if (run.censored) {
            entry.censored = true;
            return;
        }
        if (run.cloud.positions.size() == 0) return; // extinct: density zero
        try {
            grids[idx] = kde_density(run.cloud, window_lo, window_hi, options.n_nodes,
                                     report.bandwidth);
            entry.density_at_z = iz_probe(grids[idx]);
        } catch (const insufficient_sample_error&) {
            // surviving mass entirely outside the window: density zero there
        }
    });
    MeanAccumulator mean_at_z;
    for (const auto& entry : report.per_replicate) {
        if (entry.censored) {
            ++report.n_censored;
            continue;
        }
        mean_at_z.add(entry.density_at_z); // extinct replicates count as zero
    }
    if (mean_at_z.count() == 0)
        throw insufficient_sample_error("no replicate produced a density estimate");

    double floor = options.density_floor_fraction * mean_at_z.mean();
    std::vector<double> pointwise_values, local_values;
    for (std::size_t i = 0; i < report.per_replicate.size(); ++i) {
        auto& entry = report.per_replicate[i];
        if (entry.censored || grids[i].size() == 0) continue;
        if (entry.density_at_z < floor) continue;
        entry.retained = true;
        ++report.n_retained;
        entry.pointwise = pointwise_holder(grids[i], z, report.radii);
        entry.local = local_holder(grids[i], z - options.interval_half_width,
                                   z + options.interval_half_width, report.radii);
        pointwise_values.push_back(entry.pointwise.exponent);
        local_values.push_back(entry.local.exponent);
    }
    if (report.n_retained < 30)
        throw insufficient_sample_error("fewer than 30 replicates cleared the density floor");

    report.pointwise_median = median(pointwise_values);
    report.pointwise_iqr =
        quantile(pointwise_values, 0.75) - quantile(pointwise_values, 0.25);
    report.local_median = median(local_values);
    report.local_iqr = quantile(local_values, 0.75) - quantile(local_values, 0.25);

    Rng rng = make_rng(derive_seed(seed, StreamModule::regularity, 0xb00757a9ULL));
    report.ordering_pvalue = bootstrap_median_order_pvalue(
        pointwise_values, local_values, options.bootstrap_resamples, rng);
    return report;
}

} // namespace supersim
