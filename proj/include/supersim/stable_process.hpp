#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "supersim/statistics.hpp"

namespace supersim {

// Spectrally positive stable process of index kappa in (1,2) with Laplace
// transform E exp(-lambda L_t) = exp(t lambda^kappa). Levy density on (0,inf)
// is c_kappa r^{-1-kappa} with c_kappa = kappa (kappa-1) / Gamma(2-kappa).
double stable_levy_constant(double kappa);

// Rate of jumps above the truncation level: c_kappa trunc^{-kappa} / kappa.
double stable_levy_jump_rate(double kappa, double truncation);

// Mean-zero construction drift: minus the expected retained-jump mass per unit
// time, -c_kappa trunc^{1-kappa} / (kappa-1).
double stable_levy_drift_rate(double kappa, double truncation);

// Variance per unit time of the small-jump Gaussian proxy:
// integral of r^2 over the sub-truncation Levy measure, c_kappa trunc^{2-kappa} / (2-kappa).
double stable_levy_smalljump_variance_rate(double kappa, double truncation);

// Simulated path on a uniform mesh: big jumps exact (Pareto sizes above the
// truncation), sub-truncation jumps replaced by their Gaussian proxy, drift
// keeping every marginal mean zero.
struct SpectrallyPositivePath {
    double kappa = 1.5;
    double horizon = 1.0;
    double truncation = 1e-3;
    Eigen::ArrayXd times;                        // mesh, times[0] = 0
    Eigen::ArrayXd values;                       // values[0] = 0
    std::vector<std::pair<double, double>> jumps; // (time, size > truncation)
};

SpectrallyPositivePath sample_path(double kappa, double horizon, double truncation,
                                   double mesh, std::uint64_t seed);

// Sample Laplace functional exp(-lambda L_t) over a path family, with target
// exp(t lambda^kappa).
EstimateRecord empirical_laplace(const std::vector<SpectrallyPositivePath>& paths,
                                 double lambda, double t);

// Martingale property shadow: exp(-lambda L_t) - lambda^kappa int_0^t exp(-lambda L_s) ds
// has expectation 1 for every t. Returns per-checkpoint sample means (target 1).
struct MartingaleResidual {
    std::vector<double> t_grid;
    std::vector<EstimateRecord> records; // estimate = sample mean of the statistic
    double max_abs_residual = 0.0;       // max_t |mean - 1|
};

MartingaleResidual martingale_residual(const std::vector<SpectrallyPositivePath>& paths,
                                       double lambda, const std::vector<double>& t_grid);

// Streaming Monte Carlo over n_paths fresh paths (no storage): Laplace cells
// for every (lambda, checkpoint) pair and martingale cells for every lambda at
// every checkpoint. Used where path families would not fit in memory.
struct LevyMonteCarloSummary {
    std::vector<double> lambdas;
    std::vector<double> checkpoints;
    // Indexed [lambda][checkpoint].
    std::vector<std::vector<EstimateRecord>> laplace;
    std::vector<std::vector<EstimateRecord>> martingale; // target 1
};

// with_martingale=false skips the time integral and samples each checkpoint
// increment in one exact segment, which is much faster when only the Laplace
// cells are wanted; martingale cells are then left empty.
LevyMonteCarloSummary levy_monte_carlo(double kappa, double horizon, double truncation,
                                       double mesh, std::int64_t n_paths,
                                       const std::vector<double>& lambdas,
                                       const std::vector<double>& checkpoints,
                                       std::uint64_t seed, int workers = 1,
                                       bool with_martingale = true);

// Tail of the truncated running supremum: estimates
//   P( sup_{u <= t} L_u 1{ all jumps up to u have size <= y } >= x )
// against the bound (C t / (x y^{kappa-1}))^{x/y}.
struct SupTailCell {
    double t = 0.0, x = 0.0, y = 0.0;
    double empirical_prob = 0.0;
    double std_error = 0.0;
    double bound = 0.0; // filled once C is calibrated
};

double sup_tail_bound(double c_constant, double kappa, double t, double x, double y);

// One simulation batch per (t, y): returns cells for every x in xs evaluated
// on the same path set (monotone in x by construction).
std::vector<SupTailCell> truncated_sup_tail_scan(double kappa, double t,
                                                 const std::vector<double>& xs, double y,
                                                 std::int64_t replicates, double mesh,
                                                 std::uint64_t seed);

// Smallest C making the bound hold on every calibration cell with a nonzero
// empirical probability.
double calibrate_sup_tail_constant(const std::vector<SupTailCell>& cells, double kappa);

} // namespace supersim
