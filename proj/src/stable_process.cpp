#include "supersim/stable_process.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "supersim/errors.hpp"
#include "supersim/parallel.hpp"
#include "supersim/rng.hpp"

namespace supersim {

namespace {

void check_kappa(double kappa) {
    if (!(kappa > 1.0 && kappa < 2.0))
        throw std::invalid_argument("stable index kappa must lie in (1,2)");
}

// Per-step simulation constants for one (kappa, truncation, mesh) triple.
struct StepModel {
    static constexpr int kMantissaCells = 2048;

    double dt = 0.0;
    double jump_rate_dt = 0.0;     // Poisson mean of retained jumps per step
    double drift_dt = 0.0;         // mean-zero compensation per step
    double sigma_dt = 0.0;         // Gaussian proxy std dev per step
    double truncation = 0.0;
    double inv_kappa = 0.0;
    // Dyadic tables for U^{-1/kappa}: pow2_[j] = 2^{j/kappa} and mantissa_[i]
    // interpolating W^{-1/kappa} on W in [1,2]. Paths draw billions of jumps,
    // so the hot draw avoids std::pow; the lerp of the convex W^{-1/kappa}
    // errs upward by at most ~6e-8, keeping every jump above the truncation.
    std::array<double, 65> pow2_{};
    std::vector<double> mantissa_;

    StepModel(double kappa, double truncation_, double mesh) {
        check_kappa(kappa);
        if (!(truncation_ > 0.0)) throw std::invalid_argument("truncation must be positive");
        if (!(mesh > 0.0)) throw std::invalid_argument("mesh must be positive");
        dt = mesh;
        truncation = truncation_;
        inv_kappa = 1.0 / kappa;
        jump_rate_dt = stable_levy_jump_rate(kappa, truncation_) * mesh;
        drift_dt = stable_levy_drift_rate(kappa, truncation_) * mesh;
        sigma_dt = std::sqrt(stable_levy_smalljump_variance_rate(kappa, truncation_) * mesh);
        for (int j = 0; j <= 64; ++j) pow2_[j] = std::exp2(static_cast<double>(j) * inv_kappa);
        mantissa_.resize(kMantissaCells + 1);
        for (int i = 0; i <= kMantissaCells; ++i)
            mantissa_[i] = std::pow(1.0 + static_cast<double>(i) / kMantissaCells, -inv_kappa);
    }

    // Pareto jump above the truncation: trunc * U^{-1/kappa}. With J leading
    // zeros of the raw word and mantissa W in [1,2), U = 2^{-(J+1)} W, so
    // U^{-1/kappa} = 2^{(J+1)/kappa} * W^{-1/kappa}.
    double draw_jump(Rng& rng) const {
        std::uint64_t v = rng();
        while (v == 0) v = rng();
        int lead = std::countl_zero(v);
        std::uint64_t m = v << lead; // top bit set, W = m * 2^{-63}
        auto cell = static_cast<std::size_t>((m >> 52) & 0x7FF);
        double frac = static_cast<double>(m & ((std::uint64_t{1} << 52) - 1)) * 0x1p-52;
        double h = mantissa_[cell] + frac * (mantissa_[cell + 1] - mantissa_[cell]);
        return truncation * pow2_[lead + 1] * h;
    }
};

double standard_normal(Rng& rng) {
    // Box-Muller; one value per call keeps replicate streams stateless.
    double r = std::sqrt(2.0 * exp_draw(rng));
    return r * std::cos(2.0 * 3.141592653589793238462643383279502884 * uniform_open01(rng));
}

} // namespace

double stable_levy_constant(double kappa) {
    check_kappa(kappa);
    return kappa * (kappa - 1.0) / std::tgamma(2.0 - kappa);
}

double stable_levy_jump_rate(double kappa, double truncation) {
    check_kappa(kappa);
    return stable_levy_constant(kappa) * std::pow(truncation, -kappa) / kappa;
}

double stable_levy_drift_rate(double kappa, double truncation) {
    check_kappa(kappa);
    return -stable_levy_constant(kappa) * std::pow(truncation, 1.0 - kappa) / (kappa - 1.0);
}

double stable_levy_smalljump_variance_rate(double kappa, double truncation) {
    check_kappa(kappa);
    return stable_levy_constant(kappa) * std::pow(truncation, 2.0 - kappa) / (2.0 - kappa);
}

SpectrallyPositivePath sample_path(double kappa, double horizon, double truncation,
                                   double mesh, std::uint64_t seed) {
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    auto n_steps = static_cast<Eigen::Index>(std::ceil(horizon / mesh - 1e-12));
    double dt = horizon / static_cast<double>(n_steps);
    StepModel model(kappa, truncation, dt);
    if (horizon >= 1.0) {
        if (model.jump_rate_dt * static_cast<double>(n_steps) < 10.0)
            throw config_error("truncation too coarse: fewer than 10 expected large jumps");
        if (n_steps < 100) throw config_error("mesh too coarse: fewer than 100 steps");
    }

    SpectrallyPositivePath path;
    path.kappa = kappa;
    path.horizon = horizon;
    path.truncation = truncation;
    path.times.resize(n_steps + 1);
    path.values.resize(n_steps + 1);
    path.times(0) = 0.0;
    path.values(0) = 0.0;

    Rng rng = make_rng(seed);
    std::poisson_distribution<int> poisson(model.jump_rate_dt);
    double level = 0.0;
    for (Eigen::Index step = 1; step <= n_steps; ++step) {
        double t_step = dt * static_cast<double>(step);
        level += model.drift_dt + model.sigma_dt * standard_normal(rng);
        int k = poisson(rng);
        for (int j = 0; j < k; ++j) {
            double r = model.draw_jump(rng);
            level += r;
            path.jumps.emplace_back(t_step, r);
        }
        path.times(step) = t_step;
        path.values(step) = level;
    }
    return path;
}

namespace {

Eigen::Index checkpoint_index(const SpectrallyPositivePath& path, double t) {
    if (!(t > 0.0 && t <= path.horizon + 1e-12))
        throw std::invalid_argument("checkpoint outside the path horizon");
    double dt = path.times(1) - path.times(0);
    auto idx = static_cast<Eigen::Index>(std::round(t / dt));
    idx = std::clamp<Eigen::Index>(idx, 1, path.values.size() - 1);
    if (std::abs(path.times(idx) - t) > 0.5 * dt + 1e-12)
        throw std::invalid_argument("checkpoint does not lie on the path mesh");
    return idx;
}

void check_family(const std::vector<SpectrallyPositivePath>& paths) {
    if (paths.empty()) throw std::invalid_argument("empty path family");
    for (const auto& p : paths) {
        if (p.kappa != paths.front().kappa || p.horizon != paths.front().horizon ||
            p.values.size() != paths.front().values.size())
            throw std::invalid_argument("path family mixes kappa, horizon, or mesh");
    }
}

} // namespace

EstimateRecord empirical_laplace(const std::vector<SpectrallyPositivePath>& paths,
                                 double lambda, double t) {
    check_family(paths);
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
    Eigen::Index idx = checkpoint_index(paths.front(), t);
    MeanAccumulator acc;
    for (const auto& p : paths) acc.add(std::exp(-lambda * p.values(idx)));
    EstimateRecord record;
    record.estimate = acc.mean();
    record.std_error = acc.std_error();
    record.target = std::exp(t * std::pow(lambda, paths.front().kappa));
    return record;
}

MartingaleResidual martingale_residual(const std::vector<SpectrallyPositivePath>& paths,
                                       double lambda, const std::vector<double>& t_grid) {
    check_family(paths);
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (t_grid.empty()) throw std::invalid_argument("empty checkpoint grid");
    double kappa = paths.front().kappa;
    double rate = std::pow(lambda, kappa);

    MartingaleResidual out;
    out.t_grid = t_grid;
    std::vector<Eigen::Index> idx;
    idx.reserve(t_grid.size());
    for (double t : t_grid) idx.push_back(checkpoint_index(paths.front(), t));

    std::vector<MeanAccumulator> acc(t_grid.size());
    double dt = paths.front().times(1);
    for (const auto& p : paths) {
        // Trapezoid of exp(-lambda L_s) accumulated along the mesh.
        double integral = 0.0;
        double prev = 1.0;
        std::size_t next_cp = 0;
        for (Eigen::Index s = 1; s < p.values.size() && next_cp < idx.size(); ++s) {
            double cur = std::exp(-lambda * p.values(s));
            integral += 0.5 * dt * (prev + cur);
            prev = cur;
            while (next_cp < idx.size() && idx[next_cp] == s) {
                acc[next_cp].add(cur - rate * integral);
                ++next_cp;
            }
        }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) {
        EstimateRecord rec;
        rec.estimate = acc[i].mean();
        rec.std_error = acc[i].std_error();
        rec.target = 1.0;
        out.records.push_back(rec);
        out.max_abs_residual = std::max(out.max_abs_residual, std::abs(rec.estimate - 1.0));
    }
    return out;
}

LevyMonteCarloSummary levy_monte_carlo(double kappa, double horizon, double truncation,
                                       double mesh, std::int64_t n_paths,
                                       const std::vector<double>& lambdas,
                                       const std::vector<double>& checkpoints,
                                       std::uint64_t seed, int workers,
                                       bool with_martingale) {
    if (n_paths < 2) throw std::invalid_argument("need at least two paths");
    if (lambdas.empty() || checkpoints.empty())
        throw std::invalid_argument("empty lambda or checkpoint grid");
    auto n_steps = static_cast<Eigen::Index>(std::ceil(horizon / mesh - 1e-12));
    double dt = horizon / static_cast<double>(n_steps);
    StepModel model(kappa, truncation, dt);

    std::vector<Eigen::Index> cp_idx;
    for (double t : checkpoints) {
        auto idx = static_cast<Eigen::Index>(std::round(t / dt));
        if (idx < 1 || idx > n_steps || std::abs(dt * idx - t) > 1e-9)
            throw std::invalid_argument("checkpoint does not lie on the path mesh");
        cp_idx.push_back(idx);
    }
    for (std::size_t c = 0; c + 1 < cp_idx.size(); ++c)
        if (cp_idx[c] >= cp_idx[c + 1])
            throw std::invalid_argument("checkpoints must be strictly increasing");

    std::size_t nl = lambdas.size(), nc = checkpoints.size();
    std::vector<double> rate(nl);
    for (std::size_t l = 0; l < nl; ++l) rate[l] = std::pow(lambdas[l], kappa);

    // Without the martingale integral only checkpoint marginals matter, and the
    // increments compose exactly across steps, so one segment per checkpoint
    // gives the same law with far fewer draws.
    std::vector<StepModel> segments;
    if (!with_martingale) {
        double t_prev = 0.0;
        for (double t : checkpoints) {
            segments.emplace_back(kappa, truncation, t - t_prev);
            t_prev = t;
        }
    }

    // Per-path result slots; the reduction below runs in path order, so the
    // summary does not depend on the worker count.
    std::vector<double> lap_slot(static_cast<std::size_t>(n_paths) * nl * nc);
    std::vector<double> mart_slot(with_martingale ? lap_slot.size() : 0);
    parallel_replicates(n_paths, workers, [&](std::int64_t path) {
        Rng rng = make_rng(derive_seed(seed, StreamModule::stable_process,
                                       static_cast<std::uint64_t>(path)));
        std::size_t base = static_cast<std::size_t>(path) * nl * nc;
        if (!with_martingale) {
            double level = 0.0;
            for (std::size_t c = 0; c < nc; ++c) {
                const StepModel& seg = segments[c];
                level += seg.drift_dt + seg.sigma_dt * standard_normal(rng);
                std::poisson_distribution<int> poisson(seg.jump_rate_dt);
                int k = poisson(rng);
                for (int j = 0; j < k; ++j) level += seg.draw_jump(rng);
                for (std::size_t l = 0; l < nl; ++l)
                    lap_slot[base + l * nc + c] = std::exp(-lambdas[l] * level);
            }
            return;
        }
        std::poisson_distribution<int> poisson(model.jump_rate_dt);
        std::vector<double> integral(nl, 0.0), prev(nl, 1.0);
        double level = 0.0;
        std::size_t next_cp = 0;
        for (Eigen::Index step = 1; step <= n_steps; ++step) {
            level += model.drift_dt + model.sigma_dt * standard_normal(rng);
            int k = poisson(rng);
            for (int j = 0; j < k; ++j) level += model.draw_jump(rng);
            for (std::size_t l = 0; l < nl; ++l) {
                double cur = std::exp(-lambdas[l] * level);
                integral[l] += 0.5 * dt * (prev[l] + cur);
                prev[l] = cur;
            }
            while (next_cp < nc && cp_idx[next_cp] == step) {
                for (std::size_t l = 0; l < nl; ++l) {
                    lap_slot[base + l * nc + next_cp] = prev[l];
                    mart_slot[base + l * nc + next_cp] = prev[l] - rate[l] * integral[l];
                }
                ++next_cp;
            }
        }
    });

    LevyMonteCarloSummary out;
    out.lambdas = lambdas;
    out.checkpoints = checkpoints;
    out.laplace.resize(nl);
    out.martingale.resize(nl);
    for (std::size_t l = 0; l < nl; ++l) {
        for (std::size_t c = 0; c < nc; ++c) {
            MeanAccumulator lap, mart;
            for (std::int64_t path = 0; path < n_paths; ++path) {
                std::size_t base = static_cast<std::size_t>(path) * nl * nc;
                lap.add(lap_slot[base + l * nc + c]);
                if (with_martingale) mart.add(mart_slot[base + l * nc + c]);
            }
            EstimateRecord lr;
            lr.estimate = lap.mean();
            lr.std_error = lap.std_error();
            lr.target = std::exp(checkpoints[c] * rate[l]);
            out.laplace[l].push_back(lr);
            if (with_martingale) {
                EstimateRecord mr;
                mr.estimate = mart.mean();
                mr.std_error = mart.std_error();
                mr.target = 1.0;
                out.martingale[l].push_back(mr);
            }
        }
    }
    return out;
}

double sup_tail_bound(double c_constant, double kappa, double t, double x, double y) {
    if (!(x > 0.0 && y > 0.0 && t > 0.0))
        throw std::invalid_argument("sup tail bound needs positive t, x, y");
    return std::pow(c_constant * t / (x * std::pow(y, kappa - 1.0)), x / y);
}

std::vector<SupTailCell> truncated_sup_tail_scan(double kappa, double t,
                                                 const std::vector<double>& xs, double y,
                                                 std::int64_t replicates, double mesh,
                                                 std::uint64_t seed) {
    check_kappa(kappa);
    if (xs.empty()) throw std::invalid_argument("empty x grid");
    if (!(y > 0.0)) throw std::invalid_argument("jump cap y must be positive");
    if (replicates < 100) throw std::invalid_argument("need at least 100 replicates");
    auto n_steps = static_cast<Eigen::Index>(std::ceil(t / mesh - 1e-12));
    double dt = t / static_cast<double>(n_steps);
    // Jumps below y matter only through the Gaussian proxy, so the truncation
    // can sit well below y without simulating the full default resolution.
    double truncation = std::min(0.02, 0.1 * y);
    StepModel model(kappa, truncation, dt);

    std::vector<std::int64_t> hits(xs.size(), 0);
    for (std::int64_t rep = 0; rep < replicates; ++rep) {
        Rng rng = make_rng(derive_seed(seed, StreamModule::stable_process,
                                       static_cast<std::uint64_t>(rep)));
        std::poisson_distribution<int> poisson(model.jump_rate_dt);
        double level = 0.0;
        double running_sup = 0.0; // sup of L while no jump above y has occurred
        bool alive = true;
        for (Eigen::Index step = 1; step <= n_steps && alive; ++step) {
            level += model.drift_dt + model.sigma_dt * standard_normal(rng);
            int k = poisson(rng);
            for (int j = 0; j < k; ++j) {
                double r = model.draw_jump(rng);
                if (r > y) {
                    alive = false; // the capped supremum freezes here
                    break;
                }
                level += r;
            }
            if (alive) running_sup = std::max(running_sup, level);
        }
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (running_sup >= xs[i]) ++hits[i];
    }

    std::vector<SupTailCell> cells;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        SupTailCell cell;
        cell.t = t;
        cell.x = xs[i];
        cell.y = y;
        cell.empirical_prob = static_cast<double>(hits[i]) / static_cast<double>(replicates);
        cell.std_error = std::sqrt(std::max(
            cell.empirical_prob * (1.0 - cell.empirical_prob) / static_cast<double>(replicates),
            1.0 / (static_cast<double>(replicates) * static_cast<double>(replicates))));
        cells.push_back(cell);
    }
    return cells;
}

double calibrate_sup_tail_constant(const std::vector<SupTailCell>& cells, double kappa) {
    check_kappa(kappa);
    if (cells.empty()) throw std::invalid_argument("no calibration cells");
    double c = 0.0;
    for (const auto& cell : cells) {
        if (cell.empirical_prob <= 0.0) continue; // zero cells impose no constraint
        // Smallest C with (C t / (x y^{kappa-1}))^{x/y} >= empirical_prob.
        double required = (cell.x * std::pow(cell.y, kappa - 1.0) / cell.t) *
                          std::pow(cell.empirical_prob, cell.y / cell.x);
        c = std::max(c, required);
    }
    if (c == 0.0) throw insufficient_sample_error("all calibration cells were empty");
    return c;
}

} // namespace supersim
