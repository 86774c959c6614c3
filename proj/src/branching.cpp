#include "supersim/branching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "supersim/parallel.hpp"
#include "supersim/statistics.hpp"

namespace supersim {

namespace {

// Mutable particle state with lazy motion: positions are advanced to the
// current time only when an event touches the particle.
struct SimState {
    std::vector<double> pos;
    std::vector<double> t_last;

    std::size_t size() const { return pos.size(); }

    void touch(std::size_t i, double now, const StableIncrementSampler& motion, Rng& rng) {
        double elapsed = now - t_last[i];
        if (elapsed > 0.0) {
            pos[i] += motion.increment(rng, elapsed);
            t_last[i] = now;
        }
    }

    void remove(std::size_t i) {
        pos[i] = pos.back();
        t_last[i] = t_last.back();
        pos.pop_back();
        t_last.pop_back();
    }
};

} // namespace

ParticleCloud point_mass_cloud(double site, double total_mass, std::int64_t scale_n) {
    if (!(total_mass > 0.0)) throw std::invalid_argument("total mass must be positive");
    if (scale_n < 1) throw std::invalid_argument("scale_n must be positive");
    auto count = static_cast<Eigen::Index>(std::llround(total_mass * static_cast<double>(scale_n)));
    if (count < 1) throw std::invalid_argument("total mass below one atom at this scale");
    ParticleCloud cloud;
    cloud.atom_mass = 1.0 / static_cast<double>(scale_n);
    cloud.positions = Eigen::ArrayXd::Constant(count, site);
    return cloud;
}

EvolveResult evolve(const ModelParams& params, const ParticleCloud& initial, double t,
                    std::int64_t scale_n, std::uint64_t seed, const EvolveOptions& options) {
    params.validate();
    if (!(t > 0.0)) throw std::invalid_argument("evolve horizon must be positive");
    if (scale_n < 1000) throw config_error("particle scale must be at least 1000");
    if (initial.positions.size() == 0) throw std::invalid_argument("empty initial cloud");
    if (options.mass_checkpoints < 2) throw std::invalid_argument("need at least 2 checkpoints");

    double n_scale = static_cast<double>(scale_n);
    double atom_mass = 1.0 / n_scale;
    // Branch rate per particle; the per-event offspring law is N-independent.
    double branch_rate = params.b * (1.0 + params.beta) * std::pow(n_scale, params.beta);
    double birth_rate = std::max(params.a, 0.0);
    double death_rate = std::max(-params.a, 0.0);
    double rate_per_particle = branch_rate + birth_rate + death_rate;

    double record_threshold = options.jump_record_threshold > 0.0
                                  ? options.jump_record_threshold
                                  : 5.0 * atom_mass;
    auto record_count = static_cast<std::int64_t>(std::ceil(record_threshold * n_scale - 1e-9));
    record_count = std::max<std::int64_t>(record_count, 2);

    StableIncrementSampler motion(params.alpha);
    OffspringDistribution offspring(params.beta);
    Rng rng = make_rng(seed);

    SimState state;
    state.pos.assign(initial.positions.data(),
                     initial.positions.data() + initial.positions.size());
    state.t_last.assign(state.size(), 0.0);

    EvolveResult result;
    result.mass_series.reserve(static_cast<std::size_t>(options.mass_checkpoints));
    double cp_step = t / static_cast<double>(options.mass_checkpoints - 1);
    int next_cp = 0;

    auto record_mass_until = [&](double now) {
        while (next_cp < options.mass_checkpoints &&
               cp_step * static_cast<double>(next_cp) <= now + 1e-15) {
            result.mass_series.emplace_back(cp_step * static_cast<double>(next_cp),
                                            atom_mass * static_cast<double>(state.size()));
            ++next_cp;
        }
    };

    double now = 0.0;
    record_mass_until(0.0);
    while (!state.pos.empty()) {
        double total_rate = rate_per_particle * static_cast<double>(state.size());
        double t_next = rate_per_particle > 0.0 ? now + exp_draw(rng) / total_rate : t;
        if (t_next >= t) {
            result.mass_time_integral += (t - now) * atom_mass * static_cast<double>(state.size());
            record_mass_until(t);
            now = t;
            break;
        }
        result.mass_time_integral += (t_next - now) * atom_mass * static_cast<double>(state.size());
        record_mass_until(t_next);
        now = t_next;

        auto i = static_cast<std::size_t>(uniform_open01(rng) * static_cast<double>(state.size()));
        if (i >= state.size()) i = state.size() - 1;
        state.touch(i, now, motion, rng);

        double u = uniform_open01(rng) * rate_per_particle;
        if (u < branch_rate) {
            int k = offspring.sample(rng);
            if (k == 0) {
                state.remove(i);
            } else if (k >= 2) {
                if (options.record_jumps && k >= record_count)
                    result.jumps.push_back(
                        {now, state.pos[i], static_cast<double>(k) * atom_mass});
                double site = state.pos[i];
                for (int c = 1; c < k; ++c) {
                    state.pos.push_back(site);
                    state.t_last.push_back(now);
                }
            }
        } else if (u < branch_rate + birth_rate) {
            state.pos.push_back(state.pos[i]);
            state.t_last.push_back(now);
        } else {
            state.remove(i);
        }

        if (static_cast<std::int64_t>(state.size()) > options.population_cap) {
            result.censored = true;
            result.censored_at = now;
            break;
        }
    }

    if (state.pos.empty()) record_mass_until(t); // extinction: remaining checkpoints are zero

    if (!result.censored) {
        for (std::size_t i = 0; i < state.size(); ++i) state.touch(i, t, motion, rng);
        result.cloud.time = t;
    } else {
        result.cloud.time = result.censored_at;
    }
    result.cloud.atom_mass = atom_mass;
    result.cloud.positions =
        Eigen::Map<const Eigen::ArrayXd>(state.pos.data(),
                                         static_cast<Eigen::Index>(state.pos.size()));
    return result;
}

CompensatorCheck compensator_tail_check(const ModelParams& params,
                                        const std::vector<JumpEvent>& pooled_jumps,
                                        double pooled_mass_integral, double r0,
                                        double atom_mass) {
    params.validate();
    if (!(r0 > 0.0)) throw std::invalid_argument("jump threshold r0 must be positive");
    if (r0 < 10.0 * atom_mass)
        throw resolution_error("r0 below ten atom masses cannot be resolved at this scale");
    CompensatorCheck check;
    check.r0 = r0;
    for (const auto& jump : pooled_jumps)
        if (jump.r >= r0) check.observed += 1.0;
    check.predicted = params.jump_intensity_rho() * pooled_mass_integral *
                      std::pow(r0, -1.0 - params.beta) / (1.0 + params.beta);
    return check;
}

JumpMassEventScan jump_mass_event_probability(const ModelParams& params,
                                              const ParticleCloud& initial, double t,
                                              double gamma,
                                              const std::vector<double>& thresholds,
                                              double x_window, std::int64_t scale_n,
                                              std::int64_t replicates, std::uint64_t seed,
                                              const EvolveOptions& options, int workers) {
    params.validate();
    if (!params.continuity_regime())
        throw config_error("jump-mass event analysis requires alpha > 1 + beta");
    double inv = 1.0 / (1.0 + params.beta);
    if (!(gamma > 0.0 && gamma < inv))
        throw config_error("gamma must lie in (0, 1/(1+beta))");
    if (thresholds.empty()) throw std::invalid_argument("empty threshold grid");
    if (replicates < 2) throw std::invalid_argument("need at least 2 replicates");

    JumpMassEventScan scan;
    scan.gamma = gamma;
    scan.lambda_exponent = inv - gamma;
    scan.thresholds = thresholds;
    scan.replicates = replicates;

    std::vector<double> worst_slot(static_cast<std::size_t>(replicates), 0.0);
    parallel_replicates(replicates, workers, [&](std::int64_t rep) {
        auto rep_seed = derive_seed(seed, StreamModule::superprocess,
                                    static_cast<std::uint64_t>(rep));
        EvolveResult run = evolve(params, initial, t, scale_n, rep_seed, options);
        // Worst normalized jump in the window; one pass serves every threshold.
        double worst = 0.0;
        for (const auto& jump : run.jumps) {
            if (std::abs(jump.x) > x_window) continue;
            double scale = std::pow((t - jump.s) * std::abs(jump.x), scan.lambda_exponent);
            if (scale > 0.0) worst = std::max(worst, jump.r / scale);
        }
        worst_slot[static_cast<std::size_t>(rep)] = worst;
    });
    std::vector<std::int64_t> hits(thresholds.size(), 0);
    for (std::int64_t rep = 0; rep < replicates; ++rep)
        for (std::size_t i = 0; i < thresholds.size(); ++i)
            if (worst_slot[static_cast<std::size_t>(rep)] > thresholds[i]) ++hits[i];

    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        double p = static_cast<double>(hits[i]) / static_cast<double>(replicates);
        scan.probabilities.push_back(p);
        scan.std_errors.push_back(std::sqrt(
            std::max(p * (1.0 - p), 1.0 / static_cast<double>(replicates)) /
            static_cast<double>(replicates)));
    }
    return scan;
}

} // namespace supersim
