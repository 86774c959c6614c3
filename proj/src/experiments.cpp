#include "supersim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "supersim/branching.hpp"
#include "supersim/density.hpp"
#include "supersim/errors.hpp"
#include "supersim/io.hpp"
#include "supersim/kernel.hpp"
#include "supersim/loglap.hpp"
#include "supersim/parallel.hpp"
#include "supersim/regularity.hpp"
#include "supersim/rng.hpp"
#include "supersim/stable_process.hpp"
#include "supersim/statistics.hpp"

namespace supersim {

namespace {

const std::set<std::string> kExperiments = {
    "kernel-table", "stable-check", "laplace-duality", "compensator",
    "jump-tail",    "dichotomy",    "exponents"};

Json config_echo(const ExperimentConfig& c) {
    Json echo;
    echo["experiment"] = c.experiment;
    echo["alpha"] = c.params.alpha;
    echo["beta"] = c.params.beta;
    echo["a"] = c.params.a;
    echo["b"] = c.params.b;
    echo["t"] = c.t;
    echo["n_particles"] = c.n_particles;
    echo["replicates"] = c.replicates;
    echo["seed"] = c.seed;
    echo["out"] = c.out.string();
    echo["workers"] = c.workers;
    echo["truncation"] = c.truncation;
    echo["mesh"] = c.mesh;
    return echo;
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, StreamModule module,
                                        std::int64_t count) {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i)
        seeds.push_back(derive_seed(master, module, static_cast<std::uint64_t>(i)));
    return seeds;
}

struct RunnerResult {
    std::string summary;
    bool pass = true;
    std::vector<std::uint64_t> replicate_seeds;
};

void add_check(RunnerResult& r, bool pass, const std::string& label,
               const std::string& detail) {
    r.summary += summary_line(pass, label, detail);
    r.pass = r.pass && pass;
}

RunnerResult run_kernel_table(const ExperimentConfig& c) {
    StableKernel kernel(KernelConfig{c.params.alpha});
    const double lo = -10.0, step = 0.05;
    const int n = 401;

    std::string csv = "x,p1_value\n";
    double quad_gap = 0.0;
    for (int i = 0; i < n; ++i) {
        double x = lo + step * i;
        double p = kernel.density_p1(x);
        csv += csv_row({format_double(x), format_double(p)});
        quad_gap = std::max(quad_gap, std::abs(p - kernel.density_p1_quadrature(x)));
    }
    write_text_file(c.out / "kernel_table.csv", csv);

    double ck_gap = chapman_kolmogorov_gap(kernel, 0.5 * c.t, 0.5 * c.t, 60.0, 0.05, 5.0);

    RunnerResult r;
    add_check(r, quad_gap <= 1e-8, "closed-form vs quadrature",
              "sup gap " + format_double(quad_gap) + " on [-10,10]");
    add_check(r, ck_gap <= 1e-4, "semigroup property",
              "convolution gap " + format_double(ck_gap) + " at t = " + format_double(c.t));
    return r;
}

RunnerResult run_stable_check(const ExperimentConfig& c) {
    double kappa = 1.0 + c.params.beta;
    auto n_steps = static_cast<std::int64_t>(std::ceil(c.t / c.mesh - 1e-12));
    double dt = c.t / static_cast<double>(n_steps);
    std::vector<std::int64_t> idxs = {std::max<std::int64_t>(1, n_steps / 4),
                                      std::max<std::int64_t>(1, n_steps / 2), n_steps};
    idxs.erase(std::unique(idxs.begin(), idxs.end()), idxs.end());
    std::vector<double> checkpoints;
    for (auto idx : idxs) checkpoints.push_back(dt * static_cast<double>(idx));
    std::vector<double> lambdas = {0.5, 1.0, 2.0};

    LevyMonteCarloSummary mc =
        levy_monte_carlo(kappa, c.t, c.truncation, c.mesh, c.replicates, lambdas,
                         checkpoints, c.seed, c.workers);

    Json records = Json::array();
    bool laplace_ok = true, martingale_ok = true;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        for (std::size_t k = 0; k < checkpoints.size(); ++k) {
            const EstimateRecord& lap = mc.laplace[l][k];
            const EstimateRecord& mart = mc.martingale[l][k];
            laplace_ok = laplace_ok && std::abs(lap.z_score()) <= 3.0;
            martingale_ok = martingale_ok && std::abs(mart.z_score()) <= 3.0;
            Json lr;
            lr["statistic"] = "laplace lambda=" + format_double(lambdas[l]) +
                              " t=" + format_double(checkpoints[k]);
            lr["estimate"] = lap.estimate;
            lr["std_err"] = lap.std_error;
            lr["target"] = lap.target;
            records.push_back(lr);
            Json mr;
            mr["statistic"] = "martingale lambda=" + format_double(lambdas[l]) +
                              " t=" + format_double(checkpoints[k]);
            mr["estimate"] = mart.estimate;
            mr["std_err"] = mart.std_error;
            mr["target"] = mart.target;
            records.push_back(mr);
        }
    }
    write_json_file(c.out / "statistics.json", records);

    std::string csv = "path,time,value\n";
    auto n_export = std::min<std::int64_t>(3, c.replicates);
    for (std::int64_t p = 0; p < n_export; ++p) {
        SpectrallyPositivePath path =
            sample_path(kappa, c.t, c.truncation, c.mesh,
                        derive_seed(c.seed, StreamModule::stable_process,
                                    static_cast<std::uint64_t>(p)));
        for (std::size_t i = 0; i < path.times.size(); ++i)
            csv += csv_row({std::to_string(p), format_double(path.times[i]),
                            format_double(path.values[i])});
    }
    write_text_file(c.out / "paths.csv", csv);

    RunnerResult r;
    r.replicate_seeds = derive_seeds(c.seed, StreamModule::stable_process, c.replicates);
    add_check(r, laplace_ok, "one-sided stable law",
              "all Laplace cells within 3 SE of exp(t lambda^kappa)");
    add_check(r, martingale_ok, "exponential martingale",
              "all cells within 3 SE of 1");
    return r;
}

RunnerResult run_laplace_duality(const ExperimentConfig& c) {
    ParticleCloud initial = point_mass_cloud(0.0, 1.0, c.n_particles);
    DualityReport report =
        laplace_functional_compare(c.params, initial, standard_bump, 1.0, c.t,
                                   c.n_particles, c.replicates, c.seed, 4096, {},
                                   c.workers);

    Json out;
    out["mc_mean"] = report.mc_mean;
    out["mc_se"] = report.mc_se;
    out["pde_target"] = report.pde_target;
    out["pde_refinement_gap"] = report.pde_refinement_gap;
    out["wrap_budget"] = report.wrap_budget;
    out["replicates"] = report.replicates;
    out["censored"] = report.censored;
    write_json_file(c.out / "duality.json", out);

    double half_width = loglap_default_half_width(c.params.alpha, c.t, 1.0);
    FieldState u = solve_loglap(c.params, field_from_function(half_width, 4096, standard_bump),
                                c.t);
    std::string csv = "x,u\n";
    for (Eigen::Index j = 0; j < u.size(); ++j)
        csv += csv_row({format_double(u.x_at(j)), format_double(u.values(j))});
    write_text_file(c.out / "pde_snapshot.csv", csv);

    double gap = std::abs(report.mc_mean - report.pde_target);
    double allowance = 3.0 * report.mc_se + report.pde_refinement_gap + report.wrap_budget;
    RunnerResult r;
    r.replicate_seeds = derive_seeds(c.seed, StreamModule::loglap, c.replicates);
    add_check(r, gap <= allowance, "Laplace-functional duality",
              "|MC - PDE| = " + format_double(gap) + " vs allowance " +
                  format_double(allowance));
    return r;
}

RunnerResult run_compensator(const ExperimentConfig& c) {
    struct Slot {
        double total_mass = 0.0;
        double time = 0.0;
        double mass_integral = 0.0;
        bool censored = false;
        std::vector<JumpEvent> jumps;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(c.replicates));
    ParticleCloud initial = point_mass_cloud(0.0, 1.0, c.n_particles);
    parallel_replicates(c.replicates, c.workers, [&](std::int64_t rep) {
        auto rep_seed = derive_seed(c.seed, StreamModule::superprocess,
                                    static_cast<std::uint64_t>(rep));
        EvolveResult run = evolve(c.params, initial, c.t, c.n_particles, rep_seed);
        Slot& slot = slots[static_cast<std::size_t>(rep)];
        slot.total_mass = run.cloud.total_mass();
        slot.time = run.cloud.time;
        slot.mass_integral = run.mass_time_integral;
        slot.censored = run.censored;
        slot.jumps = std::move(run.jumps);
    });

    std::string ndjson, jumps_csv = "s,x,r\n";
    std::vector<JumpEvent> pooled;
    double pooled_integral = 0.0;
    std::int64_t n_censored = 0;
    for (std::int64_t rep = 0; rep < c.replicates; ++rep) {
        const Slot& slot = slots[static_cast<std::size_t>(rep)];
        Json line;
        line["replicate"] = rep;
        line["t"] = slot.time;
        line["total_mass"] = slot.total_mass;
        line["n_jumps"] = slot.jumps.size();
        ndjson += line.dump() + "\n";
        if (slot.censored) {
            ++n_censored;
            continue; // partial replicate: excluded from pooled statistics
        }
        pooled_integral += slot.mass_integral;
        for (const auto& jump : slot.jumps) {
            jumps_csv += csv_row({format_double(jump.s), format_double(jump.x),
                                  format_double(jump.r)});
            pooled.push_back(jump);
        }
    }
    write_text_file(c.out / "replicates.ndjson", ndjson);
    write_text_file(c.out / "jumps.csv", jumps_csv);

    // One decade of thresholds, starting high enough that atom discreteness
    // is a sub-percent effect on the counts.
    double r_lo = 200.0 / static_cast<double>(c.n_particles);
    double atom_mass = 1.0 / static_cast<double>(c.n_particles);
    Json rows = Json::array();
    std::vector<double> log_r0, log_obs;
    double max_abs_z = 0.0;
    for (int i = 0; i < 6; ++i) {
        double r0 = r_lo * std::pow(10.0, i / 5.0);
        CompensatorCheck check = compensator_tail_check(c.params, pooled, pooled_integral,
                                                        r0, atom_mass);
        double z = check.predicted > 0.0
                       ? (check.observed - check.predicted) / std::sqrt(check.predicted)
                       : 0.0;
        max_abs_z = std::max(max_abs_z, std::abs(z));
        Json row;
        row["r0"] = check.r0;
        row["observed"] = check.observed;
        row["predicted"] = check.predicted;
        row["z"] = z;
        rows.push_back(row);
        if (check.observed > 0.0) {
            log_r0.push_back(std::log(r0));
            log_obs.push_back(std::log(check.observed));
        }
    }

    RunnerResult r;
    r.replicate_seeds = derive_seeds(c.seed, StreamModule::superprocess, c.replicates);
    double slope_target = -(1.0 + c.params.beta);
    Json report;
    report["rho"] = c.params.jump_intensity_rho();
    report["pooled_mass_integral"] = pooled_integral;
    report["n_replicates"] = c.replicates;
    report["n_censored"] = n_censored;
    report["rows"] = rows;
    report["slope_target"] = slope_target;
    if (log_r0.size() >= 4) {
        LinearFit fit = linear_fit(log_r0, log_obs);
        report["slope"] = fit.slope;
        write_json_file(c.out / "compensator.json", report);
        add_check(r, std::abs(fit.slope - slope_target) <= 0.15, "jump-count scaling",
                  "log-log slope " + format_double(fit.slope) + " vs " +
                      format_double(slope_target));
    } else {
        report["slope"] = nullptr;
        write_json_file(c.out / "compensator.json", report);
        add_check(r, false, "jump-count scaling",
                  "too few populated thresholds for a slope fit");
    }
    add_check(r, max_abs_z <= 3.0, "compensator counts",
              "max |observed - predicted| / sqrt(predicted) = " + format_double(max_abs_z));
    return r;
}

RunnerResult run_jump_tail(const ExperimentConfig& c) {
    double gamma = 0.5 / (1.0 + c.params.beta);
    std::vector<double> thresholds = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    ParticleCloud initial = point_mass_cloud(0.0, 1.0, c.n_particles);
    JumpMassEventScan scan =
        jump_mass_event_probability(c.params, initial, c.t, gamma, thresholds, 2.0,
                                    c.n_particles, c.replicates, c.seed, {}, c.workers);

    std::string csv = "threshold,probability,std_error\n";
    Json rows = Json::array();
    bool monotone = true;
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        csv += csv_row({format_double(thresholds[i]), format_double(scan.probabilities[i]),
                        format_double(scan.std_errors[i])});
        Json row;
        row["threshold"] = thresholds[i];
        row["probability"] = scan.probabilities[i];
        row["std_error"] = scan.std_errors[i];
        rows.push_back(row);
        if (i > 0) monotone = monotone && scan.probabilities[i] <= scan.probabilities[i - 1];
    }
    write_text_file(c.out / "scan.csv", csv);
    Json report;
    report["gamma"] = scan.gamma;
    report["lambda_exponent"] = scan.lambda_exponent;
    report["replicates"] = scan.replicates;
    report["rows"] = rows;
    write_json_file(c.out / "scan.json", report);

    RunnerResult r;
    r.replicate_seeds = derive_seeds(c.seed, StreamModule::superprocess, c.replicates);
    add_check(r, monotone, "event probability monotone",
              "non-increasing across thresholds at matched seeds");
    add_check(r, scan.probabilities.back() < 0.05, "tail smallness",
              "probability " + format_double(scan.probabilities.back()) +
                  " at threshold " + format_double(thresholds.back()));
    return r;
}

std::vector<std::int64_t> dichotomy_scales(std::int64_t n_particles) {
    auto lo = std::max<std::int64_t>(1000, n_particles / 100);
    auto hi = std::max(lo, n_particles);
    auto mid = static_cast<std::int64_t>(
        std::llround(std::sqrt(static_cast<double>(lo) * static_cast<double>(hi))));
    std::vector<std::int64_t> scales = {lo, mid, hi};
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
    return scales;
}

RunnerResult run_dichotomy(const ExperimentConfig& c) {
    std::vector<std::int64_t> scales = dichotomy_scales(c.n_particles);
    // Grid sized so even the finest refinement bandwidth stays above 2 dx.
    double h_min = refinement_bandwidth(scales.back());
    auto n_nodes = std::max<Eigen::Index>(
        2048, static_cast<Eigen::Index>(std::ceil(2.0 / h_min)) + 1);
    std::vector<RefineMaxRow> rows = refine_max_scan(c.params, c.t, -0.5, 0.5, n_nodes,
                                                     scales, c.replicates, c.seed,
                                                     c.workers);

    std::string csv = "N,median_max,q25,q75\n";
    for (const auto& row : rows)
        csv += csv_row({std::to_string(row.scale_n), format_double(row.median_max),
                        format_double(row.q25), format_double(row.q75)});
    write_text_file(c.out / "dichotomy.csv", csv);

    RunnerResult r;
    for (std::size_t s = 0; s < scales.size(); ++s)
        for (std::int64_t rep = 0; rep < c.replicates; ++rep)
            r.replicate_seeds.push_back(
                derive_seed(c.seed, StreamModule::density,
                            (static_cast<std::uint64_t>(s) << 32) |
                                static_cast<std::uint64_t>(rep)));

    double ratio = rows.back().median_max / rows.front().median_max;
    if (c.params.continuity_regime()) {
        add_check(r, ratio < 2.0, "bounded-density trend",
                  "median max last/first = " + format_double(ratio) + " < 2 expected");
    } else {
        bool increasing = true;
        std::string path;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i > 0) {
                increasing = increasing && rows[i].median_max > rows[i - 1].median_max;
                path += " -> ";
            }
            path += format_double(rows[i].median_max);
        }
        add_check(r, increasing, "unbounded-density trend",
                  "median max strictly increasing expected: " + path);
    }
    return r;
}

RunnerResult run_exponents(const ExperimentConfig& c) {
    ExponentReport report = exponent_experiment(c.params, c.t, 0.0, c.n_particles,
                                                c.replicates, c.seed, {}, c.workers);

    Json out;
    out["params"] = {{"alpha", c.params.alpha},
                     {"beta", c.params.beta},
                     {"a", c.params.a},
                     {"b", c.params.b},
                     {"d", c.params.d}};
    out["targets"] = {{"eta_c", report.targets.eta_c},
                      {"eta_bar_c", report.targets.eta_bar_c},
                      {"optimality", report.targets.optimality}};
    out["bandwidth"] = report.bandwidth;
    out["radii"] = report.radii;
    out["n_attempted"] = report.n_attempted;
    out["n_retained"] = report.n_retained;
    out["n_censored"] = report.n_censored;
    out["pointwise"] = {{"median", report.pointwise_median}, {"iqr", report.pointwise_iqr}};
    out["local"] = {{"median", report.local_median}, {"iqr", report.local_iqr}};
    out["ordering_pvalue"] = report.ordering_pvalue;
    write_json_file(c.out / "exponents.json", out);

    std::string csv =
        "replicate,retained,censored,density_at_z,pointwise_exponent,pointwise_ci_low,"
        "pointwise_ci_high,pointwise_r2,local_exponent,local_ci_low,local_ci_high,local_r2\n";
    for (const auto& entry : report.per_replicate)
        csv += csv_row({std::to_string(entry.replicate), std::to_string(int(entry.retained)),
                        std::to_string(int(entry.censored)),
                        format_double(entry.density_at_z),
                        format_double(entry.pointwise.exponent),
                        format_double(entry.pointwise.ci_low),
                        format_double(entry.pointwise.ci_high),
                        format_double(entry.pointwise.fit_r2),
                        format_double(entry.local.exponent),
                        format_double(entry.local.ci_low),
                        format_double(entry.local.ci_high),
                        format_double(entry.local.fit_r2)});
    write_text_file(c.out / "replicates.csv", csv);

    RunnerResult r;
    r.replicate_seeds = derive_seeds(c.seed, StreamModule::regularity, c.replicates);
    double eta_c = report.targets.eta_c;
    add_check(r, report.local_median >= eta_c - 0.15 && report.local_median <= eta_c + 0.25,
              "local exponent bracket",
              "median " + format_double(report.local_median) + " vs target " +
                  format_double(eta_c));
    add_check(r, report.ordering_pvalue <= 0.10, "pointwise exceeds local",
              "bootstrap p = " + format_double(report.ordering_pvalue));
    add_check(r, report.pointwise_median >= eta_c + 0.2, "pointwise exponent level",
              "median " + format_double(report.pointwise_median) + " vs floor " +
                  format_double(eta_c + 0.2));
    return r;
}

} // namespace

void validate_config(const ExperimentConfig& config) {
    if (kExperiments.count(config.experiment) == 0)
        throw std::invalid_argument("unknown experiment \"" + config.experiment + "\"");
    config.params.validate();
    if (!(config.t > 0.0)) throw std::invalid_argument("t must be positive");
    if (config.workers < 1) throw std::invalid_argument("workers must be at least 1");
    if (!(config.truncation > 0.0)) throw std::invalid_argument("truncation must be positive");
    if (!(config.mesh > 0.0 && config.mesh <= config.t))
        throw std::invalid_argument("mesh must lie in (0, t]");

    const std::string& e = config.experiment;
    bool particle_experiment = e == "laplace-duality" || e == "compensator" ||
                               e == "jump-tail" || e == "dichotomy" || e == "exponents";
    if (particle_experiment && config.n_particles < 1000)
        throw std::invalid_argument("n_particles must be at least 1000");
    if (e == "dichotomy" && dichotomy_scales(config.n_particles).size() < 2)
        throw std::invalid_argument(
            "dichotomy needs n_particles large enough for at least two scales");

    std::int64_t min_replicates = 2;
    if (e == "dichotomy") min_replicates = 3;
    if (e == "exponents") min_replicates = 30;
    if (config.replicates < min_replicates)
        throw std::invalid_argument("replicates must be at least " +
                                    std::to_string(min_replicates) + " for " + e);

    if ((e == "jump-tail" || e == "exponents") && !config.params.continuity_regime())
        throw config_error(e + " requires alpha > 1 + beta");
    if (e == "exponents" && !config.params.optimality_regime())
        throw config_error(e + " requires beta > (alpha - 1) / 2");
    if (e == "dichotomy" && !config.params.density_regime())
        throw config_error(e + " requires d < alpha / beta");
    if (e == "compensator" && !(config.params.b > 0.0))
        throw config_error(e + " requires b > 0");
}

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    std::filesystem::create_directories(config.out);

    RunnerResult result;
    if (config.experiment == "kernel-table") result = run_kernel_table(config);
    else if (config.experiment == "stable-check") result = run_stable_check(config);
    else if (config.experiment == "laplace-duality") result = run_laplace_duality(config);
    else if (config.experiment == "compensator") result = run_compensator(config);
    else if (config.experiment == "jump-tail") result = run_jump_tail(config);
    else if (config.experiment == "dichotomy") result = run_dichotomy(config);
    else result = run_exponents(config);

    std::string summary = "experiment: " + config.experiment + "\n" + result.summary;
    write_json_file(config.out / "manifest.json",
                    make_manifest(config.experiment, config_echo(config), config.seed,
                                  result.replicate_seeds));
    write_text_file(config.out / "summary.txt", summary);

    ExperimentOutcome outcome;
    outcome.all_checks_passed = result.pass;
    outcome.summary = summary;
    return outcome;
}

} // namespace supersim
