#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "supersim/branching.hpp"
#include "supersim/density.hpp"
#include "supersim/errors.hpp"

using namespace supersim;

namespace {

// Motion-only cloud: N independent stable positions started from a point mass.
ParticleCloud motion_cloud(double alpha, double t, std::int64_t scale_n, std::uint64_t seed) {
    ModelParams params;
    params.alpha = alpha;
    params.beta = 0.5;
    params.a = 0.0;
    params.b = 0.0;
    ParticleCloud initial = point_mass_cloud(0.0, 1.0, scale_n);
    EvolveOptions opts;
    opts.record_jumps = false;
    return evolve(params, initial, t, scale_n, seed, opts).cloud;
}

double sup_gap(const DensityGrid& a, const DensityGrid& b) {
    return (a.values - b.values).abs().maxCoeff();
}

} // namespace

TEST_CASE("a single atom produces one Gaussian bump of the right height") {
    ParticleCloud cloud;
    cloud.atom_mass = 0.2;
    cloud.positions = Eigen::ArrayXd::Constant(1, 0.3);
    DensityGrid grid = kde_density(cloud, -1.0, 1.0, 501, 0.05);
    CHECK(grid.bandwidth == doctest::Approx(0.05));
    // Node 325 sits exactly on the atom, so the peak is mass / (h sqrt(2 pi)).
    Eigen::Index arg_max = 0;
    grid.values.maxCoeff(&arg_max);
    CHECK(arg_max == 325);
    CHECK(grid.x_at(arg_max) == doctest::Approx(0.3));
    CHECK(grid.values(arg_max) == doctest::Approx(1.5957691216057308).epsilon(1e-12));
    // The kernel integrates back to the atom mass inside this window.
    CHECK(grid.integral() == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("the estimate integrates to the cloud mass when the window covers it") {
    ParticleCloud cloud = motion_cloud(2.0, 0.5, 10000, 17);
    DensityGrid grid = kde_density(cloud, -6.0, 6.0, 1201);
    CHECK(grid.integral() == doctest::Approx(cloud.total_mass()).epsilon(2e-3));
    CHECK(grid.n_particles == cloud.positions.size());
}

TEST_CASE("automatic bandwidth follows the normal-reference rule") {
    ParticleCloud cloud = motion_cloud(2.0, 0.5, 2000, 5);
    DensityGrid grid = kde_density(cloud, -4.0, 4.0, 801);
    // 1.06 sigma n^{-1/5} with sigma near 1 and n near 2000.
    CHECK(grid.bandwidth > 0.19);
    CHECK(grid.bandwidth < 0.28);
    ModelParams params;
    params.alpha = 2.0;
    DensityGrid expected =
        z1_component_grid(params, point_mass_cloud(0.0, 1.0, 2000), 0.5, -4.0, 4.0, 801);
    CHECK(sup_gap(grid, expected) < 0.06);
}

TEST_CASE("motion-only control matches the transition density uniformly") {
    ModelParams params;
    params.alpha = 2.0;
    ParticleCloud mu = point_mass_cloud(0.0, 1.0, 1000);
    DensityGrid expected = z1_component_grid(params, mu, 0.5, -2.0, 2.0, 401);

    ParticleCloud coarse = motion_cloud(2.0, 0.5, 10000, 23);
    ParticleCloud fine = motion_cloud(2.0, 0.5, 100000, 29);
    double err_coarse = sup_gap(kde_density(coarse, -2.0, 2.0, 401), expected);
    double err_fine = sup_gap(kde_density(fine, -2.0, 2.0, 401), expected);
    CHECK(err_fine < 0.02);
    // Ten times the particles buys a clearly smaller uniform error.
    CHECK(err_fine / err_coarse < 0.85);
    CHECK(err_fine / err_coarse > 0.02);
}

TEST_CASE("expected-density component matches stable closed forms") {
    ModelParams params;
    params.alpha = 2.0;
    ParticleCloud mu = point_mass_cloud(0.0, 1.0, 1000);
    // Gaussian motion at t = 1: peak value 1/sqrt(4 pi).
    CHECK(z1_component(params, mu, 1.0, 0.0) ==
          doctest::Approx(0.28209479177387814).epsilon(1e-8));
    params.alpha = 1.0;
    // Cauchy motion at t = 1, x = 1: 1/(2 pi).
    CHECK(z1_component(params, mu, 1.0, 1.0) ==
          doctest::Approx(0.15915494309189535).epsilon(1e-8));
}

TEST_CASE("expected-density component mixes atoms linearly") {
    ModelParams params;
    params.alpha = 1.8;
    ParticleCloud mu;
    mu.atom_mass = 0.5;
    mu.positions.resize(2);
    mu.positions << -1.0, 2.0;
    StableKernel kernel(KernelConfig{.alpha = 1.8});
    for (double x : {-0.5, 0.0, 1.3}) {
        double direct = 0.5 * kernel.density_pt(0.7, x + 1.0) +
                        0.5 * kernel.density_pt(0.7, x - 2.0);
        CHECK(z1_component(params, mu, 0.7, x) == doctest::Approx(direct).epsilon(1e-12));
    }
    DensityGrid grid = z1_component_grid(params, mu, 0.7, -8.0, 9.0, 1701);
    CHECK(grid.integral() == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("windows that miss the cloud raise the sampling error") {
    ParticleCloud cloud;
    cloud.atom_mass = 1e-3;
    cloud.positions = Eigen::ArrayXd::Constant(10, 100.0);
    CHECK_THROWS_AS(kde_density(cloud, -1.0, 1.0, 64, 0.05), insufficient_sample_error);
    CHECK_THROWS_AS(kde_density(cloud, -1.0, 1.0, 64), insufficient_sample_error);
}

TEST_CASE("refinement bandwidth keeps the expected atom count per window fixed") {
    CHECK(refinement_bandwidth(1000) == doctest::Approx(0.03));
    CHECK(refinement_bandwidth(100000) == doctest::Approx(3e-4));
    CHECK(refinement_bandwidth(1000, 10.0) == doctest::Approx(0.01));
    CHECK_THROWS_AS(refinement_bandwidth(0), std::invalid_argument);
    CHECK_THROWS_AS(refinement_bandwidth(1000, -1.0), std::invalid_argument);
}

TEST_CASE("refinement scan is flat for a bounded density") {
    ModelParams params;
    params.alpha = 1.8;
    params.beta = 0.5;
    params.a = 0.0;
    params.b = 0.0; // pure motion has the bounded density p_t
    std::vector<RefineMaxRow> rows =
        refine_max_scan(params, 0.3, -0.5, 0.5, 2048, {2000, 20000}, 9, 101);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].scale_n == 2000);
    CHECK(rows[0].bandwidth == doctest::Approx(0.015));
    CHECK(rows[1].bandwidth == doctest::Approx(0.0015));
    CHECK(rows[0].replicates == 9);
    CHECK(rows[1].replicates == 9);
    CHECK(rows[0].q25 <= rows[0].median_max);
    CHECK(rows[0].median_max <= rows[0].q75);
    double ratio = rows[1].median_max / rows[0].median_max;
    CHECK(ratio > 0.5);
    CHECK(ratio < 1.7);
}

TEST_CASE("refinement scan rejects unusable configurations") {
    ModelParams params;
    params.alpha = 1.8;
    params.beta = 0.5;
    // Grid spacing too coarse for the finest bandwidth.
    CHECK_THROWS_AS(refine_max_scan(params, 0.3, -0.5, 0.5, 512, {20000}, 3, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(refine_max_scan(params, 0.3, -0.5, 0.5, 2048, {}, 3, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(refine_max_scan(params, 0.3, -0.5, 0.5, 2048, {2000}, 2, 1),
                    std::invalid_argument);
    ModelParams singular;
    singular.alpha = 0.8;
    singular.beta = 0.9; // d = 1 >= alpha/beta: no density exists
    CHECK_THROWS_AS(refine_max_scan(singular, 0.3, -0.5, 0.5, 2048, {2000}, 3, 1),
                    config_error);
}

TEST_CASE("density estimation validates its inputs") {
    ParticleCloud cloud;
    cloud.positions = Eigen::ArrayXd::Zero(4);
    CHECK_THROWS_AS(kde_density(cloud, 1.0, -1.0, 64, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(kde_density(cloud, -1.0, 1.0, 4, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(kde_density(cloud, -1.0, 1.0, 64, -0.5), std::invalid_argument);
    ParticleCloud empty;
    CHECK_THROWS_AS(kde_density(empty, -1.0, 1.0, 64, 0.1), std::invalid_argument);
}
