#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "supersim/errors.hpp"
#include "supersim/kernel.hpp"

using namespace supersim;

namespace {

StableKernel make_kernel(double alpha) { return StableKernel(KernelConfig{.alpha = alpha}); }

constexpr double kPi = 3.141592653589793238462643383279502884;

} // namespace

TEST_CASE("Gaussian closed form at alpha = 2") {
    StableKernel kernel = make_kernel(2.0);
    // Characteristic function exp(-t xi^2): N(0, 2t).
    CHECK(kernel.density_p1(0.0) == doctest::Approx(1.0 / std::sqrt(4.0 * kPi)).epsilon(1e-14));
    for (double x = -10.0; x <= 10.0; x += 0.25) {
        double expected = std::exp(-x * x / 4.0) / std::sqrt(4.0 * kPi);
        CHECK(std::abs(kernel.density_p1(x) - expected) < 1e-14);
        CHECK(std::abs(kernel.density_p1_quadrature(x) - expected) < 1e-8);
    }
    CHECK(kernel.cdf_p1(0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(kernel.cdf_p1(2.0) == doctest::Approx(0.5 * std::erfc(-2.0 / 2.0)).epsilon(1e-10));
}

TEST_CASE("Cauchy closed form at alpha = 1") {
    StableKernel kernel = make_kernel(1.0);
    CHECK(kernel.density_p1(0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
    CHECK(kernel.density_p1(1.0) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
    for (double x = -10.0; x <= 10.0; x += 0.25) {
        double expected = 1.0 / (kPi * (1.0 + x * x));
        CHECK(std::abs(kernel.density_p1(x) - expected) < 1e-14);
        CHECK(std::abs(kernel.density_p1_quadrature(x) - expected) < 1e-8);
    }
    CHECK(kernel.cdf_p1(1.0) == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("scaling identity against direct quadrature") {
    for (double alpha : {1.2, 1.5, 1.8}) {
        StableKernel kernel = make_kernel(alpha);
        for (double t : {0.25, 1.0, 4.0}) {
            for (double x = -5.0; x <= 5.0; x += 0.5) {
                double scaled = kernel.density_pt(t, x);
                double direct = kernel.density_pt_quadrature(t, x);
                CHECK(std::abs(scaled - direct) < 1e-10);
            }
        }
    }
}

TEST_CASE("density is symmetric, unimodal, and normalized") {
    for (double alpha : {1.2, 1.5, 1.8}) {
        StableKernel kernel = make_kernel(alpha);
        double prev = kernel.density_p1(0.0);
        CHECK(prev > 0.0);
        for (double x = 0.125; x <= 12.0; x += 0.125) {
            double v = kernel.density_p1(x);
            CHECK(kernel.density_p1(-x) == doctest::Approx(v).epsilon(1e-13));
            CHECK(v < prev);
            prev = v;
        }
        // Trapezoid mass over [-40, 40] plus the exact series tail remainder:
        // integral of C y^{-1-alpha} beyond the window to leading order.
        double dx = 0.01;
        double mass = 0.0;
        for (double x = -40.0; x < 40.0; x += dx)
            mass += 0.5 * dx * (kernel.density_p1(x) + kernel.density_p1(x + dx));
        double tail = 2.0 * kernel.tail_constant_limit() / alpha * std::pow(40.0, -alpha);
        CHECK(mass + tail == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(kernel.cdf_p1(0.0) == doctest::Approx(0.5).epsilon(1e-10));
    }
}

TEST_CASE("series and quadrature agree at the switchover") {
    for (double alpha : {1.2, 1.5, 1.8}) {
        StableKernel kernel = make_kernel(alpha);
        double s = kernel.series_threshold();
        for (double x : {s * 1.0001, s * 1.5}) {
            double series = kernel.density_p1_series(x);
            double quad = kernel.density_p1_quadrature(x);
            CHECK(series == doctest::Approx(quad).epsilon(1e-6));
        }
    }
}

TEST_CASE("tail constant scan approaches the closed-form limit") {
    for (double alpha : {1.0, 1.5}) {
        StableKernel kernel = make_kernel(alpha);
        double limit = std::tgamma(1.0 + alpha) * std::sin(kPi * alpha / 2.0) / kPi;
        CHECK(kernel.tail_constant_limit() == doctest::Approx(limit).epsilon(1e-12));
        double scan = tail_constant_scan(kernel, 20.0, 200.0);
        CHECK(scan == doctest::Approx(limit).epsilon(0.02));
    }
}

TEST_CASE("Chapman-Kolmogorov gap is small on the verification grid") {
    for (double alpha : {1.2, 1.8}) {
        StableKernel kernel = make_kernel(alpha);
        double gap = chapman_kolmogorov_gap(kernel, 0.5, 0.5, 60.0, 0.05, 5.0);
        CHECK(gap < 1e-4);
    }
}

TEST_CASE("semigroup apply sums scaled kernel translates") {
    StableKernel kernel = make_kernel(1.5);
    ParticleCloud cloud;
    cloud.positions.resize(2);
    cloud.positions << -1.0, 2.0;
    cloud.atom_mass = 0.5;
    double expected = 0.5 * kernel.density_pt(0.7, 0.3 + 1.0) +
                      0.5 * kernel.density_pt(0.7, 0.3 - 2.0);
    CHECK(semigroup_apply(kernel, cloud, 0.7, 0.3) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("spatial increment bound: flat case is bounded by one") {
    StableKernel kernel = make_kernel(1.5);
    auto samples = increment_bound_samples(4000, 0.25, 4.0, 6.0, 17);
    IncrementBoundReport flat = increment_bound_check(kernel, 0.0, samples);
    CHECK(flat.n_samples == 4000);
    // |p(x)-p(y)| <= p(x)+p(y) <= p(x/2)+p(y/2) by symmetric unimodality.
    CHECK(flat.max_ratio <= 1.0 + 1e-12);
    CHECK(flat.max_ratio > 0.5);
}

TEST_CASE("spatial increment bound: Lipschitz ratio stabilizes") {
    StableKernel kernel = make_kernel(1.5);
    auto half = increment_bound_samples(4000, 0.25, 4.0, 6.0, 17);
    auto full = increment_bound_samples(8000, 0.25, 4.0, 6.0, 17);
    IncrementBoundReport a = increment_bound_check(kernel, 1.0, half);
    IncrementBoundReport b = increment_bound_check(kernel, 1.0, full);
    CHECK(a.max_ratio > 0.0);
    CHECK(b.max_ratio >= a.max_ratio - 1e-12);
    CHECK(b.max_ratio < 2.0 * a.max_ratio);
    CHECK(b.max_ratio < 10.0);
}

TEST_CASE("kernel configuration validation") {
    CHECK_THROWS_AS(make_kernel(0.0), config_error);
    CHECK_THROWS_AS(make_kernel(2.5), config_error);
    CHECK_THROWS_AS(StableKernel(KernelConfig{.alpha = 1.5, .quad_points = 4}), config_error);
    StableKernel kernel = make_kernel(1.5);
    CHECK_THROWS_AS(kernel.density_pt(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(kernel.density_pt(-1.0, 1.0), std::invalid_argument);
}
