#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "supersim/rng.hpp"
#include "supersim/statistics.hpp"

using namespace supersim;

TEST_CASE("mean accumulator matches closed-form moments") {
    MeanAccumulator acc;
    for (double x : {1.0, 2.0, 3.0, 4.0}) acc.add(x);
    CHECK(acc.count() == 4);
    CHECK(acc.mean() == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(acc.variance() == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
    CHECK(acc.std_error() == doctest::Approx(std::sqrt(5.0 / 12.0)).epsilon(1e-14));
}

TEST_CASE("estimate record z-score") {
    EstimateRecord rec;
    rec.estimate = 1.2;
    rec.target = 1.0;
    rec.std_error = 0.1;
    CHECK(rec.z_score() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("quantile interpolates linearly") {
    std::vector<double> xs = {3.0, 1.0, 2.0};
    CHECK(median(xs) == doctest::Approx(2.0));
    CHECK(quantile(xs, 0.0) == doctest::Approx(1.0));
    CHECK(quantile(xs, 1.0) == doctest::Approx(3.0));
    CHECK(quantile(xs, 0.25) == doctest::Approx(1.5));
    CHECK(quantile({0.0, 1.0}, 0.25) == doctest::Approx(0.25));
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile({1.0}, 1.5), std::invalid_argument);
}

TEST_CASE("linear fit recovers an exact line") {
    std::vector<double> xs = {0.0, 1.0, 2.0, 3.0};
    std::vector<double> ys = {1.0, 3.0, 5.0, 7.0};
    LinearFit fit = linear_fit(xs, ys);
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(linear_fit({1.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(linear_fit({1.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("bootstrap slope band collapses on noiseless data and covers noisy truth") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 12; ++i) {
        xs.push_back(static_cast<double>(i));
        ys.push_back(2.0 * static_cast<double>(i) - 1.0);
    }
    Rng rng = make_rng(9);
    auto [lo, hi] = bootstrap_slope_band(xs, ys, 0.9, 400, rng);
    CHECK(lo == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(hi == doctest::Approx(2.0).epsilon(1e-12));

    Rng noise = make_rng(10);
    for (std::size_t i = 0; i < ys.size(); ++i)
        ys[i] += 0.2 * (uniform_open01(noise) - 0.5);
    auto [nlo, nhi] = bootstrap_slope_band(xs, ys, 0.9, 400, rng);
    CHECK(nlo < 2.0);
    CHECK(nhi > 2.0);
    CHECK(nhi - nlo < 0.2);
}

TEST_CASE("paired median bootstrap orders shifted samples") {
    std::vector<double> base, up;
    Rng noise = make_rng(12);
    for (int i = 0; i < 60; ++i) {
        double x = uniform_open01(noise);
        base.push_back(x);
        up.push_back(x + 0.5);
    }
    Rng rng = make_rng(13);
    // P(median(lhs) <= median(rhs)) across resamples.
    CHECK(bootstrap_median_order_pvalue(up, base, 500, rng) == doctest::Approx(0.0));
    CHECK(bootstrap_median_order_pvalue(base, up, 500, rng) == doctest::Approx(1.0));
    CHECK(bootstrap_median_order_pvalue(base, base, 500, rng) == doctest::Approx(1.0));
    CHECK_THROWS_AS(bootstrap_median_order_pvalue({1.0}, {}, 10, rng),
                    std::invalid_argument);
}

TEST_CASE("KS statistic on a tiny sample is exact") {
    auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    CHECK(ks_statistic_one_sample({0.5}, uniform_cdf) == doctest::Approx(0.5));
    CHECK(ks_statistic_one_sample({0.1, 0.9}, uniform_cdf) == doctest::Approx(0.4));
}

TEST_CASE("one-sample KS accepts its own distribution and rejects a shift") {
    Rng rng = make_rng(21);
    std::vector<double> xs;
    for (int i = 0; i < 5000; ++i) xs.push_back(uniform_open01(rng));
    auto uniform_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    CHECK(ks_pvalue_one_sample(xs, uniform_cdf) > 0.01);
    auto shifted_cdf = [](double x) { return std::clamp(x - 0.05, 0.0, 1.0); };
    CHECK(ks_pvalue_one_sample(xs, shifted_cdf) < 1e-4);
}

TEST_CASE("two-sample KS separates distinct laws") {
    Rng rng = make_rng(22);
    std::vector<double> a, b, c;
    for (int i = 0; i < 4000; ++i) {
        a.push_back(uniform_open01(rng));
        b.push_back(uniform_open01(rng));
        c.push_back(uniform_open01(rng) + 0.08);
    }
    CHECK(ks_pvalue_two_sample(a, b) > 0.01);
    CHECK(ks_pvalue_two_sample(a, c) < 1e-4);
}
