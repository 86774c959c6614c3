#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "supersim/rng.hpp"

namespace supersim {

// Streaming mean and standard error (Welford update).
class MeanAccumulator {
  public:
    void add(double x) {
        ++n_;
        double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }
    std::int64_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double std_error() const {
        return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

  private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Point estimate with its Monte Carlo standard error and reference value.
struct EstimateRecord {
    double estimate = 0.0;
    double std_error = 0.0;
    double target = 0.0;
    double z_score() const {
        if (std_error == 0.0) return estimate == target ? 0.0 : INFINITY;
        return (estimate - target) / std_error;
    }
};

// Quantile of a sample (linear interpolation between order statistics).
double quantile(std::vector<double> xs, double q);
inline double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Ordinary least squares y ~ intercept + slope * x.
LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// Percentile band of the fitted slope under resampling of the (x, y) pairs
// (scale subsets drawn with replacement). Returns {lo, hi} at the given level.
std::pair<double, double> bootstrap_slope_band(const std::vector<double>& xs,
                                               const std::vector<double>& ys,
                                               double level, int n_resamples, Rng& rng);

// One-sided bootstrap p-value for median(lhs) <= median(rhs) under paired
// resampling of replicate indices.
double bootstrap_median_order_pvalue(const std::vector<double>& lhs,
                                     const std::vector<double>& rhs,
                                     int n_resamples, Rng& rng);

// Kolmogorov-Smirnov machinery. P-values use the asymptotic Kolmogorov law.
double ks_asymptotic_pvalue(double d, double n_effective);
double ks_statistic_one_sample(std::vector<double> sample,
                               const std::function<double(double)>& cdf);
double ks_pvalue_one_sample(std::vector<double> sample,
                            const std::function<double(double)>& cdf);
double ks_pvalue_two_sample(std::vector<double> a, std::vector<double> b);

} // namespace supersim
