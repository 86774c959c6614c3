#include "supersim/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace supersim {

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0,1]");
    std::sort(xs.begin(), xs.end());
    double pos = q * static_cast<double>(xs.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= xs.size()) return xs.back();
    double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("linear_fit size mismatch");
    if (xs.size() < 2) throw std::invalid_argument("linear_fit needs at least two points");
    double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx;
        double dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit with degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

std::pair<double, double> bootstrap_slope_band(const std::vector<double>& xs,
                                               const std::vector<double>& ys,
                                               double level, int n_resamples, Rng& rng) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("band level outside (0,1)");
    std::size_t n = xs.size();
    std::vector<double> slopes;
    slopes.reserve(static_cast<std::size_t>(n_resamples));
    std::vector<double> bx(n), by(n);
    for (int b = 0; b < n_resamples; ++b) {
        bool degenerate = true;
        for (std::size_t i = 0; i < n; ++i) {
            auto j = static_cast<std::size_t>(uniform_open01(rng) * static_cast<double>(n));
            if (j >= n) j = n - 1;
            bx[i] = xs[j];
            by[i] = ys[j];
            if (bx[i] != bx[0]) degenerate = false;
        }
        if (degenerate) continue; // all resampled scales equal, slope undefined
        slopes.push_back(linear_fit(bx, by).slope);
    }
    if (slopes.size() < 8) return {linear_fit(xs, ys).slope, linear_fit(xs, ys).slope};
    double tail = 0.5 * (1.0 - level);
    return {quantile(slopes, tail), quantile(slopes, 1.0 - tail)};
}

double bootstrap_median_order_pvalue(const std::vector<double>& lhs,
                                     const std::vector<double>& rhs,
                                     int n_resamples, Rng& rng) {
    if (lhs.size() != rhs.size() || lhs.empty())
        throw std::invalid_argument("paired bootstrap needs matched non-empty samples");
    std::size_t n = lhs.size();
    std::vector<double> bl(n), br(n);
    int not_greater = 0;
    for (int b = 0; b < n_resamples; ++b) {
        for (std::size_t i = 0; i < n; ++i) {
            auto j = static_cast<std::size_t>(uniform_open01(rng) * static_cast<double>(n));
            if (j >= n) j = n - 1;
            bl[i] = lhs[j];
            br[i] = rhs[j];
        }
        if (median(bl) <= median(br)) ++not_greater;
    }
    return static_cast<double>(not_greater) / static_cast<double>(n_resamples);
}

double ks_asymptotic_pvalue(double d, double n_effective) {
    double t = (std::sqrt(n_effective) + 0.12 + 0.11 / std::sqrt(n_effective)) * d;
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * t * t);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

double ks_statistic_one_sample(std::vector<double> sample,
                               const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("KS statistic of an empty sample");
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double ks_pvalue_one_sample(std::vector<double> sample,
                            const std::function<double(double)>& cdf) {
    double n = static_cast<double>(sample.size());
    double d = ks_statistic_one_sample(std::move(sample), cdf);
    return ks_asymptotic_pvalue(d, n);
}

double ks_pvalue_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("KS test with an empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return ks_asymptotic_pvalue(d, na * nb / (na + nb));
}

} // namespace supersim
