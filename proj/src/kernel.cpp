#include "supersim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "supersim/rng.hpp"

namespace supersim {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Gauss-Legendre 8-point rule on [-1, 1].
constexpr double kGlNode[8] = {
    -0.9602898564975362316835609, -0.7966664774136267395915539,
    -0.5255324099163289858177390, -0.1834346424956498049394761,
    0.1834346424956498049394761,  0.5255324099163289858177390,
    0.7966664774136267395915539,  0.9602898564975362316835609,
};
constexpr double kGlWeight[8] = {
    0.1012285362903762591525314, 0.2223810344533744705443560,
    0.3137066458778872873379622, 0.3626837833783619829651504,
    0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314,
};

// Characteristic-function truncation point: exp(-x) below 1e-17 beyond it.
constexpr double kLogCutoff = 39.14394658089878;

} // namespace

double KernelConfig::effective_cutoff() const {
    if (quad_cutoff > 0.0) return quad_cutoff;
    return std::pow(kLogCutoff, 1.0 / alpha);
}

void KernelConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw config_error("kernel alpha must lie in (0,2]");
    if (quad_points < 512) throw config_error("quad_points must be at least 512");
    double cutoff = effective_cutoff();
    if (!(std::exp(-std::pow(cutoff, alpha)) < 1e-16))
        throw config_error("quad_cutoff too small: exp(-cutoff^alpha) must be below 1e-16");
}

StableKernel::StableKernel(KernelConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    series_threshold_ = 15.0;

    double cutoff = cfg_.effective_cutoff();
    // Cell count keeps the largest cell short against the fastest oscillation
    // handled before the series takes over (|x| <= series_threshold_).
    Eigen::Index n_cells = std::max<Eigen::Index>(
        cfg_.quad_points / 8, static_cast<Eigen::Index>(std::ceil(cutoff * 24.0)));
    nodes_.resize(8 * n_cells);
    weights_.resize(8 * n_cells);
    raw_weights_.resize(8 * n_cells);

    // Cubically graded cell boundaries concentrate points near xi = 0 where
    // derivatives of exp(-xi^alpha) are unbounded for alpha < 2.
    for (Eigen::Index c = 0; c < n_cells; ++c) {
        double f0 = static_cast<double>(c) / static_cast<double>(n_cells);
        double f1 = static_cast<double>(c + 1) / static_cast<double>(n_cells);
        double lo = cutoff * f0 * f0 * f0;
        double hi = cutoff * f1 * f1 * f1;
        double mid = 0.5 * (lo + hi);
        double half = 0.5 * (hi - lo);
        for (int g = 0; g < 8; ++g) {
            Eigen::Index j = 8 * c + g;
            double xi = mid + half * kGlNode[g];
            nodes_(j) = xi;
            double w = half * kGlWeight[g] * std::exp(-std::pow(xi, cfg_.alpha));
            weights_(j) = w;
            raw_weights_(j) = w / xi; // cdf integrand carries 1/xi
        }
    }
}

double StableKernel::density_p1_quadrature(double x) const {
    double s = (nodes_ * x).cos().matrix().dot(weights_.matrix());
    return s / kPi;
}

double StableKernel::density_pt_quadrature(double t, double x) const {
    if (!(t > 0.0)) throw std::invalid_argument("density_pt requires t > 0");
    // Same rule applied to exp(-t xi^alpha): substitute xi -> t^{-1/alpha} xi
    // is deliberately avoided here; this is the independent cross-check.
    double scale = std::pow(t, -1.0 / cfg_.alpha);
    double s = ((nodes_ * (scale * x)).cos().matrix()).dot(weights_.matrix());
    return scale * s / kPi;
}

double StableKernel::density_p1_series(double x) const {
    double a = std::abs(x);
    if (a <= 0.0) throw std::invalid_argument("tail series undefined at x = 0");
    double alpha = cfg_.alpha;
    double log_a = std::log(a);
    double sum = 0.0;
    double prev = INFINITY;
    for (int k = 1; k <= 48; ++k) {
        double dk = static_cast<double>(k);
        double magnitude =
            std::exp(std::lgamma(dk * alpha + 1.0) - std::lgamma(dk + 1.0) -
                     (dk * alpha + 1.0) * log_a);
        if (magnitude > prev) break; // asymptotic regime ended
        prev = magnitude;
        double term = magnitude * std::sin(0.5 * kPi * dk * alpha);
        sum += (k % 2 == 1) ? term : -term;
        if (magnitude < 1e-17 * std::abs(sum)) break;
    }
    return std::max(sum / kPi, 0.0);
}

double StableKernel::density_p1(double x) const {
    if (!std::isfinite(x)) throw std::invalid_argument("density_p1 requires finite x");
    double alpha = cfg_.alpha;
    if (alpha == 2.0) return std::exp(-0.25 * x * x) / std::sqrt(4.0 * kPi);
    if (alpha == 1.0) return 1.0 / (kPi * (1.0 + x * x));
    if (std::abs(x) > series_threshold_) return density_p1_series(x);
    return density_p1_quadrature(x);
}

double StableKernel::density_pt(double t, double x) const {
    if (!(t > 0.0)) throw std::invalid_argument("density_pt requires t > 0");
    if (!std::isfinite(x)) throw std::invalid_argument("density_pt requires finite x");
    double scale = std::pow(t, -1.0 / cfg_.alpha);
    return scale * density_p1(scale * x);
}

double StableKernel::cdf_p1(double x) const {
    if (!std::isfinite(x)) throw std::invalid_argument("cdf_p1 requires finite x");
    double alpha = cfg_.alpha;
    if (alpha == 2.0) return 0.5 * std::erfc(-x * 0.5);
    if (alpha == 1.0) return 0.5 + std::atan(x) / kPi;
    if (x < 0.0) return 1.0 - cdf_p1(-x);
    if (x > series_threshold_) {
        // Tail mass from the termwise-integrated asymptotic series.
        double log_x = std::log(x);
        double tail = 0.0;
        double prev = INFINITY;
        for (int k = 1; k <= 48; ++k) {
            double dk = static_cast<double>(k);
            double magnitude = std::exp(std::lgamma(dk * alpha + 1.0) -
                                        std::lgamma(dk + 1.0) - dk * alpha * log_x) /
                               (dk * alpha);
            if (magnitude > prev) break;
            prev = magnitude;
            double term = magnitude * std::sin(0.5 * kPi * dk * alpha);
            tail += (k % 2 == 1) ? term : -term;
            if (magnitude < 1e-17 * std::abs(tail)) break;
        }
        return 1.0 - std::max(tail / kPi, 0.0);
    }
    double s = (nodes_ * x).sin().matrix().dot(raw_weights_.matrix());
    return std::clamp(0.5 + s / kPi, 0.0, 1.0);
}

double StableKernel::cdf_pt(double t, double x) const {
    if (!(t > 0.0)) throw std::invalid_argument("cdf_pt requires t > 0");
    return cdf_p1(std::pow(t, -1.0 / cfg_.alpha) * x);
}

double StableKernel::tail_constant_limit() const {
    double alpha = cfg_.alpha;
    return std::tgamma(1.0 + alpha) * std::sin(0.5 * kPi * alpha) / kPi;
}

double semigroup_apply(const StableKernel& kernel, const ParticleCloud& cloud, double t,
                       double x) {
    if (!(t > 0.0)) throw std::invalid_argument("semigroup_apply requires t > 0");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < cloud.positions.size(); ++i)
        sum += kernel.density_pt(t, x - cloud.positions(i));
    return cloud.atom_mass * sum;
}

IncrementBoundReport increment_bound_check(const StableKernel& kernel, double delta,
                                           const std::vector<IncrementBoundSample>& samples) {
    if (!(delta >= 0.0 && delta <= 1.0))
        throw std::invalid_argument("increment bound exponent delta must lie in [0,1]");
    if (samples.empty()) throw std::invalid_argument("increment_bound_check needs samples");
    double alpha = kernel.config().alpha;
    IncrementBoundReport report;
    report.n_samples = static_cast<std::int64_t>(samples.size());
    for (const auto& s : samples) {
        if (!(s.t > 0.0)) throw std::invalid_argument("increment bound sample needs t > 0");
        double gap = std::abs(s.x - s.y);
        if (gap == 0.0) continue;
        double num = std::abs(kernel.density_pt(s.t, s.x) - kernel.density_pt(s.t, s.y));
        double denom = std::pow(gap, delta) * std::pow(s.t, -delta / alpha) *
                       (kernel.density_pt(s.t, 0.5 * s.x) + kernel.density_pt(s.t, 0.5 * s.y));
        double ratio = num / denom;
        if (ratio > report.max_ratio) {
            report.max_ratio = ratio;
            report.argmax = s;
        }
    }
    return report;
}

std::vector<IncrementBoundSample> increment_bound_samples(std::size_t n, double t_min,
                                                          double t_max, double x_max,
                                                          std::uint64_t seed) {
    if (!(t_min > 0.0 && t_max >= t_min && x_max > 0.0))
        throw std::invalid_argument("increment_bound_samples range invalid");
    Rng rng = make_rng(seed);
    double log_ratio = std::log(t_max / t_min);
    std::vector<IncrementBoundSample> samples;
    samples.reserve(n);
    while (samples.size() < n) {
        IncrementBoundSample s;
        s.t = t_min * std::exp(log_ratio * uniform_open01(rng));
        s.x = x_max * (2.0 * uniform_open01(rng) - 1.0);
        s.y = x_max * (2.0 * uniform_open01(rng) - 1.0);
        if (std::abs(s.x - s.y) < 1e-9) continue;
        samples.push_back(s);
    }
    return samples;
}

double tail_constant_scan(const StableKernel& kernel, double y_min, double y_max,
                          int points_per_decade) {
    if (!(y_min >= 1.0 && y_max > y_min))
        throw std::invalid_argument("tail scan needs 1 <= y_min < y_max");
    if (points_per_decade < 2) throw std::invalid_argument("tail scan grid too coarse");
    double alpha = kernel.config().alpha;
    double decades = std::log10(y_max / y_min);
    int n = static_cast<int>(std::ceil(decades * points_per_decade)) + 1;
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
        double y = y_min * std::pow(y_max / y_min,
                                    static_cast<double>(i) / static_cast<double>(n - 1));
        sup = std::max(sup, kernel.density_p1(y) * std::pow(y, alpha + 1.0));
    }
    return sup;
}

double chapman_kolmogorov_gap(const StableKernel& kernel, double t, double s,
                              double grid_radius, double dx, double x_window) {
    if (!(t > 0.0 && s > 0.0)) throw std::invalid_argument("semigroup times must be positive");
    if (!(dx > 0.0 && grid_radius > x_window && x_window > 0.0))
        throw std::invalid_argument("convolution grid must contain the comparison window");
    auto n = static_cast<Eigen::Index>(std::round(2.0 * grid_radius / dx)) + 1;
    // p_s on the doubled lattice so x_j - x_i never leaves it.
    auto n_ext = 2 * (n - 1) + 1;
    Eigen::ArrayXd pt(n), ps_ext(n_ext);
    for (Eigen::Index i = 0; i < n; ++i) pt(i) = kernel.density_pt(t, -grid_radius + dx * i);
    for (Eigen::Index i = 0; i < n_ext; ++i)
        ps_ext(i) = kernel.density_pt(s, -2.0 * grid_radius + dx * i);

    double gap = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        double xj = -grid_radius + dx * j;
        if (std::abs(xj) > x_window) continue;
        // conv(x_j) = dx * sum_i p_t(x_i) p_s(x_j - x_i), trapezoid endpoints halved.
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
            acc += w * pt(i) * ps_ext(j - i + (n - 1));
        }
        double conv = dx * acc;
        gap = std::max(gap, std::abs(conv - kernel.density_pt(t + s, xj)));
    }
    return gap;
}

} // namespace supersim
