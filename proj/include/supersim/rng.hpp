#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace supersim {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; the mixing step behind stream derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Module identifiers entering replicate seed derivation. Values are part of
// the reproducibility contract: changing them changes every derived stream.
enum class StreamModule : std::uint64_t {
    kernel = 1,
    stable_process = 2,
    superprocess = 3,
    loglap = 4,
    density = 5,
    regularity = 6,
    cli = 7,
};

// Replicate seed = chained SplitMix64 over (master seed, module id, index).
// Distinct (module, index) pairs get statistically independent streams.
inline std::uint64_t derive_seed(std::uint64_t master, StreamModule module, std::uint64_t index) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(module));
    h = splitmix64(h ^ index);
    return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform on the open interval (0,1); never returns an exact endpoint, so
// log() and the stable transform below stay finite.
inline double uniform_open01(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exp_draw(Rng& rng) { return -std::log(uniform_open01(rng)); }

// Symmetric stable variate with characteristic function exp(-|xi|^alpha),
// by the Chambers-Mallows-Stuck transform. alpha=2 reduces to N(0, sqrt 2)
// and alpha=1 to the standard Cauchy; both are special-cased.
class StableIncrementSampler {
  public:
    explicit StableIncrementSampler(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0 && alpha <= 2.0))
            throw std::invalid_argument("stable index alpha must lie in (0,2]");
    }

    double standard(Rng& rng) const {
        if (alpha_ == 2.0) {
            double r = std::sqrt(2.0 * exp_draw(rng));
            double theta = 2.0 * pi() * uniform_open01(rng);
            return std::sqrt(2.0) * r * std::cos(theta);
        }
        double v = pi() * (uniform_open01(rng) - 0.5);
        if (alpha_ == 1.0) return std::tan(v);
        double w = exp_draw(rng);
        double s = std::sin(alpha_ * v) / std::pow(std::cos(v), 1.0 / alpha_);
        return s * std::pow(std::cos((1.0 - alpha_) * v) / w, (1.0 - alpha_) / alpha_);
    }

    // Increment of the motion over elapsed time dt: dt^{1/alpha} scaling.
    double increment(Rng& rng, double dt) const {
        if (dt == 0.0) return 0.0;
        return std::pow(dt, 1.0 / alpha_) * standard(rng);
    }

    double alpha() const { return alpha_; }

  private:
    static constexpr double pi() { return 3.141592653589793238462643383279502884; }
    double alpha_;
};

// Critical offspring law with generating function f(s) = s + (1-s)^{1+beta}/(1+beta).
// p_0 = 1/(1+beta), p_1 = 0, and p_{k+1} = p_k (k-1-beta)/(k+1) for k >= 2.
// The tail is exact: P(K >= k+1) = beta Gamma(k-beta) / ((1+beta) Gamma(k+1) Gamma(1-beta)),
// which enables inverse-transform sampling without truncating the k^{-2-beta} tail.
class OffspringDistribution {
  public:
    explicit OffspringDistribution(double beta);

    int sample(Rng& rng) const;

    double pmf(int k) const;
    // P(K >= m) for m >= 2, from the closed-form tail.
    double tail(std::int64_t m) const;
    double beta() const { return beta_; }

  private:
    double beta_;
    double log_tail_coeff_;              // log(beta / ((1+beta) Gamma(1-beta)))
    std::vector<double> pmf_;            // p_0 .. p_{table_max}
    std::vector<double> cumulative_;     // running sums of pmf_
    static constexpr int table_max_ = 64;
};

} // namespace supersim
