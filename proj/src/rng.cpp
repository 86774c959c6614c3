#include "supersim/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace supersim {

OffspringDistribution::OffspringDistribution(double beta) : beta_(beta) {
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("offspring index beta must lie in (0,1)");
    log_tail_coeff_ = std::log(beta_) - std::log1p(beta_) - std::lgamma(1.0 - beta_);

    pmf_.assign(table_max_ + 1, 0.0);
    pmf_[0] = 1.0 / (1.0 + beta_);
    pmf_[1] = 0.0;
    pmf_[2] = 0.5 * beta_;
    long double p = pmf_[2];
    for (int k = 2; k < table_max_; ++k) {
        p *= (static_cast<long double>(k) - 1.0L - static_cast<long double>(beta_)) /
             (static_cast<long double>(k) + 1.0L);
        pmf_[k + 1] = static_cast<double>(p);
    }
    cumulative_.assign(pmf_.size(), 0.0);
    long double c = 0.0L;
    for (std::size_t k = 0; k < pmf_.size(); ++k) {
        c += pmf_[k];
        cumulative_[k] = static_cast<double>(c);
    }
}

double OffspringDistribution::pmf(int k) const {
    if (k < 0) throw std::invalid_argument("offspring count must be non-negative");
    if (k <= table_max_) return pmf_[static_cast<std::size_t>(k)];
    return tail(k) - tail(static_cast<std::int64_t>(k) + 1);
}

double OffspringDistribution::tail(std::int64_t m) const {
    if (m <= 0) return 1.0;
    if (m == 1) return beta_ / (1.0 + beta_); // everything except p_0
    double lm = static_cast<double>(m);
    return std::exp(log_tail_coeff_ + std::lgamma(lm - 1.0 - beta_) - std::lgamma(lm));
}

int OffspringDistribution::sample(Rng& rng) const {
    double u = uniform_open01(rng);
    if (u <= cumulative_.back()) {
        auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
        return static_cast<int>(it - cumulative_.begin());
    }
    // Tail inversion on the survival function: K is the largest m with
    // tail(m) >= v, where v = 1 - u. tail is strictly decreasing in m here.
    double v = 1.0 - u;
    std::int64_t lo = table_max_ + 1;       // tail(lo) >= v by the branch above
    std::int64_t hi = lo;
    while (tail(hi * 2) >= v) hi *= 2;      // v > 0, so this terminates
    hi *= 2;                                 // tail(hi) < v
    while (hi - lo > 1) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (tail(mid) >= v)
            lo = mid;
        else
            hi = mid;
    }
    return static_cast<int>(lo);
}

} // namespace supersim
