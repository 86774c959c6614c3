#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "supersim/errors.hpp"

namespace supersim {

// Parameters of the measure-valued branching process: symmetric alpha-stable
// motion in one dimension and branching mechanism psi(v) = -a v + b v^{1+beta}.
struct ModelParams {
    double alpha = 1.8;   // motion index, (0,2]
    double beta = 0.5;    // branching index, (0,1)
    double a = 0.0;       // linear mass drift (supercritical if > 0)
    double b = 1.0;       // branching intensity; b = 0 degenerates to pure motion
    int d = 1;            // spatial dimension; only d = 1 is supported

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 2.0))
            throw config_error("alpha must lie in (0,2]");
        if (!(beta > 0.0 && beta < 1.0))
            throw config_error("beta must lie in (0,1)");
        if (!(b >= 0.0)) throw config_error("b must be non-negative");
        if (!std::isfinite(a)) throw config_error("a must be finite");
        if (d != 1) throw config_error("only dimension d = 1 is supported");
    }

    // Absolutely continuous states exist iff d < alpha/beta.
    bool density_regime() const { return d < alpha / beta; }
    // The density has a continuous version at fixed times iff alpha > 1 + beta (d = 1).
    bool continuity_regime() const { return alpha > 1.0 + beta; }
    // The pointwise/local dichotomy below is sharp iff beta > (alpha-1)/2.
    bool optimality_regime() const { return beta > (alpha - 1.0) / 2.0; }

    // Jump-intensity constant of the canonical measure: the compensator of the
    // process's jumps r delta_x is rho * ds X_s(dx) r^{-2-beta} dr with
    // rho = b (1+beta) beta / Gamma(1-beta).
    double jump_intensity_rho() const {
        return b * (1.0 + beta) * beta / std::tgamma(1.0 - beta);
    }
};

// Atomic approximation of the measure state: n equally weighted atoms.
struct ParticleCloud {
    double time = 0.0;
    double atom_mass = 1.0;       // weight carried by each position
    Eigen::ArrayXd positions;     // atom locations

    double total_mass() const { return atom_mass * static_cast<double>(positions.size()); }
};

// One recorded branching jump: at time s a mass r = K/N appeared at site x.
struct JumpEvent {
    double s = 0.0;
    double x = 0.0;
    double r = 0.0;
};

// Density values on a uniform grid over a window, with the bandwidth that
// produced them (zero for exact analytic fields).
struct DensityGrid {
    double x0 = 0.0;
    double dx = 0.0;
    Eigen::ArrayXd values;
    double bandwidth = 0.0;
    std::int64_t n_particles = 0;

    double x_at(Eigen::Index i) const { return x0 + dx * static_cast<double>(i); }
    Eigen::Index size() const { return values.size(); }
    double x_max() const { return x_at(values.size() - 1); }

    // Trapezoid mass of the grid restricted to the window.
    double integral() const {
        if (values.size() < 2) return 0.0;
        return dx * (values.sum() - 0.5 * (values(0) + values(values.size() - 1)));
    }
};

} // namespace supersim
