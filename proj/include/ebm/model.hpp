#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>

#include "ebm/errors.hpp"

namespace ebm {

/// Signed quartic |T|^3 T. Defined for all real T so the vector field makes
/// sense for negative temperatures; positivity of trajectories is a property
/// that gets verified, not assumed.
inline double signed_quartic(double t) {
    return std::fabs(t) * t * t * t;
}

/// d/dT |T|^3 T = 4 |T|^3, valid everywhere including T = 0.
inline double signed_quartic_deriv(double t) {
    double a = std::fabs(t);
    return 4.0 * a * a * a;
}

struct SlopeResult {
    double left = 0.0;  // one-sided slope from below, K^-1
    double right = 0.0; // one-sided slope from above, K^-1
    bool kink = false;  // true exactly at a ramp corner
    double value() const { return kink ? 0.5 * (left + right) : left; }
};

/// Piecewise-linear nondecreasing coalbedo ramp: beta_minus below t_minus,
/// beta_plus above t_plus, linear in between.
struct CoalbedoRamp {
    double beta_minus = 0.3;
    double beta_plus = 0.7;
    double t_minus = 250.0;
    double t_plus = 280.0;

    double ramp_slope() const {
        return (beta_plus - beta_minus) / (t_plus - t_minus);
    }

    double value(double t) const {
        if (t <= t_minus) return beta_minus;
        if (t >= t_plus) return beta_plus;
        return beta_minus + (beta_plus - beta_minus) * (t - t_minus) / (t_plus - t_minus);
    }

    /// Slope with kink reporting: 0 on the flat pieces, ramp slope strictly
    /// inside, both one-sided values at the corners.
    SlopeResult slope(double t) const {
        SlopeResult r;
        const double s = ramp_slope();
        if (t == t_minus) {
            r.left = 0.0;
            r.right = s;
            r.kink = true;
        } else if (t == t_plus) {
            r.left = s;
            r.right = 0.0;
            r.kink = true;
        } else if (t < t_minus || t > t_plus) {
            r.left = r.right = 0.0;
        } else {
            r.left = r.right = s;
        }
        return r;
    }

    bool at_kink(double t, double tol = 0.0) const {
        return std::fabs(t - t_minus) <= tol || std::fabs(t - t_plus) <= tol;
    }

    void validate() const {
        if (!(t_minus > 0.0) || !(t_plus > t_minus))
            raise(ErrorCode::InvalidParams, "coalbedo ramp requires t_plus > t_minus > 0");
        if (!(beta_minus > 0.0) || !(beta_plus > beta_minus))
            raise(ErrorCode::InvalidParams, "coalbedo ramp requires beta_plus > beta_minus > 0");
    }
};

/// All physical constants of a scenario. Single source of truth; every other
/// module takes these by const reference.
///
/// Units: gamma_* J m^-2 K^-1, lambda W m^-2 K^-1, sigma_b W m^-2 K^-4,
/// q W m^-2, temperatures K. epsilon_a is dimensionless; the bounded regime
/// is (0,2), values > 2 are admitted for blow-up studies.
struct ModelParams {
    double gamma_a = 1.0e7;
    double gamma_s = 2.0e8;
    double lambda = 0.0;
    double epsilon_a = 0.62;
    double sigma_b = 5.67e-8;
    double q = 420.0;
    CoalbedoRamp coalbedo_s{};
    std::optional<CoalbedoRamp> coalbedo_a{}; // absent means R_a == 0

    void validate() const {
        if (!(gamma_a > 0.0) || !(gamma_s > 0.0))
            raise(ErrorCode::InvalidParams, "heat capacities must be positive");
        if (!(lambda >= 0.0))
            raise(ErrorCode::InvalidParams, "lambda must be nonnegative");
        if (!(epsilon_a > 0.0))
            raise(ErrorCode::InvalidParams, "epsilon_a must be positive");
        if (!(sigma_b > 0.0) || !(q > 0.0))
            raise(ErrorCode::InvalidParams, "sigma_b and q must be positive");
        coalbedo_s.validate();
        if (coalbedo_a) {
            coalbedo_a->validate();
            if (!(coalbedo_a->beta_minus >= 0.0))
                raise(ErrorCode::InvalidParams, "atmospheric coalbedo must be nonnegative");
        }
    }
};

struct State {
    double t_a = 0.0; // atmosphere temperature, K
    double t_s = 0.0; // surface temperature, K
};

struct Rates {
    double dt_a = 0.0; // K s^-1
    double dt_s = 0.0; // K s^-1
    double norm_inf() const { return std::max(std::fabs(dt_a), std::fabs(dt_s)); }
};

/// 2x2 Jacobian of the vector field with derived stability scalars.
struct Jacobian2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0; // s^-1

    double trace() const { return a11 + a22; }
    double det() const { return a11 * a22 - a12 * a21; }

    std::array<std::complex<double>, 2> eigenvalues() const {
        const double tr = trace();
        const double disc = 0.25 * tr * tr - det();
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            return {std::complex<double>(0.5 * tr - s, 0.0),
                    std::complex<double>(0.5 * tr + s, 0.0)};
        }
        const double s = std::sqrt(-disc);
        return {std::complex<double>(0.5 * tr, -s), std::complex<double>(0.5 * tr, s)};
    }
};

/// Right-hand side F of the autonomous system
///   gamma_a T_a' = -lambda (T_a - T_s) + eps_a sigma |T_s|^3 T_s
///                  - 2 eps_a sigma |T_a|^3 T_a + q beta_a(T_a)
///   gamma_s T_s' = -lambda (T_s - T_a) - sigma |T_s|^3 T_s
///                  + eps_a sigma |T_a|^3 T_a + q beta_s(T_s)
Rates vector_field(const ModelParams& p, const State& s);

/// Exact Jacobian of vector_field. Throws KinkPoint when t_s sits on a corner
/// of beta_s (or t_a on a corner of beta_a, when present): the ramp slope is
/// undefined there and no subgradient is guessed.
Jacobian2 jacobian(const ModelParams& p, const State& s);

} // namespace ebm
