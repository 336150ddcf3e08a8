#pragma once

#include <vector>

#include "ebm/integrator.hpp"
#include "ebm/model.hpp"

namespace ebm {

/// L(x) = (2x^4 - 1)/(1 - x), strictly increasing on [2^{-1/4}, 1) from 0 to
/// +infinity. Its inverse maps the reduced exchange strength K_ph / T_s^3
/// back to the equilibrium ratio rho = T_a^{(1)}/T_s.
double l_eval(double x);
double l_inverse(double y);

/// rho(t_s) = T_a^{(1)}(t_s)/t_s computed through L^{-1}(K_ph / t_s^3) with
/// K_ph = lambda/(eps sigma); cross-checked against solve_ta1. Returns the
/// degenerate constant 2^{-1/4} when lambda = 0.
double rho_of_ts(const ModelParams& p, double t_s);

/// N(rho) from the curvature analysis of T_a^{(1)}; equals 1 at 2^{-1/4} and
/// tends to -2 as rho -> 1^-. Accepts the closed interval.
double n_eval(double rho);

/// N*(rho) = -N(rho)/(8 rho^3 - 6 rho^4 - 1) + 4 (1/eps - 1/2)/(2 rho^4 - 1)^2.
/// Positive everywhere iff Phi is convex. Guarded within 1e-9 of both
/// endpoints where (2 rho^4 - 1) vanishes.
double n_star_eval(const ModelParams& p, double rho);
double n_star_value(double epsilon_a, double rho);

/// Complete Phi''(t_s), the lambda-dependent curvature part composed with the
/// exact 12 sigma (1 - eps/2) t_s^2 term. Falls back to the exact quartic
/// expression at lambda = 0.
double phi_second_closed(const ModelParams& p, double t_s);

struct EpsilonBracket {
    double lo = 0.0;
    double hi = 0.0;
};

/// Brackets the universal convexity-loss constant: the epsilon_a at which
/// min N* over (2^{-1/4}, 1) changes sign. Independent of lambda and of any
/// scenario by construction (N* depends on epsilon_a only).
EpsilonBracket bracket_epsilon_a0(double tol, int rho_samples = 100000);

/// Unique root of (gamma_s/gamma_a) mu = (eps - mu^4)/(eps (mu^4 - 2)) in
/// (2^{1/4}, eps^{1/4}); the critical slope of the linear comparison
/// certifying blow-up. Requires epsilon_a > 2.
double mu_star(const ModelParams& p);

/// Membership in the escape region: for lambda = 0 the two strict
/// inequalities sigma T_s^4 - q beta_s < eps sigma T_a^4 < eps sigma T_s^4 / 2;
/// for lambda > 0 (or beta_a present) the positivity of both field components
/// plus the floor T_a >= escape_floor_ta(p).
bool in_escape_region(const ModelParams& p, const State& s);

/// Asymptotic crossing floor T_a,* of the generalized escape region, located
/// by a logarithmic scan of T_a^{(2,g)}(T_s^{(1,g)}(T_a)) < T_a over
/// [1, 1e6] K with 2048 points.
double escape_floor_ta(const ModelParams& p);

struct BlowupCertificate {
    double entry_time = 0.0;     // tau_0: first accepted sample inside E
    State entry_state{};
    double mu = 0.0;             // comparison slope, in (2^{1/4}, mu*)
    double mu_star_value = 0.0;
    double analytic_bound = 0.0; // tau_0 + gamma_a / (3 eps sigma (mu^4 - 2) T_a(tau_0)^3)
    double observed_escape = 0.0; // first accepted time with max|T| >= threshold
    bool observed_within_bound = false;
    double min_tail_gap = 0.0;   // min over tail samples of T_s - mu T_a
    double ratio_min = 0.0;      // range of T_s/T_a over the tail
    double ratio_max = 0.0;
    Trajectory trajectory;
};

/// Integrates until the trajectory enters the escape region (tau_0), selects
/// a comparison slope, emits the analytic blow-up time bound, and continues
/// to the observed numerical escape. The observed escape never exceeds the
/// bound; both ends of the bracket are reported.
BlowupCertificate blow_up_certificate(const ModelParams& p, const State& s0,
                                      const IntegrationOptions& opts = {});

struct ConvexityReport {
    std::vector<double> rho_grid;
    std::vector<double> n_values;
    std::vector<double> n_star_values; // at the scenario's epsilon_a
    double n_star_min = 0.0;
    double rho_at_min = 0.0;
    double n_root = 0.0;               // root of N in (2^{-1/4}, 1), ~0.89
    int phi_second_sign_changes = 0;   // over a T_s scan at the scenario parameters
    bool phi_second_all_positive = false;
    double phi_second_min = 0.0;
    EpsilonBracket eps_a0{};
};

ConvexityReport convexity_report(const ModelParams& p, double eps_tol = 1e-4,
                                 int rho_samples = 2048);

} // namespace ebm
