#pragma once

#include <vector>

#include "ebm/equilibria.hpp"
#include "ebm/integrator.hpp"

namespace ebm {

struct DerivativePair {
    double d_ta = 0.0;
    double d_ts = 0.0;
    bool unproven_sign = false; // d_ta sign open for epsilon_a < 1, lambda > 0
};

/// Implicit-function-theorem derivative of a cold/warm equilibrium in lambda:
/// (dT_a, dT_s)/dlambda = (T_s - T_a)/(gg det) * (4 sigma (1-eps) T_s^3,
/// -4 eps sigma T_a^3). The surface component is negative for every
/// eps in (0,2); the atmospheric one carries the sign of (1 - eps).
DerivativePair d_eq_d_lambda(const ModelParams& p, const Equilibrium& e);

/// Derivative in epsilon_a:
///   gg det * dT_s/deps = lambda sigma (T_s^4 - T_a^4) + 4 eps sigma^2 T_a^3 T_s^4 > 0,
///   gg det * dT_a/deps = sigma [lambda (T_s^4 - T_a^4)
///                               + 4 sigma T_s^3 (T_s^4 - (2-eps) T_a^4)].
/// The atmospheric sign is only proven for eps >= 1 (or lambda = 0); outside
/// that range the value is flagged unproven_sign and reported, never asserted.
DerivativePair d_eq_d_epsilon(const ModelParams& p, const Equilibrium& e);

enum class SweepParam { EpsilonA, Lambda };
const char* to_string(SweepParam p);

struct SweepRecord {
    double value = 0.0; // parameter value
    int branch = -1;
    State state{};
    EquilibriumClass cls = EquilibriumClass::Cold;
    StabilityVerdict verdict = StabilityVerdict::Degenerate;
    bool has_derivative = false; // present only off the ramp
    DerivativePair deriv{};
};

struct SweepEvent {
    enum class Kind { Birth, Death };
    Kind kind = Kind::Birth;
    int branch = -1;
    double param_before = 0.0; // bracketing parameter pair for the fold
    double param_after = 0.0;
};

struct SweepResult {
    SweepParam param = SweepParam::EpsilonA;
    std::vector<SweepRecord> records;
    std::vector<SweepEvent> events;
};

/// Warm-started continuation over n_steps parameter values: every step
/// re-solves all equilibria and matches them to branches by nearest T_s,
/// capped at half the minimum inter-equilibrium gap. Branch births and
/// deaths (folds) are evented; nothing is extrapolated past them.
SweepResult sweep(const ModelParams& p, SweepParam param, double from, double to,
                  int n_steps);

struct JumpResult {
    Equilibrium old_warm{};
    Equilibrium new_warm{};
    Trajectory trajectory;
    double ta_rate0 = 0.0;          // field at the old equilibrium under eps_plus
    double ts_rate0 = 0.0;
    double ta_rate0_identity = 0.0; // sigma (eps+ - eps*) (T_s^4 - 2 T_a^4) / gamma_a
    double ts_rate0_identity = 0.0; // sigma (eps+ - eps*) T_a^4 / gamma_s
};

/// Greenhouse-jump experiment: start at the warm equilibrium of eps_star,
/// raise the absorptivity to eps_plus and integrate. Verifies convergence to
/// the new warm equilibrium with a strictly larger surface temperature.
JumpResult greenhouse_jump(const ModelParams& p, double eps_star, double eps_plus,
                           const IntegrationOptions& opts = {});

struct HysteresisRecord {
    double epsilon_a = 0.0;
    State terminal{};
    EquilibriumClass captured = EquilibriumClass::Cold;
    Termination termination = Termination::Converged;
};

struct HysteresisJump {
    double eps_before = 0.0;
    double eps_after = 0.0;
    EquilibriumClass from = EquilibriumClass::Cold;
    EquilibriumClass to = EquilibriumClass::Warm;
};

struct HysteresisResult {
    std::vector<HysteresisRecord> records;
    std::vector<HysteresisJump> jumps;
};

/// Quasi-static protocol: at each value of eps_path, integrate the full
/// nonlinear system from the previous attractor state to convergence and
/// record which branch captured it. A branch change between consecutive path
/// values is a jump with its bracketing parameter pair. The initial state is
/// the warmest stable equilibrium at the first path value.
HysteresisResult hysteresis_loop(const ModelParams& p, const std::vector<double>& eps_path,
                                 const IntegrationOptions& opts = {});

} // namespace ebm
