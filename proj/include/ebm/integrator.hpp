#pragma once

#include <vector>

#include "ebm/model.hpp"

namespace ebm {

inline constexpr double kSecondsPerYear = 365.25 * 86400.0;

struct IntegrationOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-9;                       // K
    double t_max = 1.0e4 * kSecondsPerYear;      // s
    double convergence_tol = 1e-9;               // K/s on ||F||, K on displacement
    double blowup_threshold = 1e6;               // K
    long max_steps = 5'000'000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(t_max > 0.0) ||
            !(convergence_tol > 0.0) || !(blowup_threshold > 0.0) || max_steps <= 0)
            raise(ErrorCode::InvalidOptions, "integration options must be positive");
    }
};

enum class Termination { Converged, BlowUp, HorizonReached, StepLimit };

const char* to_string(Termination t);

struct Trajectory {
    std::vector<double> t;   // strictly increasing accepted times, s
    std::vector<State> y;
    Termination termination = Termination::HorizonReached;
    bool nan_detected = false; // set when a non-finite state forced the BlowUp verdict
    long accepted_steps = 0;

    double last_time() const { return t.back(); }
    const State& last_state() const { return y.back(); }
};

/// Terminal-only integration result for batch drivers that do not need the
/// sampled path (basin maps, capture bisection).
struct TerminalResult {
    Termination termination = Termination::HorizonReached;
    double t_end = 0.0;
    State end{};
    bool nan_detected = false;
    long accepted_steps = 0;
};

/// Adaptive embedded Runge-Kutta 4(5) (Dormand-Prince) with PI step control.
/// Terminates Converged when both ||F|| <= convergence_tol and the net state
/// displacement over a trailing window of 10 accepted steps is below
/// convergence_tol; BlowUp when max(|T_a|,|T_s|) reaches blowup_threshold
/// (last accepted time reported); a non-finite state yields BlowUp with the
/// nan_detected diagnostic rather than propagating NaN. Steps that straddle a
/// coalbedo ramp corner by more than the tolerance are rejected and retried
/// shorter.
Trajectory integrate(const ModelParams& p, const State& s0, const IntegrationOptions& opts);

TerminalResult integrate_terminal(const ModelParams& p, const State& s0,
                                  const IntegrationOptions& opts);

/// Invariant rectangle [0, m_a] x [0, mu * m_a] from the boundedness lemma:
/// mu is the midpoint of (epsilon_a^{1/4}, 2^{1/4}) and m_a the smallest value
/// (up to a factor-2 search, then bisected) for which the outward component of
/// the field is nonpositive on the top and right edges and s0 lies inside.
struct InvariantRectangle {
    double m_a = 0.0;
    double mu = 0.0;
    double m_s() const { return mu * m_a; }
    bool contains(const State& s, double tol = 0.0) const {
        return s.t_a >= -tol && s.t_s >= -tol && s.t_a <= m_a + tol && s.t_s <= m_s() + tol;
    }
};

InvariantRectangle invariant_rectangle(const ModelParams& p, const State& s0);

/// Eventual monotonicity of a converged trajectory: earliest sample after
/// which the successive differences of each component keep a constant sign up
/// to tol, with the per-component direction.
struct MonotoneTail {
    double switch_time = 0.0;
    std::size_t switch_index = 0;
    bool a_nondecreasing = true;
    bool s_nondecreasing = true;
};

MonotoneTail detect_monotone_tail(const Trajectory& traj, double tol);

} // namespace ebm
