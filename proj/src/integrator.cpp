#include "ebm/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ebm {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::Converged: return "Converged";
        case Termination::BlowUp: return "BlowUp";
        case Termination::HorizonReached: return "HorizonReached";
        case Termination::StepLimit: return "StepLimit";
    }
    return "?";
}

namespace {

// Dormand-Prince 5(4) coefficients (FSAL form).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Vec2 {
    double a, s;
};

inline Vec2 to_vec(const Rates& r) { return {r.dt_a, r.dt_s}; }

inline bool finite(const Vec2& v) { return std::isfinite(v.a) && std::isfinite(v.s); }

inline Vec2 field(const ModelParams& p, double ta, double ts) {
    return to_vec(vector_field(p, {ta, ts}));
}

// Hairer-style starting step size guess.
double initial_step(const ModelParams& p, const State& y0, const Vec2& f0,
                    const IntegrationOptions& o) {
    const double sc_a = o.abs_tol + o.rel_tol * std::fabs(y0.t_a);
    const double sc_s = o.abs_tol + o.rel_tol * std::fabs(y0.t_s);
    const double d0 = std::sqrt(0.5 * ((y0.t_a / sc_a) * (y0.t_a / sc_a) +
                                        (y0.t_s / sc_s) * (y0.t_s / sc_s)));
    const double d1 = std::sqrt(0.5 * ((f0.a / sc_a) * (f0.a / sc_a) +
                                        (f0.s / sc_s) * (f0.s / sc_s)));
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, o.t_max);

    const Vec2 f1 = field(p, y0.t_a + h0 * f0.a, y0.t_s + h0 * f0.s);
    if (!finite(f1)) return std::max(1e-6, h0 * 1e-3);
    const double d2 = std::sqrt(0.5 * (((f1.a - f0.a) / sc_a) * ((f1.a - f0.a) / sc_a) +
                                        ((f1.s - f0.s) / sc_s) * ((f1.s - f0.s) / sc_s))) /
                      h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm > 1e-15 ? std::pow(0.01 / dm, 0.2) : std::max(1e-6, h0 * 1e-3);
    return std::min({100.0 * h0, h1, o.t_max});
}

// A step from ts0 to ts1 "straddles" corner c when it jumps across it by more
// than tol on both sides; such steps are re-tried shorter so the sampled path
// resolves the slope change.
bool straddles(double x0, double x1, double c, double tol) {
    return (x0 - c) * (x1 - c) < 0.0 &&
           std::min(std::fabs(x0 - c), std::fabs(x1 - c)) > tol;
}

struct StepOutput {
    std::vector<double>* ts;
    std::vector<State>* ys;
    void push(double t, const State& y) {
        if (ts) {
            ts->push_back(t);
            ys->push_back(y);
        }
    }
};

TerminalResult integrate_core(const ModelParams& p, const State& s0,
                              const IntegrationOptions& o, StepOutput out) {
    p.validate();
    o.validate();
    if (!std::isfinite(s0.t_a) || !std::isfinite(s0.t_s))
        raise(ErrorCode::InvalidOptions, "initial state must be finite");

    TerminalResult res;
    double t = 0.0;
    State y = s0;
    out.push(t, y);

    Vec2 f = field(p, y.t_a, y.t_s);

    // Trailing window of the last 11 accepted states for the displacement test.
    std::array<State, 11> window{};
    window[0] = y;
    long accepted = 0;

    auto converged_now = [&](const Vec2& fv) {
        if (std::max(std::fabs(fv.a), std::fabs(fv.s)) > o.convergence_tol) return false;
        const long back = std::min<long>(accepted, 10);
        const State& old = window[(accepted - back) % 11];
        const double disp =
            std::max(std::fabs(y.t_a - old.t_a), std::fabs(y.t_s - old.t_s));
        return disp <= o.convergence_tol;
    };

    auto finish = [&](Termination term) {
        res.termination = term;
        res.t_end = t;
        res.end = y;
        res.accepted_steps = accepted;
        return res;
    };

    if (converged_now(f)) return finish(Termination::Converged);
    if (std::max(std::fabs(y.t_a), std::fabs(y.t_s)) >= o.blowup_threshold)
        return finish(Termination::BlowUp);

    const double kink_tol = std::max(o.abs_tol, 1e-9);
    double h = initial_step(p, y, f, o);
    double err_old = 1e-4;
    bool just_rejected = false;
    long attempts = 0;
    const long attempt_limit = 4 * o.max_steps;

    while (t < o.t_max) {
        if (accepted >= o.max_steps || ++attempts > attempt_limit)
            return finish(Termination::StepLimit);
        h = std::min(h, o.t_max - t);
        if (h <= std::fabs(t) * 1e-16) return finish(Termination::StepLimit);

        const double ya = y.t_a, ys = y.t_s;
        const Vec2 k1 = f;
        const Vec2 k2 = field(p, ya + h * a21 * k1.a, ys + h * a21 * k1.s);
        const Vec2 k3 = field(p, ya + h * (a31 * k1.a + a32 * k2.a),
                              ys + h * (a31 * k1.s + a32 * k2.s));
        const Vec2 k4 = field(p, ya + h * (a41 * k1.a + a42 * k2.a + a43 * k3.a),
                              ys + h * (a41 * k1.s + a42 * k2.s + a43 * k3.s));
        const Vec2 k5 =
            field(p, ya + h * (a51 * k1.a + a52 * k2.a + a53 * k3.a + a54 * k4.a),
                  ys + h * (a51 * k1.s + a52 * k2.s + a53 * k3.s + a54 * k4.s));
        const Vec2 k6 = field(
            p, ya + h * (a61 * k1.a + a62 * k2.a + a63 * k3.a + a64 * k4.a + a65 * k5.a),
            ys + h * (a61 * k1.s + a62 * k2.s + a63 * k3.s + a64 * k4.s + a65 * k5.s));

        const double yna = ya + h * (b1 * k1.a + b3 * k3.a + b4 * k4.a + b5 * k5.a + b6 * k6.a);
        const double yns = ys + h * (b1 * k1.s + b3 * k3.s + b4 * k4.s + b5 * k5.s + b6 * k6.s);

        bool bad = !(std::isfinite(yna) && std::isfinite(yns));
        Vec2 k7{0.0, 0.0};
        double err = 0.0;
        if (!bad) {
            k7 = field(p, yna, yns);
            bad = !finite(k7);
        }
        if (!bad) {
            const double ea = h * (e1 * k1.a + e3 * k3.a + e4 * k4.a + e5 * k5.a +
                                   e6 * k6.a + e7 * k7.a);
            const double es = h * (e1 * k1.s + e3 * k3.s + e4 * k4.s + e5 * k5.s +
                                   e6 * k6.s + e7 * k7.s);
            const double sc_a = o.abs_tol + o.rel_tol * std::max(std::fabs(ya), std::fabs(yna));
            const double sc_s = o.abs_tol + o.rel_tol * std::max(std::fabs(ys), std::fabs(yns));
            err = std::sqrt(0.5 * ((ea / sc_a) * (ea / sc_a) + (es / sc_s) * (es / sc_s)));
            bad = !std::isfinite(err);
        }

        if (bad) {
            h *= 0.5;
            just_rejected = true;
            if (h <= std::max(1e-30, std::fabs(t) * 1e-15)) {
                res.nan_detected = true;
                return finish(Termination::BlowUp);
            }
            continue;
        }

        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            just_rejected = true;
            continue;
        }

        // Accept-candidate: reject if the surface temperature (or atmospheric
        // one under beta_a) jumps across a ramp corner without resolving it.
        bool kink_reject = false;
        for (double c : {p.coalbedo_s.t_minus, p.coalbedo_s.t_plus}) {
            if (straddles(ys, yns, c, kink_tol)) kink_reject = true;
        }
        if (p.coalbedo_a) {
            for (double c : {p.coalbedo_a->t_minus, p.coalbedo_a->t_plus}) {
                if (straddles(ya, yna, c, kink_tol)) kink_reject = true;
            }
        }
        if (kink_reject && h > 16.0 * std::fabs(t) * 1e-16) {
            h *= 0.5;
            just_rejected = true;
            continue;
        }

        // Accept.
        t += h;
        y = {yna, yns};
        f = k7; // FSAL
        ++accepted;
        window[accepted % 11] = y;
        out.push(t, y);

        if (std::max(std::fabs(y.t_a), std::fabs(y.t_s)) >= o.blowup_threshold)
            return finish(Termination::BlowUp);
        if (converged_now(f)) return finish(Termination::Converged);

        // PI controller.
        const double err_clip = std::max(err, 1e-10);
        double fac = 0.9 * std::pow(err_clip, -0.17) * std::pow(err_old, 0.08);
        fac = std::clamp(fac, 0.2, just_rejected ? 1.0 : 6.0);
        h *= fac;
        err_old = err_clip;
        just_rejected = false;
    }
    return finish(Termination::HorizonReached);
}

} // namespace

Trajectory integrate(const ModelParams& p, const State& s0, const IntegrationOptions& opts) {
    Trajectory traj;
    StepOutput out{&traj.t, &traj.y};
    TerminalResult r = integrate_core(p, s0, opts, out);
    traj.termination = r.termination;
    traj.nan_detected = r.nan_detected;
    traj.accepted_steps = r.accepted_steps;
    return traj;
}

TerminalResult integrate_terminal(const ModelParams& p, const State& s0,
                                  const IntegrationOptions& opts) {
    return integrate_core(p, s0, opts, StepOutput{nullptr, nullptr});
}

InvariantRectangle invariant_rectangle(const ModelParams& p, const State& s0) {
    p.validate();
    if (!(p.epsilon_a > 0.0 && p.epsilon_a < 2.0))
        raise(ErrorCode::EpsilonOutOfRange, "invariant rectangle requires epsilon_a in (0,2)");
    if (s0.t_a < 0.0 || s0.t_s < 0.0)
        raise(ErrorCode::NegativeInput, "initial state must be nonnegative");

    const double mu = 0.5 * (std::pow(p.epsilon_a, 0.25) + std::pow(2.0, 0.25));
    const double es = p.epsilon_a * p.sigma_b;

    // Outward components of the field on the right (T_a = m) and top
    // (T_s = mu m) edges; both are maximized at the shared corner.
    auto edges_ok = [&](double m) {
        const double ms = mu * m;
        double right = -p.lambda * (m - ms) + es * ms * ms * ms * ms - 2.0 * es * m * m * m * m;
        if (p.coalbedo_a) right += p.q * p.coalbedo_a->value(m);
        double top = -p.lambda * (ms - m) - p.sigma_b * ms * ms * ms * ms +
                     es * m * m * m * m + p.q * p.coalbedo_s.value(ms);
        return right <= 0.0 && top <= 0.0;
    };

    const double floor = std::max({s0.t_a, s0.t_s / mu, 1.0});
    double hi = floor;
    int guard = 0;
    while (!edges_ok(hi)) {
        hi *= 2.0;
        if (++guard > 600)
            raise(ErrorCode::DomainError, "invariant rectangle search failed to close");
    }
    double lo = std::max(floor, hi * 0.5);
    if (hi > floor) {
        while (hi - lo > 1e-3 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (edges_ok(mid))
                hi = mid;
            else
                lo = mid;
        }
    }
    return InvariantRectangle{hi, mu};
}

MonotoneTail detect_monotone_tail(const Trajectory& traj, double tol) {
    if (traj.termination != Termination::Converged)
        raise(ErrorCode::NotConverged, "monotone tail requires a converged trajectory");
    if (!(tol >= 0.0)) raise(ErrorCode::InvalidOptions, "tol must be nonnegative");

    const std::size_t n = traj.y.size();
    MonotoneTail tail;
    if (n < 2) {
        tail.switch_time = traj.t.empty() ? 0.0 : traj.t.front();
        return tail;
    }

    std::size_t switch_idx = 0;
    for (int comp = 0; comp < 2; ++comp) {
        auto value = [&](std::size_t i) {
            return comp == 0 ? traj.y[i].t_a : traj.y[i].t_s;
        };
        int cur = 0;
        std::size_t start = 0; // first index of the current monotone run
        for (std::size_t i = 1; i < n; ++i) {
            const double d = value(i) - value(i - 1);
            if (std::fabs(d) <= tol) continue;
            const int s = d > 0.0 ? 1 : -1;
            if (cur != 0 && s != cur) start = i - 1;
            cur = s;
        }
        switch_idx = std::max(switch_idx, start);
    }
    tail.switch_index = switch_idx;
    tail.switch_time = traj.t[switch_idx];

    // Direction of the tail per component: sign of the net change, flat
    // counts as nondecreasing.
    tail.a_nondecreasing = traj.y[n - 1].t_a >= traj.y[switch_idx].t_a - tol;
    tail.s_nondecreasing = traj.y[n - 1].t_s >= traj.y[switch_idx].t_s - tol;
    return tail;
}

} // namespace ebm
