#include "ebm/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ebm {

const char* to_string(SweepParam p) {
    return p == SweepParam::EpsilonA ? "epsilon_a" : "lambda";
}

namespace {

// gamma_a gamma_s det DF at an off-ramp equilibrium (beta_s' = 0 there).
double gg_det_off_ramp(const ModelParams& p, const State& s) {
    const double es = p.epsilon_a * p.sigma_b;
    const double ta3 = s.t_a * s.t_a * s.t_a;
    const double ts3 = s.t_s * s.t_s * s.t_s;
    const double m11 = -p.lambda - 8.0 * es * ta3;
    const double m12 = p.lambda + 4.0 * es * ts3;
    const double m21 = p.lambda + 4.0 * es * ta3;
    const double m22 = -p.lambda - 4.0 * p.sigma_b * ts3;
    const double det = m11 * m22 - m12 * m21;
    const double scale = std::fabs(m11 * m22) + std::fabs(m12 * m21);
    if (std::fabs(det) <= 1e-12 * scale)
        raise(ErrorCode::Degenerate, "equilibrium determinant is numerically zero");
    return det;
}

void require_off_ramp(const Equilibrium& e) {
    if (e.cls != EquilibriumClass::Cold && e.cls != EquilibriumClass::Warm)
        raise(ErrorCode::OnRamp, "derivative formulas hold only off the coalbedo ramp");
}

} // namespace

DerivativePair d_eq_d_lambda(const ModelParams& p, const Equilibrium& e) {
    require_off_ramp(e);
    const double det = gg_det_off_ramp(p, e.state);
    const double ta = e.state.t_a, ts = e.state.t_s;
    const double pref = (ts - ta) / det;
    DerivativePair d;
    d.d_ta = pref * 4.0 * p.sigma_b * (1.0 - p.epsilon_a) * ts * ts * ts;
    d.d_ts = pref * (-4.0) * p.epsilon_a * p.sigma_b * ta * ta * ta;
    return d;
}

DerivativePair d_eq_d_epsilon(const ModelParams& p, const Equilibrium& e) {
    require_off_ramp(e);
    const double det = gg_det_off_ramp(p, e.state);
    const double ta = e.state.t_a, ts = e.state.t_s;
    const double ta3 = ta * ta * ta, ta4 = ta3 * ta;
    const double ts3 = ts * ts * ts, ts4 = ts3 * ts;
    DerivativePair d;
    d.d_ts = (p.lambda * p.sigma_b * (ts4 - ta4) +
              4.0 * p.epsilon_a * p.sigma_b * p.sigma_b * ta3 * ts4) /
             det;
    d.d_ta = p.sigma_b *
             (p.lambda * (ts4 - ta4) +
              4.0 * p.sigma_b * ts3 * (ts4 - (2.0 - p.epsilon_a) * ta4)) /
             det;
    d.unproven_sign = p.epsilon_a < 1.0 && p.lambda > 0.0;
    return d;
}

namespace {

struct Branch {
    int id;
    double last_ts;
    bool matched;
};

} // namespace

SweepResult sweep(const ModelParams& p, SweepParam param, double from, double to,
                  int n_steps) {
    if (n_steps < 1) raise(ErrorCode::RangeInvalid, "sweep needs at least one step");
    if (param == SweepParam::EpsilonA) {
        if (!(from > 0.0 && from < 2.0 && to > 0.0 && to < 2.0))
            raise(ErrorCode::RangeInvalid, "epsilon_a sweep range must lie in (0,2)");
    } else {
        if (!(from >= 0.0 && to >= 0.0))
            raise(ErrorCode::RangeInvalid, "lambda sweep range must be nonnegative");
    }

    SweepResult result;
    result.param = param;
    std::vector<Branch> branches;
    int next_id = 0;
    double prev_value = from;

    for (int step = 0; step < n_steps; ++step) {
        const double value =
            n_steps == 1 ? from : from + (to - from) * step / (n_steps - 1.0);
        ModelParams pv = p;
        (param == SweepParam::EpsilonA ? pv.epsilon_a : pv.lambda) = value;

        std::vector<Equilibrium> eqs = find_equilibria(pv);

        // Matching cap: half of the smallest inter-equilibrium gap, so a root
        // can only inherit a branch id it is unambiguously closest to.
        double cap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < eqs.size(); ++i)
            cap = std::min(cap, 0.5 * (eqs[i].state.t_s - eqs[i - 1].state.t_s));

        for (Branch& b : branches) b.matched = false;
        std::vector<int> assigned(eqs.size(), -1);
        for (std::size_t i = 0; i < eqs.size(); ++i) {
            double best = cap;
            Branch* pick = nullptr;
            for (Branch& b : branches) {
                if (b.matched) continue;
                const double dist = std::fabs(b.last_ts - eqs[i].state.t_s);
                if (dist <= best) {
                    best = dist;
                    pick = &b;
                }
            }
            if (pick) {
                pick->matched = true;
                pick->last_ts = eqs[i].state.t_s;
                assigned[i] = pick->id;
            }
        }
        for (std::size_t i = 0; i < eqs.size(); ++i) {
            if (assigned[i] >= 0) continue;
            assigned[i] = next_id++;
            branches.push_back({assigned[i], eqs[i].state.t_s, true});
            if (step > 0)
                result.events.push_back(
                    {SweepEvent::Kind::Birth, assigned[i], prev_value, value});
        }
        // Unmatched branches die at this step: fold evented, never extrapolated.
        for (auto it = branches.begin(); it != branches.end();) {
            if (!it->matched) {
                result.events.push_back({SweepEvent::Kind::Death, it->id, prev_value, value});
                it = branches.erase(it);
            } else {
                ++it;
            }
        }

        for (std::size_t i = 0; i < eqs.size(); ++i) {
            SweepRecord rec;
            rec.value = value;
            rec.branch = assigned[i];
            rec.state = eqs[i].state;
            rec.cls = eqs[i].cls;
            rec.verdict = eqs[i].stability.verdict;
            if (rec.cls == EquilibriumClass::Cold || rec.cls == EquilibriumClass::Warm) {
                try {
                    rec.deriv = param == SweepParam::EpsilonA ? d_eq_d_epsilon(pv, eqs[i])
                                                              : d_eq_d_lambda(pv, eqs[i]);
                    rec.has_derivative = true;
                } catch (const Error&) {
                    rec.has_derivative = false;
                }
            }
            result.records.push_back(rec);
        }
        prev_value = value;
    }
    return result;
}

JumpResult greenhouse_jump(const ModelParams& p, double eps_star, double eps_plus,
                           const IntegrationOptions& opts) {
    if (!(eps_star > 0.0 && eps_star < 2.0) || !(eps_plus < 2.0) || eps_plus < eps_star)
        raise(ErrorCode::RangeInvalid, "greenhouse jump requires eps_star <= eps_plus < 2");

    ModelParams ps = p;
    ps.epsilon_a = eps_star;
    std::vector<Equilibrium> eqs = find_equilibria(ps);
    const auto warm_it =
        std::find_if(eqs.begin(), eqs.end(), [](const Equilibrium& e) {
            return e.cls == EquilibriumClass::Warm;
        });
    if (warm_it == eqs.end())
        raise(ErrorCode::NoWarmEquilibrium, "no warm equilibrium at eps_star");

    JumpResult out;
    out.old_warm = *warm_it;

    if (eps_plus == eps_star) {
        out.new_warm = out.old_warm;
        out.trajectory.t.push_back(0.0);
        out.trajectory.y.push_back(out.old_warm.state);
        out.trajectory.termination = Termination::Converged;
        return out;
    }

    ModelParams pp = p;
    pp.epsilon_a = eps_plus;
    const State s0 = out.old_warm.state;
    const Rates r0 = vector_field(pp, s0);
    out.ta_rate0 = r0.dt_a;
    out.ts_rate0 = r0.dt_s;
    const double dq = p.sigma_b * (eps_plus - eps_star);
    out.ta_rate0_identity =
        dq * (signed_quartic(s0.t_s) - 2.0 * signed_quartic(s0.t_a)) / p.gamma_a;
    out.ts_rate0_identity = dq * signed_quartic(s0.t_a) / p.gamma_s;

    out.trajectory = integrate(pp, s0, opts);
    if (out.trajectory.termination != Termination::Converged)
        raise(ErrorCode::CrossCheck, "jump trajectory failed to converge");

    std::vector<Equilibrium> eqs_plus = find_equilibria(pp);
    const auto new_warm = std::find_if(eqs_plus.begin(), eqs_plus.end(), [](const Equilibrium& e) {
        return e.cls == EquilibriumClass::Warm;
    });
    if (new_warm == eqs_plus.end())
        raise(ErrorCode::NoWarmEquilibrium, "no warm equilibrium at eps_plus");
    out.new_warm = *new_warm;

    const State& end = out.trajectory.last_state();
    const double dist = std::max(std::fabs(end.t_a - out.new_warm.state.t_a),
                                 std::fabs(end.t_s - out.new_warm.state.t_s));
    if (dist > 1e-4)
        raise(ErrorCode::CrossCheck, "jump did not land on the new warm equilibrium");
    if (!(out.new_warm.state.t_s > out.old_warm.state.t_s))
        raise(ErrorCode::CrossCheck, "surface temperature did not rise across the jump");
    return out;
}

HysteresisResult hysteresis_loop(const ModelParams& p, const std::vector<double>& eps_path,
                                 const IntegrationOptions& opts) {
    for (double e : eps_path)
        if (!(e > 0.0 && e < 2.0))
            raise(ErrorCode::RangeInvalid, "hysteresis path must lie in (0,2)");

    HysteresisResult out;
    if (eps_path.empty()) return out;

    auto capture_class = [](const std::vector<Equilibrium>& eqs, const State& s) {
        double best = std::numeric_limits<double>::infinity();
        EquilibriumClass cls = EquilibriumClass::Cold;
        for (const Equilibrium& e : eqs) {
            const double d = std::max(std::fabs(e.state.t_a - s.t_a),
                                      std::fabs(e.state.t_s - s.t_s));
            if (d < best) {
                best = d;
                cls = e.cls;
            }
        }
        return cls;
    };

    // Start on the warmest stable branch of the first path value.
    ModelParams p0 = p;
    p0.epsilon_a = eps_path.front();
    std::vector<Equilibrium> eqs0 = find_equilibria(p0);
    const Equilibrium* start = nullptr;
    for (const Equilibrium& e : eqs0)
        if (e.stability.verdict == StabilityVerdict::AsymptoticallyStable) start = &e;
    if (!start)
        raise(ErrorCode::Degenerate, "no stable equilibrium at the first path value");

    State state = start->state;
    out.records.push_back({eps_path.front(), state, start->cls, Termination::Converged});

    for (std::size_t i = 1; i < eps_path.size(); ++i) {
        ModelParams pv = p;
        pv.epsilon_a = eps_path[i];
        const Trajectory traj = integrate(pv, state, opts);
        state = traj.last_state();
        HysteresisRecord rec;
        rec.epsilon_a = eps_path[i];
        rec.terminal = state;
        rec.termination = traj.termination;
        rec.captured = capture_class(find_equilibria(pv), state);
        if (rec.termination == Termination::Converged) {
            const HysteresisRecord& prev = out.records.back();
            const bool was_cw = prev.captured == EquilibriumClass::Cold ||
                                prev.captured == EquilibriumClass::Warm;
            if (was_cw && rec.captured != prev.captured &&
                prev.termination == Termination::Converged)
                out.jumps.push_back({prev.epsilon_a, rec.epsilon_a, prev.captured, rec.captured});
        }
        out.records.push_back(rec);
    }
    return out;
}

} // namespace ebm
