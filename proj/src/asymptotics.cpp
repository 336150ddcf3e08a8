#include "ebm/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebm/equilibria.hpp"
#include "ebm/rootfind.hpp"

namespace ebm {

namespace {
const double kRhoLo = std::pow(2.0, -0.25);
constexpr double kEndpointGuard = 1e-9;
} // namespace

double l_eval(double x) {
    if (x < kRhoLo - 1e-12 || x >= 1.0)
        raise(ErrorCode::DomainError, "L is defined on [2^{-1/4}, 1)");
    return (2.0 * x * x * x * x - 1.0) / (1.0 - x);
}

double l_inverse(double y) {
    if (y < 0.0) raise(ErrorCode::DomainError, "L^{-1} requires y >= 0");
    if (y == 0.0) return kRhoLo;
    // Beyond the resolvable range L(x) ~ 1/(1-x); one fixed-point pass is
    // already below the bisection tolerance.
    if (y > 1e14) {
        const double x0 = 1.0 - 1.0 / y;
        return 1.0 - (2.0 * x0 * x0 * x0 * x0 - 1.0) / y;
    }
    double hi = 1.0 - 1.0 / 1024.0;
    while (l_eval(hi) < y) hi = 1.0 - 0.25 * (1.0 - hi);
    auto f = [&](double x) { return l_eval(x) - y; };
    return solve_bracketed(f, kRhoLo, hi, 1e-14);
}

double rho_of_ts(const ModelParams& p, double t_s) {
    if (!(t_s > 0.0)) raise(ErrorCode::NegativeInput, "rho_of_ts requires t_s > 0");
    if (p.lambda == 0.0) return kRhoLo; // degenerate case, returned explicitly
    const double k_ph = p.lambda / (p.epsilon_a * p.sigma_b);
    const double rho = l_inverse(k_ph / (t_s * t_s * t_s));
    const double ta = solve_ta1(p, t_s);
    if (std::fabs(rho * t_s - ta) > 1e-10 * std::max(ta, 1e-300))
        raise(ErrorCode::CrossCheck, "rho_of_ts disagrees with solve_ta1");
    return rho;
}

double n_eval(double rho) {
    if (rho < kRhoLo - 1e-12 || rho > 1.0 + 1e-12)
        raise(ErrorCode::DomainError, "N is evaluated on [2^{-1/4}, 1]");
    const double r2 = rho * rho;
    const double r3 = r2 * rho;
    const double r4 = r3 * rho;
    const double top = 2.0 * r4 - 1.0;
    const double den = 8.0 * r3 - 6.0 * r4 - 1.0; // positive on the interval
    const double one_m = 1.0 - rho;
    return 1.0 - 1.5 * (24.0 * r2 * top * one_m * one_m / (den * den) + 2.0 * top / den);
}

double n_star_value(double epsilon_a, double rho) {
    const double r3 = rho * rho * rho;
    const double r4 = r3 * rho;
    const double top = 2.0 * r4 - 1.0;
    const double den = 8.0 * r3 - 6.0 * r4 - 1.0;
    return -n_eval(rho) / den + 4.0 * (1.0 / epsilon_a - 0.5) / (top * top);
}

double n_star_eval(const ModelParams& p, double rho) {
    if (rho < kRhoLo + kEndpointGuard || rho > 1.0 - kEndpointGuard)
        raise(ErrorCode::DomainError, "N* is singular within 1e-9 of the endpoints");
    return n_star_value(p.epsilon_a, rho);
}

double phi_second_closed(const ModelParams& p, double t_s) {
    if (!(t_s > 0.0)) raise(ErrorCode::NegativeInput, "phi_second_closed requires t_s > 0");
    const double quartic_part = 12.0 * p.sigma_b * (1.0 - 0.5 * p.epsilon_a) * t_s * t_s;
    if (p.lambda == 0.0) return quartic_part; // exact in the decoupled case

    // Regular composition of the closed form: the (2 rho^4 - 1) factors of
    // N* cancel against the prefactor, leaving denominators bounded away
    // from zero on the whole interval.
    const double k_ph = p.lambda / (p.epsilon_a * p.sigma_b);
    const double rho = rho_of_ts(p, t_s);
    const double r3 = rho * rho * rho;
    const double den = 8.0 * r3 - 6.0 * r3 * rho - 1.0;
    const double one_m = 1.0 - rho;
    const double ts4 = t_s * t_s * t_s * t_s;
    const double phi1_second = -3.0 * p.lambda * k_ph * n_eval(rho) * one_m * one_m /
                               (ts4 * den);
    return phi1_second + quartic_part;
}

EpsilonBracket bracket_epsilon_a0(double tol, int rho_samples) {
    if (!(tol > 0.0) || rho_samples < 16)
        raise(ErrorCode::InvalidOptions, "bracket_epsilon_a0 requires tol > 0");

    // N*(rho; eps) = A(rho) + (1/eps - 1/2) B(rho): precompute both parts on
    // the endpoint-guarded grid once, then the sign of the minimum is a dot
    // scan per candidate eps.
    const double lo_r = kRhoLo + kEndpointGuard;
    const double hi_r = 1.0 - kEndpointGuard;
    std::vector<double> a(rho_samples), b(rho_samples);
    for (int i = 0; i < rho_samples; ++i) {
        const double rho = lo_r + (hi_r - lo_r) * i / (rho_samples - 1.0);
        const double r3 = rho * rho * rho;
        const double r4 = r3 * rho;
        const double top = 2.0 * r4 - 1.0;
        const double den = 8.0 * r3 - 6.0 * r4 - 1.0;
        a[i] = -n_eval(rho) / den;
        b[i] = 4.0 / (top * top);
    }
    auto min_negative = [&](double eps) {
        const double c = 1.0 / eps - 0.5;
        for (int i = 0; i < rho_samples; ++i)
            if (a[i] + c * b[i] < 0.0) return true;
        return false;
    };

    double lo = 1.9, hi = 2.0;
    if (min_negative(lo) || !min_negative(hi))
        raise(ErrorCode::CrossCheck, "epsilon_a0 is not bracketed by (1.9, 2.0)");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (min_negative(mid))
            hi = mid;
        else
            lo = mid;
    }
    return {lo, hi};
}

double mu_star(const ModelParams& p) {
    if (!(p.epsilon_a > 2.0))
        raise(ErrorCode::EpsilonNotSupercritical, "mu_star requires epsilon_a > 2");
    const double ratio = p.gamma_s / p.gamma_a;
    auto residual = [&](double mu) {
        const double m4 = mu * mu * mu * mu;
        return ratio * mu - (p.epsilon_a - m4) / (p.epsilon_a * (m4 - 2.0));
    };
    const double lo = std::pow(2.0, 0.25) * (1.0 + 1e-14);
    const double hi = std::pow(p.epsilon_a, 0.25);
    const double mu = solve_bracketed(residual, lo, hi, 0.0, 300);
    if (std::fabs(residual(mu)) > 1e-12)
        raise(ErrorCode::CrossCheck, "mu_star residual did not reach 1e-12");
    return mu;
}

namespace {

// T_s^{(1,g)}(T_a): where the first field component vanishes at given T_a.
double ts_on_c1(const ModelParams& p, double ta) {
    const double es = p.epsilon_a * p.sigma_b;
    double rhs = p.lambda * ta + 2.0 * es * signed_quartic(ta);
    if (p.coalbedo_a) rhs -= p.q * p.coalbedo_a->value(ta);
    auto f = [&](double ts) { return p.lambda * ts + es * signed_quartic(ts) - rhs; };
    if (rhs <= 0.0) return 0.0;
    double hi = std::max(1.0, std::pow(2.0, 0.25) * ta);
    while (f(hi) < 0.0) hi *= 2.0;
    return solve_bracketed(f, 0.0, hi, 1e-10 * std::max(1.0, ta));
}

// T_a^{(2,g)}(T_s): where the second field component vanishes; only defined
// once the surface emission exceeds the absorbed insolation.
double ta_on_c2(const ModelParams& p, double ts, bool& defined) {
    const double es = p.epsilon_a * p.sigma_b;
    const double rhs =
        p.lambda * ts + p.sigma_b * signed_quartic(ts) - p.q * p.coalbedo_s.value(ts);
    if (rhs <= 0.0) {
        defined = false;
        return 0.0;
    }
    defined = true;
    auto f = [&](double ta) { return p.lambda * ta + es * signed_quartic(ta) - rhs; };
    double hi = std::max(1.0, ts);
    while (f(hi) < 0.0) hi *= 2.0;
    return solve_bracketed(f, 0.0, hi, 1e-10 * std::max(1.0, ts));
}

} // namespace

double escape_floor_ta(const ModelParams& p) {
    if (!(p.epsilon_a > 2.0))
        raise(ErrorCode::EpsilonNotSupercritical, "escape region requires epsilon_a > 2");
    // Documented scan range: T_a in [1, 1e6] K, 2048 logarithmic points.
    constexpr int n = 2048;
    const double lo = 0.0, hi = 6.0; // log10
    double floor = std::pow(10.0, hi);
    for (int i = n - 1; i >= 0; --i) {
        const double ta = std::pow(10.0, lo + (hi - lo) * i / (n - 1.0));
        bool defined = false;
        const double cross = ta_on_c2(p, ts_on_c1(p, ta), defined);
        if (defined && cross < ta)
            floor = ta;
        else
            break; // crossing fails here: the floor is the last passing point
    }
    return floor;
}

bool in_escape_region(const ModelParams& p, const State& s) {
    if (!(p.epsilon_a > 2.0))
        raise(ErrorCode::EpsilonNotSupercritical, "escape region requires epsilon_a > 2");
    const double es = p.epsilon_a * p.sigma_b;
    if (p.lambda == 0.0 && !p.coalbedo_a) {
        const double lhs = p.sigma_b * signed_quartic(s.t_s) - p.q * p.coalbedo_s.value(s.t_s);
        const double mid = es * signed_quartic(s.t_a);
        const double rhs = 0.5 * es * signed_quartic(s.t_s);
        return lhs < mid && mid < rhs;
    }
    const Rates f = vector_field(p, s);
    if (!(f.dt_a > 0.0 && f.dt_s > 0.0)) return false;
    return s.t_a >= escape_floor_ta(p);
}

BlowupCertificate blow_up_certificate(const ModelParams& p, const State& s0,
                                      const IntegrationOptions& opts) {
    if (!(p.epsilon_a > 2.0))
        raise(ErrorCode::EpsilonNotSupercritical, "blow-up certificate requires epsilon_a > 2");
    if (!(s0.t_a > 0.0) || !(s0.t_s > 0.0))
        raise(ErrorCode::NegativeInput, "blow-up certificate requires a positive start");

    BlowupCertificate cert;
    cert.mu_star_value = mu_star(p);
    cert.trajectory = integrate(p, s0, opts);
    const Trajectory& traj = cert.trajectory;

    const bool general = p.lambda > 0.0 || p.coalbedo_a.has_value();
    const double floor = general ? escape_floor_ta(p) : 0.0;
    const double es = p.epsilon_a * p.sigma_b;
    auto inside = [&](const State& s) {
        if (general) {
            const Rates f = vector_field(p, s);
            return f.dt_a > 0.0 && f.dt_s > 0.0 && s.t_a >= floor;
        }
        const double lhs = p.sigma_b * signed_quartic(s.t_s) - p.q * p.coalbedo_s.value(s.t_s);
        const double mid = es * signed_quartic(s.t_a);
        return lhs < mid && mid < 0.5 * es * signed_quartic(s.t_s);
    };

    std::size_t entry = traj.y.size();
    for (std::size_t i = 0; i < traj.y.size(); ++i) {
        if (inside(traj.y[i])) {
            entry = i;
            break;
        }
    }
    if (entry == traj.y.size())
        raise(ErrorCode::NoEntry, "trajectory never entered the escape region before the horizon");

    cert.entry_time = traj.t[entry];
    cert.entry_state = traj.y[entry];

    // Comparison slope: the midpoint of (2^{1/4}, mu*) when the entry state
    // already sits above that line, otherwise the largest grid value below it.
    const double mu_lo = std::pow(2.0, 0.25);
    const double midpoint = 0.5 * (mu_lo + cert.mu_star_value);
    if (cert.entry_state.t_s > midpoint * cert.entry_state.t_a) {
        cert.mu = midpoint;
    } else {
        cert.mu = 0.0;
        constexpr int grid = 512;
        for (int i = grid - 1; i >= 1; --i) {
            const double mu = mu_lo + (cert.mu_star_value - mu_lo) * i / grid;
            if (cert.entry_state.t_s > mu * cert.entry_state.t_a) {
                cert.mu = mu;
                break;
            }
        }
        if (cert.mu == 0.0)
            raise(ErrorCode::CrossCheck, "entry state not above any comparison line");
    }

    const double ta0 = cert.entry_state.t_a;
    cert.analytic_bound =
        cert.entry_time +
        p.gamma_a / (3.0 * es * (std::pow(cert.mu, 4.0) - 2.0) * ta0 * ta0 * ta0);

    if (traj.termination != Termination::BlowUp)
        raise(ErrorCode::NoEntry, "trajectory entered the escape region but never escaped");
    cert.observed_escape = traj.last_time();
    cert.observed_within_bound = cert.observed_escape <= cert.analytic_bound;

    cert.min_tail_gap = std::numeric_limits<double>::infinity();
    cert.ratio_min = std::numeric_limits<double>::infinity();
    cert.ratio_max = 0.0;
    for (std::size_t i = entry; i < traj.y.size(); ++i) {
        const State& s = traj.y[i];
        cert.min_tail_gap = std::min(cert.min_tail_gap, s.t_s - cert.mu * s.t_a);
        const double ratio = s.t_s / s.t_a;
        cert.ratio_min = std::min(cert.ratio_min, ratio);
        cert.ratio_max = std::max(cert.ratio_max, ratio);
    }
    return cert;
}

ConvexityReport convexity_report(const ModelParams& p, double eps_tol, int rho_samples) {
    ConvexityReport rep;
    const double lo = kRhoLo + kEndpointGuard;
    const double hi = 1.0 - kEndpointGuard;
    rep.rho_grid.resize(rho_samples);
    rep.n_values.resize(rho_samples);
    rep.n_star_values.resize(rho_samples);
    rep.n_star_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rho_samples; ++i) {
        const double rho = lo + (hi - lo) * i / (rho_samples - 1.0);
        rep.rho_grid[i] = rho;
        rep.n_values[i] = n_eval(rho);
        rep.n_star_values[i] = n_star_value(p.epsilon_a, rho);
        if (rep.n_star_values[i] < rep.n_star_min) {
            rep.n_star_min = rep.n_star_values[i];
            rep.rho_at_min = rho;
        }
    }
    rep.n_root = solve_bracketed([](double r) { return n_eval(r); }, kRhoLo, 1.0 - 1e-12, 1e-12);

    // Phi'' sign summary over a surface-temperature scan at the scenario
    // parameters (bounded regime only).
    if (p.epsilon_a < 2.0) {
        constexpr int nts = 2048;
        rep.phi_second_min = std::numeric_limits<double>::infinity();
        double prev = 0.0;
        bool have_prev = false;
        for (int i = 1; i <= nts; ++i) {
            const double ts = 1000.0 * i / nts;
            const double v = phi_second_closed(p, ts);
            rep.phi_second_min = std::min(rep.phi_second_min, v);
            if (have_prev && prev * v < 0.0) ++rep.phi_second_sign_changes;
            prev = v;
            have_prev = true;
        }
        rep.phi_second_all_positive = rep.phi_second_min > 0.0;
    }

    rep.eps_a0 = bracket_epsilon_a0(eps_tol);
    return rep;
}

} // namespace ebm
