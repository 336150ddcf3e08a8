#include "ebm/equilibria.hpp"

#include <algorithm>
#include <cmath>

#include "ebm/rootfind.hpp"

namespace ebm {

const char* to_string(EquilibriumClass c) {
    switch (c) {
        case EquilibriumClass::Cold: return "cold";
        case EquilibriumClass::Intermediate: return "intermediate";
        case EquilibriumClass::Warm: return "warm";
        case EquilibriumClass::Kink: return "kink";
    }
    return "?";
}

const char* to_string(StabilityVerdict v) {
    switch (v) {
        case StabilityVerdict::AsymptoticallyStable: return "stable";
        case StabilityVerdict::Unstable: return "unstable";
        case StabilityVerdict::Degenerate: return "degenerate";
    }
    return "?";
}

double solve_ta1(const ModelParams& p, double t_s) {
    if (t_s < 0.0) raise(ErrorCode::NegativeInput, "solve_ta1 requires t_s >= 0");
    if (p.lambda < 0.0) raise(ErrorCode::NegativeInput, "solve_ta1 requires lambda >= 0");
    const double inv_qr2 = std::pow(2.0, -0.25);
    if (p.lambda == 0.0 || t_s == 0.0) return inv_qr2 * t_s;

    const double es = p.epsilon_a * p.sigma_b;
    const double rhs = p.lambda * t_s + es * t_s * t_s * t_s * t_s;
    auto f = [&](double ta) { return p.lambda * ta + 2.0 * es * ta * ta * ta * ta - rhs; };
    auto df = [&](double ta) { return p.lambda + 8.0 * es * ta * ta * ta; };
    return solve_newton_bracketed(f, df, inv_qr2 * t_s, t_s, 1e-12);
}

double phi(const ModelParams& p, double t_s) {
    if (t_s < 0.0) raise(ErrorCode::NegativeInput, "phi requires t_s >= 0");
    const double quartic = p.sigma_b * (1.0 - 0.5 * p.epsilon_a) * t_s * t_s * t_s * t_s;
    if (p.lambda == 0.0) return quartic;
    return 0.5 * p.lambda * (t_s - solve_ta1(p, t_s)) + quartic;
}

double phi_prime(const ModelParams& p, double t_s) {
    if (t_s < 0.0) raise(ErrorCode::NegativeInput, "phi_prime requires t_s >= 0");
    const double ts3 = t_s * t_s * t_s;
    if (p.lambda == 0.0)
        return 4.0 * p.sigma_b * (1.0 - 0.5 * p.epsilon_a) * ts3;
    const double es = p.epsilon_a * p.sigma_b;
    const double ta = solve_ta1(p, t_s);
    const double ta3 = ta * ta * ta;
    return p.lambda + 4.0 * p.sigma_b * ts3 -
           (p.lambda + 4.0 * es * ts3) * (p.lambda + 4.0 * es * ta3) /
               (p.lambda + 8.0 * es * ta3);
}

EquilibriumBounds equilibrium_bounds(const ModelParams& p) {
    if (!(p.epsilon_a > 0.0 && p.epsilon_a < 2.0))
        raise(ErrorCode::EpsilonOutOfRange, "equilibrium bounds require epsilon_a in (0,2)");
    const double qbm = p.q * p.coalbedo_s.beta_minus;
    const double qbp = p.q * p.coalbedo_s.beta_plus;
    EquilibriumBounds b;
    if (p.epsilon_a <= 1.0) {
        b.ta_lo = std::pow(qbm / (2.0 * p.sigma_b), 0.25);
        b.ta_hi = std::pow(qbp / (p.epsilon_a * p.sigma_b), 0.25);
        b.ts_lo = std::pow(qbm / p.sigma_b, 0.25);
        b.ts_hi = std::pow(2.0 * qbp / (p.epsilon_a * p.sigma_b), 0.25);
    } else {
        const double rem = 2.0 - p.epsilon_a;
        b.ta_lo = std::pow(qbm / p.sigma_b, 0.25);
        b.ta_hi = std::pow(qbp / (rem * p.sigma_b), 0.25);
        b.ts_lo = std::pow(qbm / p.sigma_b, 0.25);
        b.ts_hi = std::pow(2.0 * qbp / (rem * p.sigma_b), 0.25);
    }
    return b;
}

namespace {

EquilibriumClass class_of(const ModelParams& p, double t_s, double kink_tol) {
    const CoalbedoRamp& r = p.coalbedo_s;
    if (std::fabs(t_s - r.t_minus) <= kink_tol || std::fabs(t_s - r.t_plus) <= kink_tol)
        return EquilibriumClass::Kink;
    if (t_s < r.t_minus) return EquilibriumClass::Cold;
    if (t_s > r.t_plus) return EquilibriumClass::Warm;
    return EquilibriumClass::Intermediate;
}

double normalized_residual(const ModelParams& p, const State& s) {
    const Rates f = vector_field(p, s);
    const double num = std::max(std::fabs(f.dt_a) * p.gamma_a, std::fabs(f.dt_s) * p.gamma_s);
    return num / (p.q * p.coalbedo_s.beta_plus);
}

std::vector<double> scan_roots(const ModelParams& p, double upper, int n, double root_tol) {
    auto g = [&](double ts) { return phi(p, ts) - p.q * p.coalbedo_s.value(ts); };

    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n) + 4);
    for (int i = 0; i <= n; ++i) grid.push_back(upper * i / n);
    if (p.coalbedo_s.t_minus < upper) grid.push_back(p.coalbedo_s.t_minus);
    if (p.coalbedo_s.t_plus < upper) grid.push_back(p.coalbedo_s.t_plus);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> roots;
    double x_prev = grid[0];
    double g_prev = g(x_prev);
    if (g_prev == 0.0) roots.push_back(x_prev);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double x = grid[i];
        const double gx = g(x);
        if (gx == 0.0) {
            roots.push_back(x);
        } else if (g_prev != 0.0 && g_prev * gx < 0.0) {
            roots.push_back(solve_bracketed(g, x_prev, x, root_tol));
        }
        x_prev = x;
        g_prev = gx;
    }
    return roots;
}

// Bracketless local minima of |Phi - q beta| below the tangency threshold are
// double roots: degenerate cases surfaced rather than dropped.
std::vector<double> scan_tangencies(const ModelParams& p, double upper, int n,
                                    double threshold, const std::vector<double>& roots) {
    auto g = [&](double ts) { return phi(p, ts) - p.q * p.coalbedo_s.value(ts); };
    const double dx = upper / n;

    std::vector<double> out;
    double gm = g(0.0), g0 = g(dx);
    for (int i = 1; i < n; ++i) {
        const double xp = (i + 1) * dx;
        const double gp = g(xp);
        const bool same_sign = gm * g0 > 0.0 && g0 * gp > 0.0;
        if (same_sign && std::fabs(g0) <= std::fabs(gm) && std::fabs(g0) <= std::fabs(gp)) {
            // Golden-section refinement of |g| on the 2-cell neighbourhood.
            double a = (i - 1) * dx, b = xp;
            const double inv_phi = 0.6180339887498949;
            double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
            double f1 = std::fabs(g(x1)), f2 = std::fabs(g(x2));
            for (int it = 0; it < 80 && b - a > 1e-10; ++it) {
                if (f1 <= f2) {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - inv_phi * (b - a);
                    f1 = std::fabs(g(x1));
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + inv_phi * (b - a);
                    f2 = std::fabs(g(x2));
                }
            }
            const double xm = 0.5 * (a + b);
            bool near_root = false;
            for (double r : roots)
                if (std::fabs(r - xm) <= 2.0 * dx) near_root = true;
            if (!near_root && std::fabs(g(xm)) < threshold) out.push_back(xm);
        }
        gm = g0;
        g0 = gp;
    }
    return out;
}

} // namespace

Equilibrium classify(const ModelParams& p, Equilibrium e) {
    if (e.cls == EquilibriumClass::Kink) {
        e.stability = Stability{};
        e.stability.verdict = StabilityVerdict::Degenerate;
        return e;
    }

    const Jacobian2 j = jacobian(p, e.state);
    Stability st;
    st.valid = true;
    st.trace = j.trace();
    st.det = j.det();
    st.eigenvalues = j.eigenvalues();

    // gamma-free entries keep the determinant scale independent of the heat
    // capacities for the tolerance and cross-check below.
    const double es = p.epsilon_a * p.sigma_b;
    const double ta3 = signed_quartic_deriv(e.state.t_a) / 4.0;
    const double ts3 = signed_quartic_deriv(e.state.t_s) / 4.0;
    const double bsl = p.coalbedo_s.slope(e.state.t_s).left;
    const double m11 = -p.lambda - 8.0 * es * ta3;
    const double m12 = p.lambda + 4.0 * es * ts3;
    const double m21 = p.lambda + 4.0 * es * ta3;
    const double m22 = -p.lambda - 4.0 * p.sigma_b * ts3 + p.q * bsl;
    const double gg_det = m11 * m22 - m12 * m21;
    const double scale = std::fabs(m11 * m22) + std::fabs(m12 * m21);

    if (!p.coalbedo_a) {
        const double factored =
            (p.lambda + 8.0 * es * ta3) * (phi_prime(p, e.state.t_s) - p.q * bsl);
        if (std::fabs(gg_det - factored) > 1e-8 * std::max({std::fabs(gg_det),
                                                            std::fabs(factored), 1e-300}) &&
            std::fabs(gg_det - factored) > 1e-12 * scale)
            raise(ErrorCode::CrossCheck, "determinant disagrees with factored form");
    }

    if (std::fabs(gg_det) <= 1e-12 * scale)
        st.verdict = StabilityVerdict::Degenerate;
    else if (gg_det > 0.0 && st.trace < 0.0)
        st.verdict = StabilityVerdict::AsymptoticallyStable;
    else if (gg_det < 0.0)
        st.verdict = StabilityVerdict::Unstable;
    else
        st.verdict = StabilityVerdict::Degenerate;

    e.stability = st;
    return e;
}

std::vector<Equilibrium> find_equilibria(const ModelParams& p, const FindOptions& fo) {
    p.validate();
    if (!(p.epsilon_a > 0.0 && p.epsilon_a < 2.0))
        raise(ErrorCode::EpsilonOutOfRange, "find_equilibria requires epsilon_a in (0,2)");

    const double upper = 1.5 * equilibrium_bounds(p).ts_hi;

    // Refinement check: double the grid until the root count stabilizes, so
    // two roots falling into one cell cannot hide each other.
    int n = fo.grid;
    std::vector<double> roots = scan_roots(p, upper, n, fo.root_tol);
    for (; n <= (1 << 18); n *= 2) {
        std::vector<double> finer = scan_roots(p, upper, 2 * n, fo.root_tol);
        if (finer.size() == roots.size()) {
            roots = std::move(finer);
            break;
        }
        roots = std::move(finer);
    }

    const double tangency_threshold = fo.tangency_rel * p.q * p.coalbedo_s.beta_plus;
    std::vector<double> tangent = scan_tangencies(p, upper, 2 * n, tangency_threshold, roots);

    std::vector<Equilibrium> out;
    for (double ts : roots) {
        Equilibrium e;
        e.state = {solve_ta1(p, ts), ts};
        e.cls = class_of(p, ts, fo.kink_tol);
        e.residual = normalized_residual(p, e.state);
        out.push_back(classify(p, e));
    }
    for (double ts : tangent) {
        Equilibrium e;
        e.state = {solve_ta1(p, ts), ts};
        e.cls = class_of(p, ts, fo.kink_tol);
        e.residual = normalized_residual(p, e.state);
        e.tangency = true;
        e.stability.verdict = StabilityVerdict::Degenerate;
        out.push_back(e);
    }
    std::sort(out.begin(), out.end(),
              [](const Equilibrium& a, const Equilibrium& b) { return a.state.t_s < b.state.t_s; });
    return out;
}

bool is_bistable(const std::vector<Equilibrium>& eqs) {
    if (eqs.size() != 3) return false;
    return eqs[0].cls == EquilibriumClass::Cold &&
           eqs[0].stability.verdict == StabilityVerdict::AsymptoticallyStable &&
           eqs[1].cls == EquilibriumClass::Intermediate &&
           eqs[1].stability.verdict == StabilityVerdict::Unstable &&
           eqs[2].cls == EquilibriumClass::Warm &&
           eqs[2].stability.verdict == StabilityVerdict::AsymptoticallyStable;
}

} // namespace ebm
