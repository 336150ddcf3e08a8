#pragma once

#include <vector>

#include "ebm/model.hpp"

namespace ebm {

enum class EquilibriumClass { Cold, Intermediate, Warm, Kink };
enum class StabilityVerdict { AsymptoticallyStable, Unstable, Degenerate };

const char* to_string(EquilibriumClass c);
const char* to_string(StabilityVerdict v);

struct Stability {
    bool valid = false; // false when the Jacobian is undefined (kink-sitting root)
    double trace = 0.0;
    double det = 0.0;
    std::array<std::complex<double>, 2> eigenvalues{};
    StabilityVerdict verdict = StabilityVerdict::Degenerate;
};

struct Equilibrium {
    State state{};
    EquilibriumClass cls = EquilibriumClass::Cold;
    Stability stability{};
    double residual = 0.0; // max(|gamma_a F_a|,|gamma_s F_s|) / (q beta_plus)
    bool tangency = false; // double root detected without a sign change
};

/// Closed-form box containing every equilibrium, independent of lambda.
struct EquilibriumBounds {
    double ta_lo = 0.0, ta_hi = 0.0;
    double ts_lo = 0.0, ts_hi = 0.0;
    bool contains(const State& s, double tol = 0.0) const {
        return s.t_a > ta_lo - tol && s.t_a <= ta_hi + tol && s.t_s > ts_lo - tol &&
               s.t_s <= ts_hi + tol;
    }
};

/// T_a^{(1)}(t_s): the unique root of the strictly increasing map
/// T_a -> lambda T_a + 2 eps sigma T_a^4 - (lambda t_s + eps sigma t_s^4),
/// bracketed in [2^{-1/4} t_s, t_s]. Reduces to 2^{-1/4} t_s at lambda = 0.
double solve_ta1(const ModelParams& p, double t_s);

/// Phi(t_s) = lambda/2 (t_s - T_a^{(1)}(t_s)) + sigma (1 - eps/2) t_s^4.
/// Strictly increasing on [0, inf) with Phi(0) = 0; equilibria are the roots
/// of Phi(t_s) = q beta_s(t_s).
double phi(const ModelParams& p, double t_s);

/// Closed-form Phi'(t_s) =
///   lambda + 4 sigma t_s^3
///   - (lambda + 4 eps sigma t_s^3)(lambda + 4 eps sigma T_a^3)/(lambda + 8 eps sigma T_a^3).
double phi_prime(const ModelParams& p, double t_s);

EquilibriumBounds equilibrium_bounds(const ModelParams& p);

struct FindOptions {
    int grid = 4096;           // doubled automatically until the root count is stable
    double root_tol = 1e-12;   // K
    double kink_tol = 1e-9;    // K; roots this close to a ramp corner are class Kink
    double tangency_rel = 1e-6; // |Phi - q beta| threshold relative to q beta_plus
};

/// All equilibria for the given parameters, sorted by T_s, classified and with
/// stability filled in. Tangential (double) roots are surfaced as Degenerate.
std::vector<Equilibrium> find_equilibria(const ModelParams& p, const FindOptions& fo = {});

/// Fills the stability block of an equilibrium from the Jacobian trace and
/// determinant, cross-checking the determinant against the factored form
/// (lambda + 8 eps sigma T_a^3)(Phi'(T_s) - q beta_s'(T_s)).
Equilibrium classify(const ModelParams& p, Equilibrium e);

/// True census of a bistable scenario: exactly one stable cold, one unstable
/// intermediate and one stable warm equilibrium.
bool is_bistable(const std::vector<Equilibrium>& eqs);

} // namespace ebm
