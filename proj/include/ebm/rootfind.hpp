#pragma once

#include <functional>

namespace ebm {

/// Bracketed scalar root finding. f(lo) and f(hi) must have opposite signs
/// (or one of them be zero). Secant steps are taken when they stay inside the
/// bracket and shrink it, bisection otherwise, so convergence is guaranteed
/// for any continuous f.
double solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                       double x_tol, int max_iter = 200);

/// Newton iteration safeguarded by a bracket [lo, hi] on which f is monotone
/// with a sign change. Falls back to bisection whenever the Newton step
/// leaves the bracket or stalls. Converges to |dx| <= x_tol_rel * |x| + x_tol_abs.
double solve_newton_bracketed(const std::function<double(double)>& f,
                              const std::function<double(double)>& df, double lo,
                              double hi, double x_tol_rel, double x_tol_abs = 0.0,
                              int max_iter = 100);

} // namespace ebm
