#include "ebm/rootfind.hpp"

#include <algorithm>
#include <cmath>

#include "ebm/errors.hpp"

namespace ebm {

double solve_bracketed(const std::function<double(double)>& f, double lo, double hi,
                       double x_tol, int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        raise(ErrorCode::DomainError, "solve_bracketed: endpoints do not bracket a root");

    for (int it = 0; it < max_iter && hi - lo > x_tol; ++it) {
        double mid;
        // Secant candidate; keep it strictly interior or fall back to bisection.
        const double denom = fhi - flo;
        if (denom != 0.0) {
            mid = lo - flo * (hi - lo) / denom;
            const double margin = 0.01 * (hi - lo);
            if (!(mid > lo + margin && mid < hi - margin)) mid = 0.5 * (lo + hi);
        } else {
            mid = 0.5 * (lo + hi);
        }
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

double solve_newton_bracketed(const std::function<double(double)>& f,
                              const std::function<double(double)>& df, double lo,
                              double hi, double x_tol_rel, double x_tol_abs,
                              int max_iter) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        raise(ErrorCode::DomainError, "solve_newton_bracketed: no sign change on bracket");

    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (flo * fx < 0.0) {
            hi = x;
            fhi = fx;
        } else {
            lo = x;
            flo = fx;
        }
        const double d = df(x);
        double x_next;
        if (d != 0.0) {
            x_next = x - fx / d;
            if (!(x_next > lo && x_next < hi)) x_next = 0.5 * (lo + hi);
        } else {
            x_next = 0.5 * (lo + hi);
        }
        const double tol = x_tol_rel * std::fabs(x_next) + x_tol_abs;
        if (std::fabs(x_next - x) <= tol || hi - lo <= tol) return x_next;
        x = x_next;
    }
    return x;
}

} // namespace ebm
