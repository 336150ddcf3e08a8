#include "ebm/basins.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <thread>

namespace ebm {

const char* to_string(RegionLabel r) {
    switch (r) {
        case RegionLabel::Q1: return "Q1";
        case RegionLabel::Q1p: return "Q1p";
        case RegionLabel::Q2: return "Q2";
        case RegionLabel::Q3: return "Q3";
        case RegionLabel::Q3p: return "Q3p";
        case RegionLabel::Q4: return "Q4";
        case RegionLabel::OnC1: return "OnC1";
        case RegionLabel::OnC2: return "OnC2";
        case RegionLabel::Exterior: return "Exterior";
    }
    return "?";
}

RegionClassifier::RegionClassifier(const ModelParams& p, double curve_tol_rel)
    : p_(p), eqs_(find_equilibria(p)), curve_tol_rel_(curve_tol_rel) {}

RegionLabel RegionClassifier::classify(const State& s) const {
    if (!(s.t_a > 0.0 && s.t_s > 0.0)) return RegionLabel::Exterior;

    const double es = p_.epsilon_a * p_.sigma_b;
    const double qa = signed_quartic(s.t_a);
    const double qs = signed_quartic(s.t_s);

    // Sign conditions g1 = gamma_a * (first component without beta_a),
    // g2 = gamma_s * (second component); |g| below curve tolerance means the
    // state sits on the corresponding nullcline.
    const double g1 = -p_.lambda * (s.t_a - s.t_s) + es * qs - 2.0 * es * qa;
    const double g2 = -p_.lambda * (s.t_s - s.t_a) - p_.sigma_b * qs + es * qa +
                      p_.q * p_.coalbedo_s.value(s.t_s);
    const double scale1 =
        p_.lambda * (std::fabs(s.t_a) + std::fabs(s.t_s)) + es * qs + 2.0 * es * qa;
    const double scale2 = p_.lambda * (std::fabs(s.t_a) + std::fabs(s.t_s)) +
                          p_.sigma_b * qs + es * qa + p_.q * p_.coalbedo_s.value(s.t_s);
    if (std::fabs(g1) <= curve_tol_rel_ * scale1) return RegionLabel::OnC1;
    if (std::fabs(g2) <= curve_tol_rel_ * scale2) return RegionLabel::OnC2;

    if (g1 > 0.0 && g2 < 0.0) return RegionLabel::Q2;
    if (g1 < 0.0 && g2 > 0.0) return RegionLabel::Q4;

    // Equilibrium-interval bracket of T_s for the trapping cells.
    std::size_t idx = 0;
    while (idx < eqs_.size() && eqs_[idx].state.t_s < s.t_s) ++idx;

    if (g1 > 0.0) // and g2 > 0: north-east flow
        return idx == 0 ? RegionLabel::Q1 : RegionLabel::Q3p;
    return idx == eqs_.size() ? RegionLabel::Q3 : RegionLabel::Q1p;
}

RegionLabel classify_region(const ModelParams& p, const State& s) {
    return RegionClassifier(p).classify(s);
}

namespace {

struct BistableCensus {
    Equilibrium cold, mid, warm;
};

BistableCensus require_bistable(const ModelParams& p) {
    std::vector<Equilibrium> eqs = find_equilibria(p);
    if (!is_bistable(eqs))
        raise(ErrorCode::NotBistable,
              "scenario is not bistable (need stable cold, unstable intermediate, stable warm)");
    return {eqs[0], eqs[1], eqs[2]};
}

// true = captured by the warm attractor.
bool captured_warm(const ModelParams& p, const State& s0, const BistableCensus& cen,
                   const IntegrationOptions& opts) {
    const TerminalResult r = integrate_terminal(p, s0, opts);
    if (r.termination != Termination::Converged)
        raise(ErrorCode::NotConverged, "capture integration did not converge");
    return std::fabs(r.end.t_s - cen.warm.state.t_s) <
           std::fabs(r.end.t_s - cen.cold.state.t_s);
}

} // namespace

double axis_threshold(const ModelParams& p, Axis axis, double tol,
                      const IntegrationOptions& opts) {
    if (!(tol > 0.0)) raise(ErrorCode::InvalidOptions, "tol must be positive");
    const BistableCensus cen = require_bistable(p);
    const EquilibriumBounds b = equilibrium_bounds(p);

    auto start = [&](double c) {
        return axis == Axis::Horizontal ? State{c, 0.0} : State{0.0, c};
    };

    double lo = 0.0;
    double hi = 1.5 * (axis == Axis::Horizontal ? b.ta_hi : b.ts_hi);
    if (captured_warm(p, start(lo), cen, opts))
        raise(ErrorCode::NotBistable, "origin is not in the cold basin");
    int guard = 0;
    while (!captured_warm(p, start(hi), cen, opts)) {
        hi *= 2.0;
        if (++guard > 16)
            raise(ErrorCode::NotBistable, "no warm capture found along the axis");
    }

    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (captured_warm(p, start(mid), cen, opts))
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Forward arc from s0, truncated at its closest approach to target.
struct Arc {
    std::vector<State> points;
    double closest = std::numeric_limits<double>::infinity();
};

Arc traced_arc(const ModelParams& p, const State& s0, const State& target,
               const IntegrationOptions& opts) {
    const Trajectory traj = integrate(p, s0, opts);
    Arc arc;
    std::size_t best = 0;
    for (std::size_t i = 0; i < traj.y.size(); ++i) {
        const double d = std::hypot(traj.y[i].t_a - target.t_a, traj.y[i].t_s - target.t_s);
        if (d < arc.closest) {
            arc.closest = d;
            best = i;
        }
    }
    arc.points.assign(traj.y.begin(), traj.y.begin() + best + 1);
    return arc;
}

std::vector<State> resample_polyline(const std::vector<State>& pts, int n) {
    if (pts.size() < 2 || n < 2) return pts;
    std::vector<double> cum(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        cum[i] = cum[i - 1] +
                 std::hypot(pts[i].t_a - pts[i - 1].t_a, pts[i].t_s - pts[i - 1].t_s);
    const double total = cum.back();
    std::vector<State> out;
    out.reserve(n);
    std::size_t j = 0;
    for (int k = 0; k < n; ++k) {
        const double s = total * k / (n - 1.0);
        while (j + 1 < cum.size() && cum[j + 1] < s) ++j;
        if (j + 1 >= pts.size()) {
            out.push_back(pts.back());
            continue;
        }
        const double seg = cum[j + 1] - cum[j];
        const double w = seg > 0.0 ? (s - cum[j]) / seg : 0.0;
        out.push_back({pts[j].t_a + w * (pts[j + 1].t_a - pts[j].t_a),
                       pts[j].t_s + w * (pts[j + 1].t_s - pts[j].t_s)});
    }
    return out;
}

} // namespace

Separatrix trace_separatrix(const ModelParams& p, int n_points, double tol,
                            const IntegrationOptions& opts) {
    const BistableCensus cen = require_bistable(p);

    Separatrix sep;
    sep.ta_threshold = axis_threshold(p, Axis::Horizontal, tol, opts);
    sep.ts_threshold = axis_threshold(p, Axis::Vertical, tol, opts);

    const State p2 = cen.mid.state;
    const Arc from_h = traced_arc(p, {sep.ta_threshold, tol}, p2, opts);
    const Arc from_v = traced_arc(p, {tol, sep.ts_threshold}, p2, opts);
    sep.closest_approach_h = from_h.closest;
    sep.closest_approach_v = from_v.closest;
    sep.converged = from_h.closest <= 1e3 * tol && from_v.closest <= 1e3 * tol;

    // The two arcs limit onto the saddle; the polyline is joined through it.
    std::vector<State> poly = from_h.points;
    poly.push_back(p2);
    poly.insert(poly.end(), from_v.points.rbegin(), from_v.points.rend());
    sep.points = resample_polyline(poly, n_points);
    return sep;
}

State BasinMap::cell_center(int ix, int iy) const {
    const double dx = (spec.ta_max - spec.ta_min) / spec.nx;
    const double dy = (spec.ts_max - spec.ts_min) / spec.ny;
    return {spec.ta_min + (ix + 0.5) * dx, spec.ts_min + (iy + 0.5) * dy};
}

int BasinMap::distinct_attractors() const {
    std::vector<int> seen;
    for (int id : cell)
        if (id >= 0 && std::find(seen.begin(), seen.end(), id) == seen.end())
            seen.push_back(id);
    return static_cast<int>(seen.size());
}

bool BasinMap::boundary_connected() const {
    const int nx = spec.nx, ny = spec.ny;
    std::vector<char> seen(cell.size(), 0);
    int components = 0;
    for (int iy = 0; iy < ny && components < 2; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const std::size_t i = static_cast<std::size_t>(iy) * nx + ix;
            if (!boundary[i] || seen[i]) continue;
            ++components;
            if (components > 1) break;
            std::deque<std::pair<int, int>> queue{{ix, iy}};
            seen[i] = 1;
            while (!queue.empty()) {
                auto [cx, cy] = queue.front();
                queue.pop_front();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx2 = cx + dx, ny2 = cy + dy;
                        if (nx2 < 0 || ny2 < 0 || nx2 >= nx || ny2 >= ny) continue;
                        const std::size_t j = static_cast<std::size_t>(ny2) * nx + nx2;
                        if (boundary[j] && !seen[j]) {
                            seen[j] = 1;
                            queue.emplace_back(nx2, ny2);
                        }
                    }
                }
            }
        }
    }
    return components <= 1;
}

BasinMap basin_map(const ModelParams& p, const BasinGridSpec& spec,
                   const IntegrationOptions& opts) {
    if (spec.nx < 2 || spec.ny < 2)
        raise(ErrorCode::InvalidOptions, "basin grid must be at least 2x2");

    BasinMap map;
    map.spec = spec;
    if (!(map.spec.ta_max > map.spec.ta_min) || !(map.spec.ts_max > map.spec.ts_min)) {
        const EquilibriumBounds b = equilibrium_bounds(p);
        map.spec.ta_min = 0.0;
        map.spec.ta_max = 1.5 * b.ta_hi;
        map.spec.ts_min = 0.0;
        map.spec.ts_max = 1.5 * b.ts_hi;
    }
    map.attractors = find_equilibria(p);
    map.cell.assign(static_cast<std::size_t>(map.spec.nx) * map.spec.ny, -1);

    auto worker = [&](int row_begin, int row_end) {
        for (int iy = row_begin; iy < row_end; ++iy) {
            for (int ix = 0; ix < map.spec.nx; ++ix) {
                const State s0 = map.cell_center(ix, iy);
                const TerminalResult r = integrate_terminal(p, s0, opts);
                int id = -1;
                if (r.termination == Termination::Converged) {
                    double best = 1e-3;
                    for (std::size_t k = 0; k < map.attractors.size(); ++k) {
                        const double d =
                            std::max(std::fabs(r.end.t_a - map.attractors[k].state.t_a),
                                     std::fabs(r.end.t_s - map.attractors[k].state.t_s));
                        if (d < best) {
                            best = d;
                            id = static_cast<int>(k);
                        }
                    }
                }
                map.cell[static_cast<std::size_t>(iy) * map.spec.nx + ix] = id;
            }
        }
    };

    const int threads = std::max(1, spec.threads);
    if (threads == 1) {
        worker(0, map.spec.ny);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (map.spec.ny + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int lo = t * chunk;
            const int hi = std::min(map.spec.ny, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (std::thread& th : pool) th.join();
    }

    map.boundary.assign(map.cell.size(), 0);
    for (int iy = 0; iy < map.spec.ny; ++iy) {
        for (int ix = 0; ix < map.spec.nx; ++ix) {
            const std::size_t i = static_cast<std::size_t>(iy) * map.spec.nx + ix;
            const int id = map.cell[i];
            auto differs = [&](int jx, int jy) {
                if (jx < 0 || jy < 0 || jx >= map.spec.nx || jy >= map.spec.ny) return false;
                return map.cell[static_cast<std::size_t>(jy) * map.spec.nx + jx] != id;
            };
            if (differs(ix - 1, iy) || differs(ix + 1, iy) || differs(ix, iy - 1) ||
                differs(ix, iy + 1))
                map.boundary[i] = 1;
        }
    }
    return map;
}

} // namespace ebm
