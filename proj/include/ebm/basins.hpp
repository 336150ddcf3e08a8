#pragma once

#include <vector>

#include "ebm/equilibria.hpp"
#include "ebm/integrator.hpp"

namespace ebm {

enum class RegionLabel { Q1, Q1p, Q2, Q3, Q3p, Q4, OnC1, OnC2, Exterior };
const char* to_string(RegionLabel r);

enum class Axis { Horizontal, Vertical };

/// Phase-plane region classifier: the signs of the two field components
/// (without the beta_a term) split the quadrant along the nullclines C1/C2,
/// and the equilibrium ladder in T_s distinguishes the trapping cells
/// Q1/Q1'/Q3'/Q3. Holds a fixed equilibrium list so repeated queries are cheap.
class RegionClassifier {
public:
    RegionClassifier(const ModelParams& p, double curve_tol_rel = 1e-9);

    RegionLabel classify(const State& s) const;
    const std::vector<Equilibrium>& equilibria() const { return eqs_; }

private:
    ModelParams p_;
    std::vector<Equilibrium> eqs_;
    double curve_tol_rel_;
};

RegionLabel classify_region(const ModelParams& p, const State& s);

/// Unique axis threshold separating the cold and warm basins: capture
/// bisection on the initial coordinate along the given axis, to bracket
/// width <= tol. Requires the bistable census (3 equilibria: stable cold,
/// unstable intermediate, stable warm).
double axis_threshold(const ModelParams& p, Axis axis, double tol,
                      const IntegrationOptions& opts = {});

struct Separatrix {
    std::vector<State> points;           // polyline from horizontal-axis anchor to vertical
    double ta_threshold = 0.0;
    double ts_threshold = 0.0;
    double closest_approach_h = 0.0;     // distance of the horizontal arc to P2
    double closest_approach_v = 0.0;
    bool converged = true;               // false: an arc stayed > 1e3 tol from P2 (reported)
};

/// Basin boundary traced forward from the two axis threshold points; the two
/// arcs are concatenated at their closest approach to the intermediate
/// equilibrium and resampled to n_points by arc length.
Separatrix trace_separatrix(const ModelParams& p, int n_points, double tol = 1e-8,
                            const IntegrationOptions& opts = {});

struct BasinGridSpec {
    int nx = 256;
    int ny = 256;
    double ta_min = 0.0, ta_max = 0.0; // zeros: use certified bounds x 1.5
    double ts_min = 0.0, ts_max = 0.0;
    int threads = 1;
};

struct BasinMap {
    BasinGridSpec spec;
    std::vector<Equilibrium> attractors;   // all equilibria; ids index into this
    std::vector<int> cell;                 // nx*ny attractor ids, -1 = non-converged
    std::vector<unsigned char> boundary;   // 4-neighbour disagreement flags
    int id_at(int ix, int iy) const { return cell[static_cast<std::size_t>(iy) * spec.nx + ix]; }
    State cell_center(int ix, int iy) const;
    int distinct_attractors() const;
    bool boundary_connected() const;       // 8-connectivity over flagged cells
};

/// Integrates each grid-cell center to convergence and emits the captured
/// attractor id per cell; cells disagreeing with a 4-neighbour are flagged as
/// boundary cells. Cells may be computed concurrently.
BasinMap basin_map(const ModelParams& p, const BasinGridSpec& spec,
                   const IntegrationOptions& opts = {});

} // namespace ebm
