#pragma once

#include <complex>
#include <string>
#include <vector>

#include "biphos/integrate.hpp"
#include "biphos/model.hpp"
#include "biphos/params.hpp"

namespace biphos {

/// Transformed phase-plane coordinates: total cargo concentration and
/// phosphorylated fraction. The S-shape of the system lives in this plane.
struct PhasePoint {
    double total;  // c_no + c_nop
    double frac;   // c_nop / (c_no + c_nop), in [0,1]
};

enum class EqKind { stable_node, stable_focus, unstable_node, unstable_focus, saddle };

const char* to_string(EqKind k);

struct Equilibrium {
    Vec2 state;                            // (c_no, c_nop)
    std::complex<double> lambda1, lambda2; // Jacobian eigenvalues
    EqKind kind;
    double residual;                       // ||rhs_reduced|| at the point

    bool stable() const {
        return kind == EqKind::stable_node || kind == EqKind::stable_focus;
    }
    double total() const { return state[0] + state[1]; }
    double frac() const { return total() > 0 ? state[1] / total() : 0.0; }
};

/// One connected component of a nullcline in (total, frac) coordinates.
struct NullclinePolyline {
    int which;  // 0: c_no-nullcline, 1: c_nop-nullcline
    std::vector<PhasePoint> points;
};

struct NullclineSet {
    std::vector<NullclinePolyline> c_no;   // components of the c_no-nullcline
    std::vector<NullclinePolyline> c_nop;  // components of the c_nop-nullcline
};

/// Trace both nullclines over a total-range: at each of n_total grid values
/// every frac-root of the corresponding RHS component is found by
/// bracketing+bisection (residual <= 1e-8), then roots are linked into
/// connected polylines by nearest-frac matching between adjacent columns;
/// fold points split components rather than jumping branches.
NullclineSet trace_nullclines(const Params& p, double total_lo, double total_hi,
                              int n_total);

/// Largest number of frac-roots any single total value has on the grid —
/// 3 in the S-shaped regime, 1 in the step-like regime.
int max_roots_per_total(const NullclineSet& ncs, int which);

/// Rectangular search region in (total, frac) coordinates.
struct SearchBox {
    double total_lo, total_hi;
    double frac_lo = 0.0, frac_hi = 1.0;
};

/// Default equilibrium search region: total in (0, 1/A_cyto] (the physical
/// manifold: beyond 1/A_cyto the conserved cytosolic pool would be negative),
/// full frac range.
SearchBox default_search_box(const Params& p);

/// All equilibria of the reduced system inside `box`: Newton refinement
/// (residual <= 1e-10) seeded from every grid cell where both RHS components
/// change sign, plus seeds from the scalar total-balance reduction (at any
/// steady state c_nop = (k_vn - D*total)/(k_nt*(1 - A_cyto*total)) with
/// D = A_cyto*(k_vn + k_vcy), which turns equilibrium finding into a 1-D
/// root scan that cannot miss isolated roots between grid lines). Duplicates
/// merged within 1e-6; classified via the analytic Jacobian; sorted by total.
std::vector<Equilibrium> find_equilibria(const Params& p, const SearchBox& box,
                                         int grid_n = 96);

std::vector<Equilibrium> find_equilibria(const Params& p);

/// Refine a single equilibrium from a starting guess; returns residual
/// <= 1e-10 equilibria only (throws on non-convergence).
Equilibrium refine_equilibrium(const Params& p, const Vec2& guess);

enum class Regime {
    unique_stable_eq,
    unique_stable_cycle,
    cycle_eq_coexistence,
    bistable_equilibria,
    indeterminate,
};

const char* to_string(Regime r);

/// Long-run behavior classification combining find_equilibria with
/// post-transient simulation from each probe state. Oscillation = c_no
/// peak-to-trough amplitude above 1e-3 after the transient with successive
/// inter-peak intervals agreeing within 5%.
Regime classify_regime(const Params& p, const std::vector<Vec2>& probes,
                       double t_transient, double t_observe);

/// Probe choice when the caller has none: small radial offsets from each
/// equilibrium plus one point on the low-fraction flank of the box.
std::vector<Vec2> default_probes(const Params& p,
                                 const std::vector<Equilibrium>& eqs);

}  // namespace biphos
