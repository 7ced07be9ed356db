#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "biphos/model.hpp"
#include "biphos/params.hpp"

namespace biphos {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Mutable access to a continuable scalar parameter by its config name.
/// Throws std::invalid_argument for unknown names (and for the non-scalar
/// use_piecewise_fsca).
double* param_ptr(Params& p, const std::string& name);

// ---------------------------------------------------------------------------
// Generic pseudo-arclength continuation over F: R^{n+1} -> R^n
// ---------------------------------------------------------------------------

struct StepConfig {
    double ds0 = 1e-2;     // initial arclength step (scaled coordinates)
    double ds_min = 1e-6;  // below this a corrector failure ends the branch
    double ds_max = 1.0;
    double grow = 1.3;  // step growth after `grow_after` consecutive successes
    int grow_after = 4;
    int max_points = 4000;
    int newton_max_iters = 14;
    double newton_tol = 1e-9;  // residual norm target for corrected points
    double min_cos = 0.2;      // secant turning-angle guard; sharper turns halve ds
};

/// Scalar event function monitored along a branch. A sign change between
/// consecutive corrected points is localized by bisection on arclength
/// (every trial is Newton-corrected back onto the curve) until
/// |fn| <= tol. `terminal` truncates the branch at the refined crossing,
/// which becomes its last point; the termination string is the test's name.
struct TestSpec {
    std::string name;
    std::function<double(const VecX&)> fn;
    double tol = 1e-8;
    bool terminal = false;
};

struct BranchPoint {
    VecX u;                     // augmented solution (state..., parameter(s))
    std::vector<double> tests;  // test-function values at this point
    bool stable = false;
};

struct BranchEvent {
    std::string kind;         // test name, possibly relabeled by the caller
    VecX u;                   // refined location (on the curve)
    std::size_t after_point;  // branch-point index immediately before the event
    double test_value;        // refined test residual (|.| <= tol normally)
};

struct Branch {
    std::vector<BranchPoint> points;
    std::vector<BranchEvent> events;
    std::string termination;  // "range-exit" | "closed-curve" | "max-points" |
                              // "corrector-failure" | a terminal test's name
    bool closed = false;      // closed curve: last point duplicates the first
};

/// Problem definition for the generic engine. `F` maps the augmented vector
/// u in R^{n+1} to n residuals. `J` (n x (n+1)) is optional; central finite
/// differences are used when absent. `on_accept` runs once per accepted
/// point, before the next predictor, and may mutate state captured by F
/// (e.g. re-anchoring a Poincare section); event refinement for a segment
/// happens before on_accept so both endpoints satisfy the same F.
struct ContinuationProblem {
    int n = 0;
    std::function<VecX(const VecX&)> F;
    std::function<MatX(const VecX&)> J;
    std::vector<TestSpec> tests;
    std::function<bool(const VecX&)> stable;
    std::function<void(const VecX&)> on_accept;
    int range_component = -1;  // when >= 0, terminate on leaving [lo, hi]
    double range_lo = 0, range_hi = 0;
};

/// Run pseudo-arclength continuation from u0 (Newton-corrected first with
/// component `orient_component` held fixed). The initial tangent is the
/// Jacobian kernel, oriented so its `orient_component` entry has sign
/// `orient_sign`; secant tangents follow. All norms use per-component
/// scaling s_i = max(1, |u0_i|). Steps halve on corrector failure and grow
/// `grow`x after `grow_after` successes; the branch closes when it returns
/// to within one step of the start after >= 10 steps.
Branch continue_curve(const ContinuationProblem& prob, const VecX& u0,
                      const StepConfig& cfg, int orient_component, double orient_sign);

/// Join a branch continued downward and one continued upward from the same
/// start point into a single monotone-ordered branch (the duplicated start
/// point is dropped from the reversed half; event indices are remapped).
Branch merge_bidirectional(const Branch& down, const Branch& up);

// ---------------------------------------------------------------------------
// Equilibrium branches (one free parameter)
// ---------------------------------------------------------------------------

/// Continue an equilibrium of the reduced system in `free_name` over
/// [range_lo, range_hi], both directions from the starting value in
/// `params` (clamped into the range). Tests: tr J ("hopf", refined to
/// |tr J| <= 1e-8, relabeled "neutral-saddle" where det J <= 0) and det J
/// ("fold"). A point is stable iff tr J < 0 and det J > 0. Starts from the
/// equilibrium nearest x0, or the first (lowest-total) one if omitted.
Branch continue_equilibrium(const Params& params, const std::string& free_name,
                            double range_lo, double range_hi, const StepConfig& cfg,
                            std::optional<Vec2> x0 = std::nullopt);

/// First Lyapunov coefficient at a Hopf point of the reduced system.
/// Preconditions checked: |tr J| <= 1e-8 and det J > 0 (throws otherwise).
/// The system is moved to normal-form coordinates (linear part
/// [[0,-w],[w,0]], w = sqrt(det J)) and the classical planar cubic
/// coefficient is evaluated with central differences plus one Richardson
/// extrapolation level (base step 1e-4 max(1, ||x||)). l1 < 0 supercritical,
/// l1 > 0 subcritical.
double first_lyapunov(const Vec2& x, const Params& params);

/// Same computation for an arbitrary planar RHS (the hook for closed-form
/// normal-form oracles in the tests). When `jac` is absent the linearization
/// is taken by central differences too.
double first_lyapunov_generic(const std::function<Vec2(const Vec2&)>& rhs,
                              const Vec2& x,
                              const std::function<Mat2(const Vec2&)>& jac = nullptr);

// ---------------------------------------------------------------------------
// Two-parameter Hopf curves and Bautin points
// ---------------------------------------------------------------------------

struct CodimTwoPoint {
    std::string kind;  // "bautin"
    double p1 = 0, p2 = 0;
    Vec2 state;
    double l1 = 0;  // |l1| <= 1e-6 after refinement
};

struct HopfCurve {
    Branch branch;       // u = (c_no, c_nop, p1, p2)
    std::string p1, p2;  // parameter names for u[2], u[3]
    std::vector<CodimTwoPoint> codim2;
};

/// Continue the zero set of {rhs_reduced, tr J} through (state, p1, p2)
/// from a seed Hopf point (at the parameter values in `params`). det J is a
/// terminal test ("hopf-fold-interaction": past it the curve would follow
/// neutral saddles, not Hopf points); l1 sign changes are refined into
/// Bautin points with |l1| <= 1e-6. A closed curve (e.g. the oscillation
/// bell in a (tau, K_c) plane) is detected and flagged.
HopfCurve continue_hopf_curve(const Params& params, const std::string& p1,
                              const std::string& p2, const Vec2& seed_state,
                              const StepConfig& cfg);

/// Locate the first Hopf point (increasing parameter) of the reduced system
/// in `free_name` within [range_lo, range_hi]: scan equilibria for a tr J
/// sign change with det J > 0, then bisect to |tr J| <= 1e-8. Returns
/// (equilibrium state, parameter value); throws std::runtime_error if the
/// range contains none.
std::pair<Vec2, double> find_hopf(const Params& params, const std::string& free_name,
                                  double range_lo, double range_hi, int n_scan = 200);

// ---------------------------------------------------------------------------
// Limit cycles: single shooting, Floquet multiplier, folds of cycles
// ---------------------------------------------------------------------------

struct CycleSolution {
    Vec2 anchor;           // point on the Poincare section
    Vec2 normal;           // section normal = flow direction at the anchor
    double T = 0;          // period
    double mu = 0;         // nontrivial Floquet multiplier, det(monodromy)
    double amplitude = 0;  // peak-to-trough of c_no over one period
    double c_no_min = 0;   // orbit envelope of c_no (diagram min/max columns)
    double c_no_max = 0;
    double residual = 0;   // ||phi_T(anchor) - anchor|| achieved by Newton
    bool stable() const { return std::abs(mu) < 1.0; }
};

/// Converge a periodic orbit by shooting Newton on (anchor, period) from an
/// approximate anchor and period (residual <= 1e-8, throws on failure). The
/// section through the converged anchor is orthogonal to the flow there.
CycleSolution refine_cycle(const Params& params, const Vec2& anchor_guess,
                           double period_guess);

/// Locate a stable cycle by post-transient simulation started at x0 (or
/// near an unstable equilibrium when omitted). Returns nullopt when the
/// dynamics settles to a point instead.
std::optional<CycleSolution> cycle_from_simulation(const Params& params,
                                                   std::optional<Vec2> x0 = std::nullopt,
                                                   double t_transient = 300.0);

/// Cycle seed near a Hopf point: steps `free_name` from p_hopf by dp and
/// shoots from the linearized ellipse around the continued equilibrium,
/// escalating the trial radius. Finds unstable cycles as readily as stable
/// ones (Newton does not care). nullopt when no cycle converges.
std::optional<CycleSolution> cycle_near_hopf(const Params& params,
                                             const std::string& free_name, double p_hopf,
                                             const Vec2& x_hopf, double dp);

struct CycleBranchPoint {
    double param = 0;
    CycleSolution cycle;
};

struct CycleBranch {
    std::string free_name;
    std::vector<CycleBranchPoint> points;
    std::vector<BranchEvent> events;  // "cycle-fold" with u = (anchor, T, param)
    std::string termination;          // engine terminations plus "hopf-endpoint"
};

/// Pseudo-arclength continuation of the shooting system
/// {phi_T(x) - x = 0, section phase condition = 0} in (x, T, param), both
/// directions over [range_lo, range_hi] from a converged seed cycle. The
/// nontrivial Floquet multiplier is tracked along the branch; mu - 1 sign
/// changes are refined to |mu - 1| <= 1e-6 "cycle-fold" events. The section
/// re-anchors whenever flow transversality at the current anchor falls
/// below 1e-2. Terminates on range exit, amplitude collapse below 1e-6
/// ("hopf-endpoint"), or corrector failure.
CycleBranch continue_cycle(const Params& params, const std::string& free_name,
                           double range_lo, double range_hi, const CycleSolution& seed,
                           const StepConfig& cfg);

/// Two-parameter fold-of-cycles curve: the shooting system augmented with
/// mu = 1, continued in (x, T, p1, p2) from a converged cycle at a fold.
struct CycleFoldCurve {
    std::string p1, p2;
    std::vector<std::pair<double, double>> points;  // (p1, p2) along the curve
    std::vector<CycleSolution> cycles;              // matching cycle data
    std::string termination;  // "amplitude-collapse" when the folding cycle
                              // shrinks below 1e-6 (merging toward the Hopf
                              // curve), else engine terminations
};

CycleFoldCurve continue_cycle_fold_curve(const Params& params, const std::string& p1,
                                         const std::string& p2,
                                         const CycleSolution& seed_fold,
                                         const StepConfig& cfg);

// ---------------------------------------------------------------------------
// One-parameter bifurcation diagram (equilibria + cycles)
// ---------------------------------------------------------------------------

struct BifurcationDiagram {
    std::string free_name;
    std::vector<Branch> equilibria;   // u = (c_no, c_nop, param) each
    std::vector<CycleBranch> cycles;  // stability flagged through mu
};

/// Compose continue_equilibrium and continue_cycle over [range_lo, range_hi]:
/// one equilibrium branch per disconnected sheet reachable from equilibria
/// found at the range endpoints and midpoint, and one cycle branch per Hopf
/// event (seeded on whichever side a cycle converges) plus a simulation
/// probe at the midpoint to catch cycles with no Hopf birth inside the range.
BifurcationDiagram diagram_1d(const Params& params, const std::string& free_name,
                              double range_lo, double range_hi,
                              const StepConfig& cfg = {});

}  // namespace biphos
