#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "biphos/continuation.hpp"
#include "biphos/integrate.hpp"
#include "biphos/phase.hpp"

namespace biphos {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// phi_T(x0): flow of the reduced system; NaN vector on integrator failure.
Vec2 flow(const Vec2& x0, double T, const Params& p, double rel_tol = 1e-11,
          double abs_tol = 1e-14) {
    if (!(T > 0) || !x0.allFinite()) return Vec2::Constant(kNaN);
    Vec2 last = x0;
    auto stats = dopri5<Vec2>(
        [&p](double, const Vec2& x) { return rhs_reduced(x, p); }, 0.0, x0, T,
        rel_tol, abs_tol, 5'000'000L,
        [&last](double, double, const Vec2& y, const DenseSegment<Vec2>&) {
            last = y;
            return true;
        });
    if (stats.status != OdeStatus::ok) return Vec2::Constant(kNaN);
    return last;
}

struct VarResult {
    Vec2 phi;
    Mat2 M;      // monodromy-type fundamental matrix over [0, T]
    double mu;   // det M = nontrivial Floquet multiplier on a periodic orbit
    bool ok;
};

/// Flow plus the fundamental matrix of the variational equations, V(0) = I.
VarResult flow_var(const Vec2& x0, double T, const Params& p, double rel_tol = 1e-9,
                   double abs_tol = 1e-12) {
    VarResult out;
    out.ok = false;
    if (!(T > 0) || !x0.allFinite()) return out;
    Vec6 y;
    y << x0[0], x0[1], 1, 0, 0, 1;
    Vec6 last = y;
    auto stats = dopri5<Vec6>(
        [&p](double, const Vec6& z) {
            const Vec2 x = z.head<2>();
            const Mat2 J = jacobian_reduced(x, p);
            Vec6 dz;
            dz.head<2>() = rhs_reduced(x, p);
            dz.segment<2>(2) = J * z.segment<2>(2);
            dz.tail<2>() = J * z.tail<2>();
            return dz;
        },
        0.0, y, T, rel_tol, abs_tol, 5'000'000L,
        [&last](double, double, const Vec6& z, const DenseSegment<Vec6>&) {
            last = z;
            return true;
        });
    if (stats.status != OdeStatus::ok || !last.allFinite()) return out;
    out.phi = last.head<2>();
    out.M.col(0) = last.segment<2>(2);
    out.M.col(1) = last.tail<2>();
    out.mu = out.M.determinant();
    out.ok = true;
    return out;
}

/// Envelope of c_no over [0, T], sampled densely within every accepted step;
/// {NaN, NaN} on integrator failure.
std::pair<double, double> cycle_extrema(const Vec2& x0, double T, const Params& p) {
    if (!(T > 0) || !x0.allFinite()) return {kNaN, kNaN};
    double mn = x0[0], mx = x0[0];
    auto stats = dopri5<Vec2>(
        [&p](double, const Vec2& x) { return rhs_reduced(x, p); }, 0.0, x0, T, 1e-9,
        1e-12, 5'000'000L,
        [&](double t0, double t1, const Vec2& y, const DenseSegment<Vec2>& seg) {
            for (int i = 1; i < 8; ++i) {
                const double v = seg.eval(t0 + (t1 - t0) * i / 8.0)[0];
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            mn = std::min(mn, y[0]);
            mx = std::max(mx, y[0]);
            return true;
        });
    if (stats.status != OdeStatus::ok) return {kNaN, kNaN};
    return {mn, mx};
}

double cycle_amplitude(const Vec2& x0, double T, const Params& p) {
    const auto [mn, mx] = cycle_extrema(x0, T, p);
    return mx - mn;
}

/// Shared Poincare section state; the phase condition reads it through a
/// pointer so re-anchoring between continuation steps takes effect inside F.
struct Section {
    Vec2 a, n;
};

void maybe_reanchor(Section& sec, const Vec2& x0, const Params& p) {
    // Moving frame: re-anchor at every accepted point. A section held fixed
    // while the orbit deforms eventually becomes tangent to it (a single
    // large step can jump straight past the tangency), which folds the
    // (anchor, T, param) solution curve back on itself even though the cycle
    // family continues, so the branch silently reverses direction.
    const Vec2 f = rhs_reduced(x0, p);
    const double fn = f.norm();
    if (fn > 0) {
        sec.a = x0;
        sec.n = f / fn;
    }
}

/// Cached variational run keyed by the augmented vector, so the Floquet
/// test reuses the integration the corrector Jacobian just did.
struct VarCache {
    VecX u;
    double mu = 0;
    bool valid = false;

    bool hit(const VecX& v) const {
        return valid && u.size() == v.size() &&
               (u - v).cwiseAbs().maxCoeff() <= 1e-7 * (1 + v.cwiseAbs().maxCoeff());
    }
};

struct AmpCache {
    VecX u;
    double amp = 0;
    bool valid = false;

    bool hit(const VecX& v) const {
        return valid && u.size() == v.size() &&
               (u - v).cwiseAbs().maxCoeff() <= 1e-7 * (1 + v.cwiseAbs().maxCoeff());
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Single-shooting Newton
// ---------------------------------------------------------------------------

CycleSolution refine_cycle(const Params& params, const Vec2& anchor_guess,
                           double period_guess) {
    if (!(period_guess > 0) || !anchor_guess.allFinite())
        throw std::invalid_argument("refine_cycle: need a finite anchor and T > 0");
    const Vec2 fa = rhs_reduced(anchor_guess, params);
    if (fa.norm() < 1e-12)
        throw std::invalid_argument("refine_cycle: anchor guess sits on an equilibrium");
    const Vec2 nrm = fa.normalized();

    Vec2 x = anchor_guess;
    double T = period_guess;
    double res = std::numeric_limits<double>::infinity();
    VarResult vr;
    const auto residual = [&](const Vec2& xx, double TT, Vec2& gap) -> double {
        vr = flow_var(xx, TT, params, 1e-11, 1e-14);
        if (!vr.ok) return std::numeric_limits<double>::infinity();
        gap = vr.phi - xx;
        const double phase = nrm.dot(xx - anchor_guess);
        return std::sqrt(gap.squaredNorm() + phase * phase);
    };
    Vec2 gap;
    res = residual(x, T, gap);
    for (int it = 0; it < 30 && res > 1e-9; ++it) {
        if (!std::isfinite(res))
            throw std::runtime_error("refine_cycle: shooting flow failed");
        Eigen::Matrix3d A;
        A.block<2, 2>(0, 0) = vr.M - Mat2::Identity();
        A.block<2, 1>(0, 2) = rhs_reduced(vr.phi, params);
        A(2, 0) = nrm[0];
        A(2, 1) = nrm[1];
        A(2, 2) = 0;
        Eigen::Vector3d g;
        g << gap[0], gap[1], nrm.dot(x - anchor_guess);
        const Eigen::Vector3d dz = A.fullPivLu().solve(-g);
        if (!dz.allFinite()) throw std::runtime_error("refine_cycle: singular shooting system");
        double lambda = 1.0;
        while (T + lambda * dz[2] <= 0 && lambda > 1e-6) lambda *= 0.5;
        bool moved = false;
        for (int bt = 0; bt < 6; ++bt) {
            Vec2 x_try = x + lambda * dz.head<2>();
            const double T_try = T + lambda * dz[2];
            Vec2 gap_try;
            const double r_try = residual(x_try, T_try, gap_try);
            if (r_try < res) {
                x = x_try;
                T = T_try;
                gap = gap_try;
                res = r_try;
                moved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!moved) break;
    }
    if (!(res <= 1e-8))
        throw std::runtime_error("refine_cycle: no convergence (residual " +
                                 std::to_string(res) + ")");

    CycleSolution sol;
    sol.anchor = x;
    sol.T = T;
    sol.mu = vr.mu;
    sol.residual = (vr.phi - x).norm();
    std::tie(sol.c_no_min, sol.c_no_max) = cycle_extrema(x, T, params);
    sol.amplitude = sol.c_no_max - sol.c_no_min;
    if (!(sol.amplitude > 1e-9))
        throw std::runtime_error("refine_cycle: collapsed onto an equilibrium");
    const Vec2 fx = rhs_reduced(x, params);
    if (fx.norm() < 1e-12)
        throw std::runtime_error("refine_cycle: converged anchor has zero flow");
    sol.normal = fx.normalized();
    return sol;
}

// ---------------------------------------------------------------------------
// Cycle seeding
// ---------------------------------------------------------------------------

std::optional<CycleSolution> cycle_from_simulation(const Params& params,
                                                   std::optional<Vec2> x0,
                                                   double t_transient) {
    const Params& p = params;
    Vec2 x;
    if (x0) {
        x = *x0;
    } else {
        auto eqs = find_equilibria(p);
        const Equilibrium* pick = nullptr;
        for (const auto& e : eqs)
            if (!e.stable()) {
                pick = &e;
                break;
            }
        if (!pick && !eqs.empty()) pick = &eqs.front();
        if (pick) {
            x = pick->state * 1.001 + Vec2(1e-4, 1e-4);
        } else {
            const double total = 0.5 / p.A_cyto;
            x = Vec2(0.7 * total, 0.3 * total);
        }
    }

    SolverConfig tc;
    tc.rel_tol = 1e-10;
    tc.abs_tol = 1e-13;
    tc.t_end = t_transient;
    {
        auto tr = integrate_reduced(p, x, tc);
        const auto last = tr.states.row(tr.states.rows() - 1);
        x = Vec2(last[0], last[1]);
    }

    double t_obs = 400.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        SolverConfig oc;
        oc.rel_tol = 1e-10;
        oc.abs_tol = 1e-13;
        oc.t_end = t_obs;
        oc.output_times = SolverConfig::uniform_grid(t_obs, t_obs / 4096.0);
        auto tj = integrate_reduced(p, x, oc);
        const Eigen::VectorXd c = tj.states.col(0);
        const int nrow = static_cast<int>(c.size());
        const double mn = c.minCoeff(), mx = c.maxCoeff();
        if (mx - mn < 1e-3) return std::nullopt;  // settled (or nearly so)

        const double thresh = mn + 0.5 * (mx - mn);
        std::vector<int> peaks;
        for (int i = 1; i + 1 < nrow; ++i)
            if (c[i] > c[i - 1] && c[i] >= c[i + 1] && c[i] > thresh) peaks.push_back(i);
        if (peaks.size() >= 4) {
            const std::size_t k0 = peaks.size() > 7 ? peaks.size() - 7 : 1;
            double mean_dt = 0;
            int cnt = 0;
            for (std::size_t k = k0; k < peaks.size(); ++k, ++cnt)
                mean_dt += tj.times[peaks[k]] - tj.times[peaks[k - 1]];
            mean_dt /= cnt;
            const auto row = tj.states.row(peaks.back());
            try {
                return refine_cycle(p, Vec2(row[0], row[1]), mean_dt);
            } catch (const std::exception&) {
                // fall through: observe longer and try again
            }
        }
        const auto last = tj.states.row(tj.states.rows() - 1);
        x = Vec2(last[0], last[1]);
        t_obs *= 2;
    }
    return std::nullopt;
}

std::optional<CycleSolution> cycle_near_hopf(const Params& params,
                                             const std::string& free_name, double p_hopf,
                                             const Vec2& x_hopf, double dp) {
    Params q = params;
    *param_ptr(q, free_name) = p_hopf + dp;
    Equilibrium eq;
    try {
        eq = refine_equilibrium(q, x_hopf);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    const Mat2 J = jacobian_reduced(eq.state, q);
    const double tr = J.trace(), det = J.determinant();
    const double om2 = det - 0.25 * tr * tr;
    if (!(om2 > 0)) return std::nullopt;  // no rotation left: far from the Hopf
    const double T0 = 2 * M_PI / std::sqrt(om2);

    // real part of the complex eigenvector, the major direction of the
    // linearized ellipse
    Vec2 dir(J(0, 1), 0.5 * tr - J(0, 0));
    if (dir.norm() < 1e-12) dir = Vec2(1, 0);
    dir.normalize();

    const double scale = std::max(1.0, eq.state.norm());
    for (const double r : {3e-3, 1e-2, 3e-2, 1e-1, 3e-1}) {
        try {
            CycleSolution c = refine_cycle(q, eq.state + (r * scale) * dir, T0);
            if (c.amplitude > 1e-8 && (c.anchor - eq.state).norm() > 1e-9) return c;
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Cycle branch continuation (one parameter)
// ---------------------------------------------------------------------------

CycleBranch continue_cycle(const Params& params, const std::string& free_name,
                           double range_lo, double range_hi, const CycleSolution& seed,
                           const StepConfig& cfg) {
    if (!(range_lo < range_hi))
        throw std::invalid_argument("continue_cycle: empty parameter range");
    Params base = params;
    const double p_start = *param_ptr(base, free_name);
    if (p_start < range_lo || p_start > range_hi)
        throw std::invalid_argument(
            "continue_cycle: the seed's parameter value must lie inside the range");

    auto sec = std::make_shared<Section>(Section{seed.anchor, seed.normal});
    auto varc = std::make_shared<VarCache>();
    auto ampc = std::make_shared<AmpCache>();

    const auto q_of = [base, free_name](const VecX& u) {
        Params q = base;
        *param_ptr(q, free_name) = u[3];
        return q;
    };

    ContinuationProblem prob;
    prob.n = 3;
    prob.F = [q_of, sec](const VecX& u) -> VecX {
        VecX r = VecX::Constant(3, kNaN);
        if (!(u[2] > 1e-9)) return r;
        const Vec2 x0(u[0], u[1]);
        const Vec2 phi = flow(x0, u[2], q_of(u));
        if (!phi.allFinite()) return r;
        r[0] = phi[0] - u[0];
        r[1] = phi[1] - u[1];
        r[2] = sec->n.dot(x0 - sec->a);
        return r;
    };
    prob.J = [q_of, sec, varc, base, free_name](const VecX& u) -> MatX {
        MatX Jm = MatX::Constant(3, 4, kNaN);
        if (!(u[2] > 1e-9)) return Jm;
        const Vec2 x0(u[0], u[1]);
        const Params q = q_of(u);
        const VarResult vr = flow_var(x0, u[2], q);
        if (!vr.ok) return Jm;
        varc->u = u;
        varc->mu = vr.mu;
        varc->valid = true;
        Jm.block<2, 2>(0, 0) = vr.M - Mat2::Identity();
        Jm.block<2, 1>(0, 2) = rhs_reduced(vr.phi, q);
        const double h = 1e-6 * std::max(1.0, std::abs(u[3]));
        Params qp = base, qm = base;
        *param_ptr(qp, free_name) = u[3] + h;
        *param_ptr(qm, free_name) = u[3] - h;
        const Vec2 pp = flow(x0, u[2], qp);
        const Vec2 pm = flow(x0, u[2], qm);
        if (!pp.allFinite() || !pm.allFinite()) return MatX::Constant(3, 4, kNaN);
        Jm.block<2, 1>(0, 3) = (pp - pm) / (2 * h);
        Jm(2, 0) = sec->n[0];
        Jm(2, 1) = sec->n[1];
        Jm(2, 2) = 0;
        Jm(2, 3) = 0;
        return Jm;
    };
    const auto amp_of = [q_of, ampc](const VecX& u) -> double {
        if (ampc->hit(u)) return ampc->amp;
        const double a = cycle_amplitude(Vec2(u[0], u[1]), u[2], q_of(u));
        ampc->u = u;
        ampc->amp = a;
        ampc->valid = true;
        return a;
    };
    const auto mu_of = [q_of, varc, amp_of](const VecX& u) -> double {
        // A nearly collapsed orbit (branch endpoint merging into a Hopf
        // point) has no meaningful Floquet data; report NaN so fold detection
        // and stability skip it instead of chasing numerical noise.
        if (!(amp_of(u) > 1e-3)) return kNaN;
        if (varc->hit(u)) return varc->mu;
        const VarResult vr = flow_var(Vec2(u[0], u[1]), u[2], q_of(u));
        if (!vr.ok) return kNaN;
        varc->u = u;
        varc->mu = vr.mu;
        varc->valid = true;
        return vr.mu;
    };
    prob.tests.push_back(
        {"cycle-fold", [mu_of](const VecX& u) { return mu_of(u) - 1.0; }, 1e-6, false});
    prob.tests.push_back(
        {"hopf-endpoint", [amp_of](const VecX& u) { return amp_of(u) - 1e-6; }, 1e-7,
         true});
    prob.stable = [mu_of](const VecX& u) { return std::abs(mu_of(u)) < 1.0; };
    prob.on_accept = [q_of, sec](const VecX& u) {
        maybe_reanchor(*sec, Vec2(u[0], u[1]), q_of(u));
    };
    prob.range_component = 3;
    prob.range_lo = range_lo;
    prob.range_hi = range_hi;

    StepConfig c2 = cfg;
    c2.newton_tol = std::max(cfg.newton_tol, 1e-8);

    VecX u0(4);
    u0 << seed.anchor[0], seed.anchor[1], seed.T, p_start;
    Branch down = continue_curve(prob, u0, c2, 3, -1.0);
    Branch merged;
    if (down.closed) {
        merged = std::move(down);
    } else {
        *sec = Section{seed.anchor, seed.normal};
        varc->valid = false;
        ampc->valid = false;
        Branch up = continue_curve(prob, u0, c2, 3, +1.0);
        merged = up.closed ? std::move(up) : merge_bidirectional(down, up);
    }

    CycleBranch cb;
    cb.free_name = free_name;
    cb.termination = merged.termination;
    cb.events = std::move(merged.events);
    cb.points.reserve(merged.points.size());
    for (const auto& bp : merged.points) {
        CycleBranchPoint cp;
        cp.param = bp.u[3];
        cp.cycle.anchor = Vec2(bp.u[0], bp.u[1]);
        cp.cycle.T = bp.u[2];
        cp.cycle.mu = bp.tests.size() > 0 ? bp.tests[0] + 1.0 : kNaN;
        cp.cycle.residual = c2.newton_tol;  // corrected to at most this
        Params q = base;
        *param_ptr(q, free_name) = cp.param;
        std::tie(cp.cycle.c_no_min, cp.cycle.c_no_max) =
            cycle_extrema(cp.cycle.anchor, cp.cycle.T, q);
        cp.cycle.amplitude = std::isfinite(cp.cycle.c_no_max)
                                 ? cp.cycle.c_no_max - cp.cycle.c_no_min
                                 : (bp.tests.size() > 1 ? bp.tests[1] + 1e-6 : kNaN);
        const Vec2 f = rhs_reduced(cp.cycle.anchor, q);
        cp.cycle.normal = f.norm() > 0 ? Vec2(f.normalized()) : Vec2(1, 0);
        cb.points.push_back(std::move(cp));
    }
    return cb;
}

// ---------------------------------------------------------------------------
// Fold-of-cycles curve (two parameters)
// ---------------------------------------------------------------------------

CycleFoldCurve continue_cycle_fold_curve(const Params& params, const std::string& p1,
                                         const std::string& p2,
                                         const CycleSolution& seed_fold,
                                         const StepConfig& cfg) {
    if (!(std::abs(seed_fold.mu - 1.0) <= 1e-3))
        throw std::invalid_argument(
            "continue_cycle_fold_curve: seed cycle has mu = " + std::to_string(seed_fold.mu) +
            "; a fold of cycles needs |mu - 1| <= 1e-3 (refine a cycle-fold event first)");
    Params base = params;
    const double v1 = *param_ptr(base, p1);
    const double v2 = *param_ptr(base, p2);

    auto sec = std::make_shared<Section>(Section{seed_fold.anchor, seed_fold.normal});
    auto ampc = std::make_shared<AmpCache>();

    const auto q_of = [base, p1, p2](const VecX& u) {
        Params q = base;
        *param_ptr(q, p1) = u[3];
        *param_ptr(q, p2) = u[4];
        return q;
    };

    ContinuationProblem prob;
    prob.n = 4;
    prob.F = [q_of, sec](const VecX& u) -> VecX {
        VecX r = VecX::Constant(4, kNaN);
        if (!(u[2] > 1e-9)) return r;
        const Vec2 x0(u[0], u[1]);
        const VarResult vr = flow_var(x0, u[2], q_of(u), 1e-10, 1e-13);
        if (!vr.ok) return r;
        r[0] = vr.phi[0] - u[0];
        r[1] = vr.phi[1] - u[1];
        r[2] = sec->n.dot(x0 - sec->a);
        r[3] = vr.mu - 1.0;
        return r;
    };
    const auto amp_of = [q_of, ampc](const VecX& u) -> double {
        if (ampc->hit(u)) return ampc->amp;
        const double a = cycle_amplitude(Vec2(u[0], u[1]), u[2], q_of(u));
        ampc->u = u;
        ampc->amp = a;
        ampc->valid = true;
        return a;
    };
    prob.tests.push_back(
        {"amplitude-collapse", [amp_of](const VecX& u) { return amp_of(u) - 1e-6; },
         1e-7, true});
    prob.on_accept = [q_of, sec](const VecX& u) {
        maybe_reanchor(*sec, Vec2(u[0], u[1]), q_of(u));
    };

    StepConfig c2 = cfg;
    c2.newton_tol = std::max(cfg.newton_tol, 1e-8);

    VecX u0(5);
    u0 << seed_fold.anchor[0], seed_fold.anchor[1], seed_fold.T, v1, v2;
    Branch fwd = continue_curve(prob, u0, c2, 3, +1.0);
    Branch merged;
    if (fwd.closed) {
        merged = std::move(fwd);
    } else {
        *sec = Section{seed_fold.anchor, seed_fold.normal};
        ampc->valid = false;
        Branch bwd = continue_curve(prob, u0, c2, 3, -1.0);
        merged = bwd.closed ? std::move(bwd) : merge_bidirectional(bwd, fwd);
    }

    CycleFoldCurve out;
    out.p1 = p1;
    out.p2 = p2;
    out.termination = merged.termination;
    out.points.reserve(merged.points.size());
    for (const auto& bp : merged.points) {
        out.points.emplace_back(bp.u[3], bp.u[4]);
        CycleSolution c;
        c.anchor = Vec2(bp.u[0], bp.u[1]);
        c.T = bp.u[2];
        c.mu = 1.0;  // held by the defining equation to the corrector tolerance
        c.residual = c2.newton_tol;
        std::tie(c.c_no_min, c.c_no_max) = cycle_extrema(c.anchor, c.T, q_of(bp.u));
        c.amplitude = std::isfinite(c.c_no_max)
                          ? c.c_no_max - c.c_no_min
                          : (bp.tests.size() > 0 ? bp.tests[0] + 1e-6 : kNaN);
        const Vec2 f = rhs_reduced(c.anchor, q_of(bp.u));
        c.normal = f.norm() > 0 ? Vec2(f.normalized()) : Vec2(1, 0);
        out.cycles.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// One-parameter diagram
// ---------------------------------------------------------------------------

BifurcationDiagram diagram_1d(const Params& params, const std::string& free_name,
                              double range_lo, double range_hi, const StepConfig& cfg) {
    if (!(range_lo < range_hi))
        throw std::invalid_argument("diagram_1d: empty parameter range");
    BifurcationDiagram d;
    d.free_name = free_name;
    Params base = params;
    {
        double* slot = param_ptr(base, free_name);
        if (*slot < range_lo || *slot > range_hi) *slot = 0.5 * (range_lo + range_hi);
    }
    const double p_mid = *param_ptr(base, free_name);

    // An equilibrium at (x, pv) is covered if some branch passes through it:
    // interpolate the branch segment bracketing pv and compare states.
    const auto covered_eq = [&d](const Vec2& x, double pv) {
        for (const auto& b : d.equilibria) {
            for (std::size_t i = 0; i + 1 < b.points.size(); ++i) {
                const double pa = b.points[i].u[2], pb = b.points[i + 1].u[2];
                if ((pa - pv) * (pb - pv) > 0) continue;
                const double w = pa == pb ? 0.5 : (pv - pa) / (pb - pa);
                const VecX ui =
                    (1 - w) * b.points[i].u + w * b.points[i + 1].u;
                if (std::abs(ui[0] - x[0]) <= 0.05 * (1 + std::abs(x[0])) &&
                    std::abs(ui[1] - x[1]) <= 0.05 * (1 + std::abs(x[1])))
                    return true;
            }
        }
        return false;
    };

    const double span = range_hi - range_lo;
    const double probes[3] = {p_mid, range_lo + 1e-6 * span, range_hi - 1e-6 * span};
    for (const double pv : probes) {
        Params q = base;
        *param_ptr(q, free_name) = pv;
        for (const auto& eq : find_equilibria(q)) {
            if (covered_eq(eq.state, pv)) continue;
            d.equilibria.push_back(
                continue_equilibrium(q, free_name, range_lo, range_hi, cfg, eq.state));
        }
    }

    const auto covered_cycle = [&d, span](double pv) {
        for (const auto& cb : d.cycles) {
            if (cb.points.empty()) continue;
            double lo = cb.points.front().param, hi = lo;
            for (const auto& cp : cb.points) {
                lo = std::min(lo, cp.param);
                hi = std::max(hi, cp.param);
            }
            if (pv >= lo - 0.01 * span && pv <= hi + 0.01 * span) return true;
        }
        return false;
    };

    // cycles born at Hopf events, processed left to right
    struct HopfSeed {
        double p;
        Vec2 x;
    };
    std::vector<HopfSeed> hopfs;
    for (const auto& b : d.equilibria)
        for (const auto& e : b.events)
            if (e.kind == "hopf") hopfs.push_back({e.u[2], Vec2(e.u[0], e.u[1])});
    std::sort(hopfs.begin(), hopfs.end(),
              [](const HopfSeed& a, const HopfSeed& b) { return a.p < b.p; });

    const double dp0 = 1e-3 * span;
    for (const auto& h : hopfs) {
        if (covered_cycle(h.p)) continue;
        for (const double dp : {dp0, -dp0, 3 * dp0, -3 * dp0, 10 * dp0, -10 * dp0}) {
            const double pv = h.p + dp;
            if (pv < range_lo || pv > range_hi) continue;
            auto c = cycle_near_hopf(base, free_name, h.p, h.x, dp);
            if (!c) continue;
            Params q = base;
            *param_ptr(q, free_name) = pv;
            d.cycles.push_back(continue_cycle(q, free_name, range_lo, range_hi, *c, cfg));
            break;
        }
    }

    // a cycle window with no Hopf birth inside the range would be missed
    // above; one simulation probe at the midpoint catches it
    if (!covered_cycle(p_mid)) {
        Params q = base;
        *param_ptr(q, free_name) = p_mid;
        if (auto c = cycle_from_simulation(q))
            d.cycles.push_back(continue_cycle(q, free_name, range_lo, range_hi, *c, cfg));
    }
    return d;
}

}  // namespace biphos
