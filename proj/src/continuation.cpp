#include "biphos/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "biphos/phase.hpp"

namespace biphos {

double* param_ptr(Params& p, const std::string& name) {
    if (name == "k_vn") return &p.k_vn;
    if (name == "k_vcy") return &p.k_vcy;
    if (name == "k_nt") return &p.k_nt;
    if (name == "K_c") return &p.K_c;
    if (name == "tau") return &p.tau;
    if (name == "A_cyto") return &p.A_cyto;
    if (name == "A_n") return &p.A_n;
    if (name == "m") return &p.m;
    if (name == "m_sca") return &p.m_sca;
    if (name == "sigma") return &p.sigma;
    throw std::invalid_argument("param_ptr: no continuable parameter named '" + name + "'");
}

namespace {

bool finite(const VecX& v) { return v.allFinite(); }

/// Central-difference Jacobian of F at u (n x (n+1)).
MatX fd_jacobian(const std::function<VecX(const VecX&)>& F, const VecX& u, int n) {
    const int N = static_cast<int>(u.size());
    MatX J(n, N);
    VecX up = u, um = u;
    for (int j = 0; j < N; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(u[j]));
        up[j] = u[j] + h;
        um[j] = u[j] - h;
        J.col(j) = (F(up) - F(um)) / (2 * h);
        up[j] = u[j];
        um[j] = u[j];
    }
    return J;
}

/// Shared machinery for the two corrector variants: Newton on F(u) = 0
/// augmented with one linear constraint row.
struct Corrector {
    const ContinuationProblem& prob;
    const StepConfig& cfg;
    const VecX& s;  // component scales

    MatX jac(const VecX& u) const {
        // Trial points may wander outside the model's domain (e.g. a
        // parameter crossing zero); treat a throwing evaluation like a
        // non-finite one so the step is rejected rather than aborting.
        try {
            return prob.J ? prob.J(u) : fd_jacobian(prob.F, u, prob.n);
        } catch (const std::exception&) {
            return MatX::Constant(prob.n, u.size(),
                                  std::numeric_limits<double>::quiet_NaN());
        }
    }

    /// row . u = target; returns the corrected point or nullopt.
    std::optional<VecX> run(VecX u, const VecX& row, double target) const {
        const int n = prob.n;
        const int N = n + 1;
        VecX g(N);
        auto residual = [&](const VecX& v, VecX& out) -> bool {
            VecX f;
            try {
                f = prob.F(v);
            } catch (const std::exception&) {
                return false;  // out-of-domain trial point
            }
            if (!finite(f)) return false;
            out.head(n) = f;
            out[n] = row.dot(v) - target;
            return true;
        };
        if (!residual(u, g)) return std::nullopt;
        double res = g.norm();
        for (int it = 0; it < cfg.newton_max_iters; ++it) {
            if (res <= cfg.newton_tol) return u;
            MatX A(N, N);
            A.topRows(n) = jac(u);
            A.row(n) = row.transpose();
            if (!A.allFinite()) return std::nullopt;
            VecX du = A.colPivHouseholderQr().solve(-g);
            if (!finite(du)) return std::nullopt;
            // backtracking: accept the first step that reduces the residual
            double lambda = 1.0;
            VecX u_try;
            VecX g_try(N);
            bool moved = false;
            for (int bt = 0; bt < 5; ++bt) {
                u_try = u + lambda * du;
                if (residual(u_try, g_try) && g_try.norm() < res) {
                    moved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!moved) {
                // plain full step as a last resort (residual may rise once
                // before quadratic convergence kicks in)
                u_try = u + du;
                if (!residual(u_try, g_try)) return std::nullopt;
                if (!(g_try.norm() < 1e3 * res + 1)) return std::nullopt;
            }
            u = u_try;
            g = g_try;
            res = g.norm();
            if (res > 1e8) return std::nullopt;
        }
        return res <= cfg.newton_tol ? std::optional<VecX>(u) : std::nullopt;
    }

    /// Correct with component `ic` pinned to `value`.
    std::optional<VecX> fixed_component(const VecX& u, int ic, double value) const {
        VecX row = VecX::Zero(u.size());
        row[ic] = 1.0;
        VecX u0 = u;
        u0[ic] = value;
        return run(u0, row, value);
    }

    /// Correct onto the arclength plane at distance ds from base along the
    /// scaled tangent tsv (|tsv| = 1 in scaled coordinates).
    std::optional<VecX> arclength(const VecX& base, const VecX& tsv, double ds) const {
        const int N = static_cast<int>(base.size());
        VecX row(N);
        for (int i = 0; i < N; ++i) row[i] = tsv[i] / s[i];
        VecX pred = base;
        for (int i = 0; i < N; ++i) pred[i] += ds * tsv[i] * s[i];
        return run(pred, row, row.dot(base) + ds);
    }
};

/// Scaled-space tangent: unit kernel vector of J(u) * diag(s).
VecX kernel_tangent(const MatX& J, const VecX& s) {
    const int n = static_cast<int>(J.rows());
    const int N = static_cast<int>(J.cols());
    MatX Js = J;
    for (int j = 0; j < N; ++j) Js.col(j) *= s[j];
    Eigen::HouseholderQR<MatX> qr(Js.transpose());
    MatX Q = qr.householderQ();
    VecX t = Q.col(n);
    return t.normalized();
}

std::vector<double> eval_tests(const ContinuationProblem& prob, const VecX& u) {
    std::vector<double> v;
    v.reserve(prob.tests.size());
    for (const auto& ts : prob.tests) {
        double tv;
        try {
            tv = ts.fn(u);
        } catch (const std::exception&) {
            tv = std::numeric_limits<double>::quiet_NaN();
        }
        v.push_back(tv);
    }
    return v;
}

BranchPoint make_point(const ContinuationProblem& prob, const VecX& u) {
    BranchPoint bp;
    bp.u = u;
    bp.tests = eval_tests(prob, u);
    try {
        bp.stable = prob.stable ? prob.stable(u) : false;
    } catch (const std::exception&) {
        bp.stable = false;
    }
    return bp;
}

struct RefinedEvent {
    double ds;  // arclength offset from the segment's base point
    BranchEvent ev;
    bool terminal;
};

}  // namespace

Branch continue_curve(const ContinuationProblem& prob, const VecX& u0_in,
                      const StepConfig& cfg, int orient_component, double orient_sign) {
    Branch br;
    const int n = prob.n;
    const int N = n + 1;
    if (u0_in.size() != N)
        throw std::invalid_argument("continue_curve: u0 has wrong dimension");

    VecX s(N);
    for (int i = 0; i < N; ++i) s[i] = std::max(1.0, std::abs(u0_in[i]));
    const auto wnorm = [&](const VecX& v) {
        double acc = 0;
        for (int i = 0; i < N; ++i) {
            const double q = v[i] / s[i];
            acc += q * q;
        }
        return std::sqrt(acc);
    };
    Corrector cor{prob, cfg, s};

    // Correct the start point with the orientation component pinned.
    auto start = cor.fixed_component(u0_in, orient_component, u0_in[orient_component]);
    if (!start) {
        br.termination = "corrector-failure";
        return br;
    }
    VecX u_start = *start;
    VecX tsv = kernel_tangent(cor.jac(u_start), s);
    if (tsv[orient_component] * orient_sign < 0) tsv = -tsv;

    br.points.push_back(make_point(prob, u_start));
    if (prob.on_accept) prob.on_accept(u_start);

    VecX u_k = u_start;
    std::vector<double> tv_k = br.points.back().tests;
    double ds = cfg.ds0;
    int successes = 0;

    const bool ranged = prob.range_component >= 0;
    const int rc = prob.range_component;

    while (true) {
        if (static_cast<int>(br.points.size()) >= cfg.max_points) {
            br.termination = "max-points";
            return br;
        }

        auto corrected = cor.arclength(u_k, tsv, ds);
        bool ok = corrected.has_value();
        VecX u_new;
        VecX tsv_new(N);
        double seg_len = 0;
        if (ok) {
            u_new = *corrected;
            VecX diff = u_new - u_k;
            seg_len = wnorm(diff);
            if (seg_len < 0.1 * ds) {
                ok = false;  // corrector collapsed back onto the base point
            } else {
                for (int i = 0; i < N; ++i) tsv_new[i] = diff[i] / s[i];
                tsv_new /= seg_len;
                const double c = tsv_new.dot(tsv);
                if (c < cfg.min_cos && ds > 1.0001 * cfg.ds_min)
                    ok = false;  // turned too sharply: resolve with smaller steps
                else if (c < -0.5) {
                    // Even at ds_min the corrector lands behind the base point:
                    // a smooth curve resolved at this scale cannot reverse, so
                    // the forward direction is blocked. Stop rather than walk
                    // back along the branch.
                    br.termination = "corrector-failure";
                    return br;
                }
            }
        }
        if (!ok) {
            ds *= 0.5;
            successes = 0;
            if (ds < cfg.ds_min) {
                br.termination = "corrector-failure";
                return br;
            }
            continue;
        }

        // --- event detection on [u_k, u_new] ---------------------------------
        std::vector<double> tv_new = eval_tests(prob, u_new);
        std::vector<RefinedEvent> refined;
        for (std::size_t i = 0; i < prob.tests.size(); ++i) {
            const double a = tv_k[i], b = tv_new[i];
            if (!std::isfinite(a) || !std::isfinite(b)) continue;
            if (a == 0.0 || a * b >= 0) continue;
            // bisect on arclength; every trial is corrected onto the curve
            double lo = 0, hi = ds;
            double va = a;
            // Track the closest point overall and the closest one on the base
            // side of the crossing. If the crossing cannot be certified to
            // tolerance (the corrector may keep failing near a singularity),
            // the base-side point is the defensible one: for a terminal event
            // it becomes the branch's last point and must still satisfy the
            // invariants that held before the crossing.
            VecX u_any = u_new, u_base = u_k;
            double v_any = b, v_base = a;
            double ds_any = ds, ds_base = 0.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (hi - lo < 1e-14 * ds) break;
                auto trial = cor.arclength(u_k, tsv, mid);
                double vm = std::numeric_limits<double>::quiet_NaN();
                if (trial) {
                    try {
                        vm = prob.tests[i].fn(*trial);
                    } catch (const std::exception&) {
                    }
                }
                if (!std::isfinite(vm)) {
                    // Un-evaluable midpoint: the base half is the side we can
                    // certify, so shrink toward it and keep refining.
                    hi = mid;
                    continue;
                }
                if (std::abs(vm) < std::abs(v_any)) {
                    u_any = *trial;
                    v_any = vm;
                    ds_any = mid;
                }
                if (a * vm > 0 && std::abs(vm) < std::abs(v_base)) {
                    u_base = *trial;
                    v_base = vm;
                    ds_base = mid;
                }
                if (std::abs(vm) <= prob.tests[i].tol) break;
                if (va * vm < 0)
                    hi = mid;
                else {
                    lo = mid;
                    va = vm;
                }
            }
            const bool certified = std::abs(v_any) <= prob.tests[i].tol;
            RefinedEvent re;
            re.ds = certified ? ds_any : ds_base;
            re.ev = BranchEvent{prob.tests[i].name, certified ? u_any : u_base,
                                br.points.size() - 1, certified ? v_any : v_base};
            re.terminal = prob.tests[i].terminal;
            refined.push_back(std::move(re));
        }
        std::sort(refined.begin(), refined.end(),
                  [](const RefinedEvent& x, const RefinedEvent& y) { return x.ds < y.ds; });

        // Drop events beyond the range boundary (they sit on curve the caller
        // asked us not to explore).
        const bool exited =
            ranged && (u_new[rc] < prob.range_lo || u_new[rc] > prob.range_hi);
        if (exited) {
            const double bound =
                u_new[rc] < prob.range_lo ? prob.range_lo : prob.range_hi;
            refined.erase(std::remove_if(refined.begin(), refined.end(),
                                         [&](const RefinedEvent& re) {
                                             return re.ev.u[rc] < prob.range_lo ||
                                                    re.ev.u[rc] > prob.range_hi;
                                         }),
                          refined.end());
            // terminal events inside the range still take precedence
            bool truncated = false;
            for (auto& re : refined) {
                br.events.push_back(re.ev);
                if (re.terminal) {
                    br.points.push_back(make_point(prob, re.ev.u));
                    br.termination = re.ev.kind;
                    truncated = true;
                    break;
                }
            }
            if (!truncated) {
                // land exactly on the boundary
                auto landed = cor.fixed_component(u_new, rc, bound);
                if (landed) br.points.push_back(make_point(prob, *landed));
                br.termination = "range-exit";
            }
            return br;
        }

        bool truncated = false;
        for (auto& re : refined) {
            br.events.push_back(re.ev);
            if (re.terminal) {
                br.points.push_back(make_point(prob, re.ev.u));
                br.termination = re.ev.kind;
                truncated = true;
                break;
            }
        }
        if (truncated) return br;

        // --- accept -----------------------------------------------------------
        bool stab = false;
        try {
            stab = prob.stable ? prob.stable(u_new) : false;
        } catch (const std::exception&) {
        }
        br.points.push_back(BranchPoint{u_new, tv_new, stab});
        if (prob.on_accept) prob.on_accept(u_new);

        // closed curve: back within one step of the start, moving toward it
        if (br.points.size() > 10) {
            VecX to_start = u_start - u_k;
            if (wnorm(u_new - u_start) <= ds && tsv.dot([&] {
                                                    VecX w(N);
                                                    for (int i = 0; i < N; ++i)
                                                        w[i] = to_start[i] / s[i];
                                                    return w;
                                                }()) > 0) {
                br.points.push_back(br.points.front());
                br.closed = true;
                br.termination = "closed-curve";
                return br;
            }
        }

        u_k = u_new;
        tv_k = std::move(tv_new);
        tsv = tsv_new;
        if (++successes >= cfg.grow_after) {
            ds = std::min(ds * cfg.grow, cfg.ds_max);
            successes = 0;
        }
    }
}

Branch merge_bidirectional(const Branch& down, const Branch& up) {
    Branch m;
    const std::size_t ld = down.points.size();
    m.points.reserve(ld + up.points.size());
    for (std::size_t i = ld; i-- > 1;) m.points.push_back(down.points[i]);
    for (const auto& p : up.points) m.points.push_back(p);
    for (const auto& e : down.events) {
        BranchEvent r = e;
        r.after_point = ld - 2 - e.after_point;
        m.events.push_back(std::move(r));
    }
    for (const auto& e : up.events) {
        BranchEvent r = e;
        r.after_point = ld - 1 + e.after_point;
        m.events.push_back(std::move(r));
    }
    std::sort(m.events.begin(), m.events.end(),
              [](const BranchEvent& a, const BranchEvent& b) {
                  return a.after_point < b.after_point;
              });
    m.termination = down.termination == up.termination
                        ? up.termination
                        : down.termination + "|" + up.termination;
    return m;
}

// ---------------------------------------------------------------------------
// Equilibrium continuation
// ---------------------------------------------------------------------------

Branch continue_equilibrium(const Params& params, const std::string& free_name,
                            double range_lo, double range_hi, const StepConfig& cfg,
                            std::optional<Vec2> x0) {
    if (!(range_lo < range_hi))
        throw std::invalid_argument("continue_equilibrium: empty parameter range");
    Params base = params;
    double* slot = param_ptr(base, free_name);
    if (*slot < range_lo || *slot > range_hi) *slot = 0.5 * (range_lo + range_hi);
    const double p0 = *slot;

    Vec2 start;
    if (x0) {
        start = *x0;
    } else {
        auto eqs = find_equilibria(base);
        if (eqs.empty())
            throw std::runtime_error("continue_equilibrium: no equilibrium at start");
        start = eqs.front().state;
    }
    start = refine_equilibrium(base, start).state;

    ContinuationProblem prob;
    prob.n = 2;
    prob.F = [base, free_name](const VecX& u) -> VecX {
        Params q = base;
        *param_ptr(q, free_name) = u[2];
        Vec2 f = rhs_reduced(Vec2(u[0], u[1]), q);
        return (VecX(2) << f[0], f[1]).finished();
    };
    prob.J = [base, free_name](const VecX& u) -> MatX {
        Params q = base;
        double* pv = param_ptr(q, free_name);
        *pv = u[2];
        const Vec2 x(u[0], u[1]);
        MatX J(2, 3);
        J.block<2, 2>(0, 0) = jacobian_reduced(x, q);
        const double h = 1e-6 * std::max(1.0, std::abs(u[2]));
        *pv = u[2] + h;
        Vec2 fp = rhs_reduced(x, q);
        *pv = u[2] - h;
        Vec2 fm = rhs_reduced(x, q);
        J.col(2) = (fp - fm) / (2 * h);
        return J;
    };
    const auto jac_at = [base, free_name](const VecX& u) {
        Params q = base;
        *param_ptr(q, free_name) = u[2];
        return jacobian_reduced(Vec2(u[0], u[1]), q);
    };
    prob.tests.push_back(
        {"hopf", [jac_at](const VecX& u) { return jac_at(u).trace(); }, 1e-8, false});
    prob.tests.push_back(
        {"fold", [jac_at](const VecX& u) { return jac_at(u).determinant(); }, 1e-8,
         false});
    prob.stable = [jac_at](const VecX& u) {
        Mat2 J = jac_at(u);
        return J.trace() < 0 && J.determinant() > 0;
    };
    prob.range_component = 2;
    prob.range_lo = range_lo;
    prob.range_hi = range_hi;

    VecX u0(3);
    u0 << start[0], start[1], p0;
    Branch down = continue_curve(prob, u0, cfg, 2, -1.0);
    Branch out;
    if (down.closed) {
        out = std::move(down);
    } else {
        Branch up = continue_curve(prob, u0, cfg, 2, +1.0);
        out = up.closed ? std::move(up) : merge_bidirectional(down, up);
    }
    for (auto& e : out.events) {
        if (e.kind == "hopf") {
            Params q = base;
            *param_ptr(q, free_name) = e.u[2];
            if (jacobian_reduced(Vec2(e.u[0], e.u[1]), q).determinant() <= 0)
                e.kind = "neutral-saddle";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// First Lyapunov coefficient
// ---------------------------------------------------------------------------

double first_lyapunov_generic(const std::function<Vec2(const Vec2&)>& rhs_fn,
                              const Vec2& x,
                              const std::function<Mat2(const Vec2&)>& jac_fn) {
    Mat2 J;
    if (jac_fn) {
        J = jac_fn(x);
    } else {
        for (int j = 0; j < 2; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
            Vec2 xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            J.col(j) = (rhs_fn(xp) - rhs_fn(xm)) / (2 * h);
        }
    }
    const double tr = J(0, 0) + J(1, 1);
    if (std::abs(tr) > 1e-8)
        throw std::invalid_argument(
            "first_lyapunov: not a Hopf point (|tr J| > 1e-8)");
    const double a = 0.5 * (J(0, 0) - J(1, 1));
    const double b = J(0, 1);
    const double c = J(1, 0);
    const double om2 = -a * a - b * c;
    if (!(om2 > 0))
        throw std::domain_error("first_lyapunov: det J <= 0 (no imaginary pair)");
    if (std::abs(b) < 1e-12)
        throw std::domain_error(
            "first_lyapunov: degenerate linearization (J01 ~ 0); the normal-form "
            "transform needs a nonzero upper-right entry");
    const double om = std::sqrt(om2);

    // P sends [[0,-om],[om,0]] to the linear part of the system at x.
    Mat2 P;
    P << b, 0.0, -a, -om;
    Mat2 Pi;
    Pi << -om, 0.0, a, b;
    Pi /= (-b * om);

    const auto G = [&](double xi, double eta) -> Vec2 {
        Vec2 z = x + P * Vec2(xi, eta);
        return Pi * rhs_fn(z);
    };

    struct Partials {
        Vec2 xx, yy, xy, xxx, yyy, xyy, xxy;
    };
    const auto partials = [&](double h) -> Partials {
        const Vec2 g00 = G(0, 0);
        const Vec2 g10 = G(h, 0), gm10 = G(-h, 0);
        const Vec2 g20 = G(2 * h, 0), gm20 = G(-2 * h, 0);
        const Vec2 g01 = G(0, h), g0m1 = G(0, -h);
        const Vec2 g02 = G(0, 2 * h), g0m2 = G(0, -2 * h);
        const Vec2 g11 = G(h, h), g1m1 = G(h, -h);
        const Vec2 gm11 = G(-h, h), gm1m1 = G(-h, -h);
        const double h2 = h * h, h3 = h2 * h;
        Partials d;
        d.xx = (g10 - 2 * g00 + gm10) / h2;
        d.yy = (g01 - 2 * g00 + g0m1) / h2;
        d.xy = (g11 - g1m1 - gm11 + gm1m1) / (4 * h2);
        d.xxx = (g20 - 2 * g10 + 2 * gm10 - gm20) / (2 * h3);
        d.yyy = (g02 - 2 * g01 + 2 * g0m1 - g0m2) / (2 * h3);
        d.xyy = (g11 - 2 * g10 + g1m1 - gm11 + 2 * gm10 - gm1m1) / (2 * h3);
        d.xxy = (g11 - 2 * g01 + gm11 - g1m1 + 2 * g0m1 - gm1m1) / (2 * h3);
        return d;
    };

    const double h = 1e-4 * std::max(1.0, x.norm());
    const Partials d1 = partials(h);
    const Partials d2 = partials(0.5 * h);
    const auto rich = [](const Vec2& coarse, const Vec2& fine) -> Vec2 {
        return (4.0 * fine - coarse) / 3.0;
    };
    const Vec2 xx = rich(d1.xx, d2.xx), yy = rich(d1.yy, d2.yy),
               xy = rich(d1.xy, d2.xy), xxx = rich(d1.xxx, d2.xxx),
               yyy = rich(d1.yyy, d2.yyy), xyy = rich(d1.xyy, d2.xyy),
               xxy = rich(d1.xxy, d2.xxy);

    return (xxx[0] + xyy[0] + xxy[1] + yyy[1] +
            (xy[0] * (xx[0] + yy[0]) - xy[1] * (xx[1] + yy[1]) - xx[0] * xx[1] +
             yy[0] * yy[1]) /
                om) /
           16.0;
}

double first_lyapunov(const Vec2& x, const Params& params) {
    Params p = params;
    return first_lyapunov_generic(
        [p](const Vec2& z) { return rhs_reduced(z, p); }, x,
        [p](const Vec2& z) { return jacobian_reduced(z, p); });
}

// ---------------------------------------------------------------------------
// Hopf curve in two parameters, Bautin refinement
// ---------------------------------------------------------------------------

HopfCurve continue_hopf_curve(const Params& params, const std::string& p1,
                              const std::string& p2, const Vec2& seed_state,
                              const StepConfig& cfg) {
    Params base = params;
    const double v1 = *param_ptr(base, p1);
    const double v2 = *param_ptr(base, p2);

    const auto at = [base, p1, p2](const VecX& u) {
        Params q = base;
        *param_ptr(q, p1) = u[2];
        *param_ptr(q, p2) = u[3];
        return q;
    };

    ContinuationProblem prob;
    prob.n = 3;
    prob.F = [at](const VecX& u) -> VecX {
        const Params q = at(u);
        const Vec2 x(u[0], u[1]);
        const Vec2 f = rhs_reduced(x, q);
        const double tr = jacobian_reduced(x, q).trace();
        return (VecX(3) << f[0], f[1], tr).finished();
    };
    prob.tests.push_back({"bautin",
                          [at](const VecX& u) -> double {
                              try {
                                  return first_lyapunov(Vec2(u[0], u[1]), at(u));
                              } catch (const std::exception&) {
                                  return std::numeric_limits<double>::quiet_NaN();
                              }
                          },
                          1e-6, false});
    prob.tests.push_back({"hopf-fold-interaction",
                          [at](const VecX& u) {
                              return jacobian_reduced(Vec2(u[0], u[1]), at(u))
                                  .determinant();
                          },
                          1e-8, true});

    VecX u0(4);
    u0 << seed_state[0], seed_state[1], v1, v2;
    Branch fwd = continue_curve(prob, u0, cfg, 2, +1.0);
    Branch merged;
    if (fwd.closed) {
        merged = std::move(fwd);
    } else {
        Branch bwd = continue_curve(prob, u0, cfg, 2, -1.0);
        merged = bwd.closed ? std::move(bwd) : merge_bidirectional(bwd, fwd);
    }

    HopfCurve hc;
    hc.p1 = p1;
    hc.p2 = p2;
    for (const auto& e : merged.events) {
        if (e.kind != "bautin") continue;
        CodimTwoPoint c2;
        c2.kind = "bautin";
        c2.p1 = e.u[2];
        c2.p2 = e.u[3];
        c2.state = Vec2(e.u[0], e.u[1]);
        c2.l1 = e.test_value;
        hc.codim2.push_back(c2);
    }
    hc.branch = std::move(merged);
    return hc;
}

std::pair<Vec2, double> find_hopf(const Params& params, const std::string& free_name,
                                  double range_lo, double range_hi, int n_scan) {
    if (n_scan < 2) throw std::invalid_argument("find_hopf: n_scan must be >= 2");
    Params q = params;
    double* slot = param_ptr(q, free_name);

    struct Tracked {
        Vec2 x;
        double tr;
    };
    const auto scan = [&](double pv) {
        *slot = pv;
        std::vector<Tracked> out;
        for (const auto& eq : find_equilibria(q, default_search_box(q), 48)) {
            const Mat2 J = jacobian_reduced(eq.state, q);
            if (J.determinant() > 0) out.push_back({eq.state, J.trace()});
        }
        return out;
    };
    const auto dist = [](const Vec2& a, const Vec2& b) {
        return std::abs(a[0] - b[0]) / std::max(1.0, std::abs(a[0])) +
               std::abs(a[1] - b[1]) / std::max(1.0, std::abs(a[1]));
    };

    auto prev = scan(range_lo);
    double p_prev = range_lo;
    for (int i = 1; i < n_scan; ++i) {
        const double pv =
            range_lo + (range_hi - range_lo) * static_cast<double>(i) / (n_scan - 1);
        auto cur = scan(pv);
        for (const auto& tp : prev) {
            // nearest continuation of this equilibrium at the new parameter
            const Tracked* match = nullptr;
            double best = 0.25;
            for (const auto& tc : cur) {
                const double d = dist(tp.x, tc.x);
                if (d < best) {
                    best = d;
                    match = &tc;
                }
            }
            if (!match || tp.tr == 0 || tp.tr * match->tr >= 0) continue;

            // bisect the bracket [p_prev, pv]
            double lo = p_prev, hi = pv;
            Vec2 x_lo = tp.x;
            double tr_lo = tp.tr;
            Vec2 x_best = match->x;
            double tr_best = match->tr, p_best = pv;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                *slot = mid;
                Equilibrium eq;
                try {
                    eq = refine_equilibrium(q, x_lo);
                } catch (const std::exception&) {
                    break;
                }
                const Mat2 J = jacobian_reduced(eq.state, q);
                if (J.determinant() <= 0) break;
                const double tr = J.trace();
                if (std::abs(tr) < std::abs(tr_best)) {
                    x_best = eq.state;
                    tr_best = tr;
                    p_best = mid;
                }
                if (std::abs(tr) <= 1e-8) break;
                if (tr_lo * tr < 0) {
                    hi = mid;
                } else {
                    lo = mid;
                    x_lo = eq.state;
                    tr_lo = tr;
                }
            }
            if (std::abs(tr_best) <= 1e-8) return {x_best, p_best};
        }
        prev = std::move(cur);
        p_prev = pv;
    }
    throw std::runtime_error("find_hopf: no Hopf point of '" + free_name + "' in [" +
                             std::to_string(range_lo) + ", " + std::to_string(range_hi) +
                             "]");
}

}  // namespace biphos
