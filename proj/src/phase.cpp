#include "biphos/phase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace biphos {

const char* to_string(EqKind k) {
    switch (k) {
        case EqKind::stable_node: return "stable-node";
        case EqKind::stable_focus: return "stable-focus";
        case EqKind::unstable_node: return "unstable-node";
        case EqKind::unstable_focus: return "unstable-focus";
        case EqKind::saddle: return "saddle";
    }
    return "?";
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::unique_stable_eq: return "unique-stable-eq";
        case Regime::unique_stable_cycle: return "unique-stable-cycle";
        case Regime::cycle_eq_coexistence: return "cycle-eq-coexistence";
        case Regime::bistable_equilibria: return "bistable-equilibria";
        case Regime::indeterminate: return "indeterminate";
    }
    return "?";
}

namespace {

Vec2 from_phase(double total, double frac) {
    return Vec2(total * (1.0 - frac), total * frac);
}

// All frac-roots of RHS component `which` at fixed total, |residual| <= 1e-8.
std::vector<double> component_roots(const Params& p, int which, double total,
                                    int grid = 512) {
    auto g = [&](double frac) { return rhs_reduced(from_phase(total, frac), p)[which]; };
    std::vector<double> roots;
    double prev_f = 0.0, prev_g = g(0.0);
    for (int i = 1; i <= grid; ++i) {
        const double f = static_cast<double>(i) / grid;
        const double gf = g(f);
        if (prev_g == 0.0) {
            roots.push_back(prev_f);
        } else if (prev_g * gf < 0.0) {
            double a = prev_f, b = f, ga = prev_g;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double gm = g(mid);
                if (std::abs(gm) <= 1e-9 * std::max(1.0, std::abs(total)) || b - a < 1e-15)
                    { a = b = mid; break; }
                if (ga * gm < 0.0) b = mid;
                else { a = mid; ga = gm; }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_f = f;
        prev_g = gf;
    }
    if (prev_g == 0.0) roots.push_back(1.0);
    return roots;
}

// Nearest-frac linking of per-column roots into polyline components.
// A root continues the open component whose last frac is nearest within
// link_tol; everything else closes/opens components (so folds split).
std::vector<NullclinePolyline> link_columns(
    int which, const std::vector<double>& totals,
    const std::vector<std::vector<double>>& cols, double link_tol) {
    struct Open {
        NullclinePolyline line;
        double last_frac;
    };
    std::vector<Open> open;
    std::vector<NullclinePolyline> done;

    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& roots = cols[c];
        std::vector<bool> root_used(roots.size(), false);
        std::vector<bool> line_used(open.size(), false);

        // Greedy nearest pairing, smallest gaps first.
        struct Cand { double d; std::size_t line, root; };
        std::vector<Cand> cands;
        for (std::size_t l = 0; l < open.size(); ++l)
            for (std::size_t r = 0; r < roots.size(); ++r)
                cands.push_back({std::abs(open[l].last_frac - roots[r]), l, r});
        std::sort(cands.begin(), cands.end(),
                  [](const Cand& a, const Cand& b) { return a.d < b.d; });
        for (const auto& cd : cands) {
            if (cd.d > link_tol || line_used[cd.line] || root_used[cd.root]) continue;
            line_used[cd.line] = root_used[cd.root] = true;
            open[cd.line].line.points.push_back({totals[c], roots[cd.root]});
            open[cd.line].last_frac = roots[cd.root];
        }
        // Close unmatched lines, open new components for unmatched roots.
        std::vector<Open> still_open;
        for (std::size_t l = 0; l < open.size(); ++l) {
            if (line_used[l]) still_open.push_back(std::move(open[l]));
            else done.push_back(std::move(open[l].line));
        }
        open = std::move(still_open);
        for (std::size_t r = 0; r < roots.size(); ++r) {
            if (root_used[r]) continue;
            Open o;
            o.line.which = which;
            o.line.points.push_back({totals[c], roots[r]});
            o.last_frac = roots[r];
            open.push_back(std::move(o));
        }
    }
    for (auto& o : open) done.push_back(std::move(o.line));
    return done;
}

EqKind classify(const Mat2& J, std::complex<double>& l1, std::complex<double>& l2) {
    const double tr = J.trace();
    const double det = J.determinant();
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        l1 = 0.5 * (tr + s);
        l2 = 0.5 * (tr - s);
    } else {
        const double w = 0.5 * std::sqrt(-disc);
        l1 = {0.5 * tr, w};
        l2 = {0.5 * tr, -w};
    }
    if (det < 0.0) return EqKind::saddle;
    if (tr < 0.0) return disc >= 0.0 ? EqKind::stable_node : EqKind::stable_focus;
    return disc >= 0.0 ? EqKind::unstable_node : EqKind::unstable_focus;
}

}  // namespace

NullclineSet trace_nullclines(const Params& p, double total_lo, double total_hi,
                              int n_total) {
    p.validate();
    if (!(total_lo > 0) || !(total_hi > total_lo))
        throw std::invalid_argument("trace_nullclines: need 0 < total_lo < total_hi");
    if (n_total < 2) throw std::invalid_argument("trace_nullclines: n_total >= 2");

    std::vector<double> totals(n_total);
    for (int i = 0; i < n_total; ++i)
        totals[i] = total_lo + (total_hi - total_lo) * i / (n_total - 1);

    NullclineSet out;
    for (int which = 0; which < 2; ++which) {
        std::vector<std::vector<double>> cols(totals.size());
        for (std::size_t i = 0; i < totals.size(); ++i)
            cols[i] = component_roots(p, which, totals[i]);
        auto comps = link_columns(which, totals, cols, /*link_tol=*/0.1);
        (which == 0 ? out.c_no : out.c_nop) = std::move(comps);
    }
    return out;
}

int max_roots_per_total(const NullclineSet& ncs, int which) {
    // Count, per total value, how many components pass through it.
    const auto& comps = which == 0 ? ncs.c_no : ncs.c_nop;
    std::vector<double> totals;
    for (const auto& c : comps)
        for (const auto& pt : c.points) totals.push_back(pt.total);
    std::sort(totals.begin(), totals.end());
    int best = 0, run = 0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (double t : totals) {
        run = (t == prev) ? run + 1 : 1;
        prev = t;
        best = std::max(best, run);
    }
    return best;
}

SearchBox default_search_box(const Params& p) {
    // The conserved pool caps total concentration at 1/A_cyto; beyond it the
    // cytosolic concentration (1 - A_cyto*total) turns negative and the model
    // grows spurious roots with no physical meaning.
    return SearchBox{1e-8, 1.0 / p.A_cyto, 0.0, 1.0};
}

Equilibrium refine_equilibrium(const Params& p, const Vec2& guess) {
    Vec2 x = guess;
    double res = rhs_reduced(x, p).norm();
    for (int it = 0; it < 60 && res > 1e-13; ++it) {
        const Mat2 J = jacobian_reduced(x, p);
        const Vec2 f = rhs_reduced(x, p);
        Vec2 step = J.fullPivLu().solve(-f);
        // damped update: accept the first halving that reduces the residual
        double lambda = 1.0;
        Vec2 x_new = x + step;
        double res_new = rhs_reduced(x_new, p).norm();
        for (int h = 0; h < 40 && !(res_new < res); ++h) {
            lambda *= 0.5;
            x_new = x + lambda * step;
            res_new = rhs_reduced(x_new, p).norm();
        }
        if (!(res_new < res)) break;
        x = x_new;
        res = res_new;
    }
    if (!(res <= 1e-10))
        throw std::runtime_error("refine_equilibrium: Newton did not reach residual 1e-10");
    Equilibrium eq;
    eq.state = x;
    eq.residual = res;
    eq.kind = classify(jacobian_reduced(x, p), eq.lambda1, eq.lambda2);
    return eq;
}

std::vector<Equilibrium> find_equilibria(const Params& p, const SearchBox& box,
                                         int grid_n) {
    p.validate();
    if (!(box.total_lo >= 0) || !(box.frac_lo >= 0))
        throw std::invalid_argument("find_equilibria: box must lie in the nonnegative quadrant");

    std::vector<Vec2> seeds;

    // Grid cells where both RHS components change sign among the corners.
    {
        const int n = std::max(grid_n, 8);
        std::vector<std::vector<Vec2>> fvals(n + 1, std::vector<Vec2>(n + 1));
        auto total_at = [&](int i) {
            return box.total_lo + (box.total_hi - box.total_lo) * i / n;
        };
        auto frac_at = [&](int j) {
            return box.frac_lo + (box.frac_hi - box.frac_lo) * j / n;
        };
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j)
                fvals[i][j] = rhs_reduced(from_phase(total_at(i), frac_at(j)), p);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                bool change[2];
                for (int c = 0; c < 2; ++c) {
                    const double a = fvals[i][j][c], b = fvals[i + 1][j][c];
                    const double d = fvals[i][j + 1][c], e = fvals[i + 1][j + 1][c];
                    const double lo = std::min({a, b, d, e}), hi = std::max({a, b, d, e});
                    change[c] = (lo <= 0.0 && hi >= 0.0);
                }
                if (change[0] && change[1])
                    seeds.push_back(from_phase(0.5 * (total_at(i) + total_at(i + 1)),
                                               0.5 * (frac_at(j) + frac_at(j + 1))));
            }
        }
    }

    // Scalar total-balance seeds: at equilibrium the summed RHS fixes
    // c_nop(total); scan the remaining 1-D residual for sign changes.
    {
        const double D = p.A_cyto * (p.k_vn + p.k_vcy);
        auto c_nop_of = [&](double T) {
            const double denom = p.k_nt * (1.0 - p.A_cyto * T);
            return denom != 0.0 ? (p.k_vn - D * T) / denom
                                : std::numeric_limits<double>::quiet_NaN();
        };
        auto h = [&](double T) {
            const double cp = c_nop_of(T);
            if (!std::isfinite(cp)) return std::numeric_limits<double>::quiet_NaN();
            return rhs_reduced(Vec2(T - cp, cp), p)[1];
        };
        const int n = 1024;
        const double lo = std::max(box.total_lo, 1e-9);
        double prev_t = lo, prev_h = h(lo);
        for (int i = 1; i <= n; ++i) {
            const double T = lo + (box.total_hi - lo) * i / n;
            const double hT = h(T);
            if (std::isfinite(prev_h) && std::isfinite(hT) && prev_h * hT < 0.0) {
                double a = prev_t, b = T, ha = prev_h;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (a + b);
                    const double hm = h(mid);
                    if (ha * hm < 0.0) b = mid;
                    else { a = mid; ha = hm; }
                }
                const double T0 = 0.5 * (a + b);
                const double cp = c_nop_of(T0);
                const double frac = T0 > 0 ? cp / T0 : 0.0;
                if (frac >= box.frac_lo - 1e-9 && frac <= box.frac_hi + 1e-9)
                    seeds.push_back(Vec2(T0 - cp, cp));
            }
            prev_t = T;
            prev_h = hT;
        }
    }

    std::vector<Equilibrium> found;
    for (const auto& s : seeds) {
        Equilibrium eq;
        try {
            eq = refine_equilibrium(p, s);
        } catch (const std::runtime_error&) {
            continue;  // grid redundancy compensates for dropped seeds
        }
        const double total = eq.total();
        const double frac = eq.frac();
        if (total < box.total_lo - 1e-9 || total > box.total_hi + 1e-9) continue;
        if (frac < box.frac_lo - 1e-9 || frac > box.frac_hi + 1e-9) continue;
        if (eq.state[0] < -1e-12 || eq.state[1] < -1e-12) continue;
        bool dup = false;
        for (const auto& e : found)
            if ((e.state - eq.state).norm() < 1e-6) { dup = true; break; }
        if (!dup) found.push_back(eq);
    }
    std::sort(found.begin(), found.end(), [](const Equilibrium& a, const Equilibrium& b) {
        return a.total() < b.total();
    });
    return found;
}

std::vector<Equilibrium> find_equilibria(const Params& p) {
    return find_equilibria(p, default_search_box(p));
}

namespace {

struct OscillationCheck {
    bool oscillating = false;
    bool settled_to_eq = false;
    Vec2 final_state;
};

OscillationCheck probe_behavior(const Params& p, const Vec2& probe, double t_transient,
                                double t_observe,
                                const std::vector<Equilibrium>& eqs) {
    SolverConfig cfg;
    cfg.rel_tol = 1e-8;
    cfg.abs_tol = 1e-11;
    cfg.t_end = t_transient;
    Trajectory pre = integrate_reduced(p, probe, cfg);
    const Vec2 x1 = pre.states.row(pre.states.rows() - 1).transpose();

    cfg.t_end = t_observe;
    Trajectory obs = integrate_reduced(p, x1, cfg);
    const auto c_no = obs.states.col(0);

    OscillationCheck out;
    out.final_state = obs.states.row(obs.states.rows() - 1).transpose();

    const double amp = c_no.maxCoeff() - c_no.minCoeff();
    // amplitude over the trailing quarter: a decaying spiral has regular
    // peak spacing too, so sustained oscillation requires the tail to keep
    // most of the overall swing
    double tail_max = -std::numeric_limits<double>::infinity();
    double tail_min = std::numeric_limits<double>::infinity();
    const double t_tail = obs.times.back() - 0.25 * t_observe;
    for (long i = 0; i < c_no.size(); ++i) {
        if (obs.times[static_cast<std::size_t>(i)] >= t_tail) {
            tail_max = std::max(tail_max, c_no[i]);
            tail_min = std::min(tail_min, c_no[i]);
        }
    }
    const double amp_tail = tail_max - tail_min;
    if (amp > 1e-3 && amp_tail > std::max(1e-3, 0.5 * amp)) {
        // peak times of c_no; periodic if successive inter-peak gaps agree to 5%
        std::vector<double> peaks;
        for (long i = 1; i + 1 < c_no.size(); ++i)
            if (c_no[i] > c_no[i - 1] && c_no[i] >= c_no[i + 1])
                peaks.push_back(obs.times[static_cast<std::size_t>(i)]);
        if (peaks.size() >= 3) {
            bool periodic = true;
            for (std::size_t i = 2; i < peaks.size(); ++i) {
                const double d1 = peaks[i - 1] - peaks[i - 2];
                const double d2 = peaks[i] - peaks[i - 1];
                if (std::abs(d2 - d1) > 0.05 * std::max(d1, d2)) { periodic = false; break; }
            }
            out.oscillating = periodic;
        }
    }
    if (!out.oscillating) {
        for (const auto& e : eqs)
            if (e.stable() && (out.final_state - e.state).norm() < 1e-3)
                out.settled_to_eq = true;
    }
    return out;
}

}  // namespace

std::vector<Vec2> default_probes(const Params& p, const std::vector<Equilibrium>& eqs) {
    std::vector<Vec2> probes;
    for (const auto& e : eqs) {
        const double r = 0.02 * std::max(1.0, e.total());
        probes.push_back(e.state + Vec2(r, r));
        probes.push_back(e.state + Vec2(-r, r));
    }
    if (probes.empty()) probes.push_back(Vec2(0.5 * p.K_c, 0.1 * p.K_c));
    return probes;
}

Regime classify_regime(const Params& p, const std::vector<Vec2>& probes,
                       double t_transient, double t_observe) {
    if (probes.empty()) throw std::invalid_argument("classify_regime: probes must be nonempty");
    const auto eqs = find_equilibria(p);
    int n_stable = 0;
    for (const auto& e : eqs)
        if (e.stable()) ++n_stable;

    bool any_osc = false;
    bool any_settled = false;
    std::size_t n_failed = 0;
    for (const auto& probe : probes) {
        OscillationCheck b;
        try {
            b = probe_behavior(p, probe, t_transient, t_observe, eqs);
        } catch (const std::exception&) {
            ++n_failed;  // probe integration blew up; the others still count
            continue;
        }
        any_osc |= b.oscillating;
        any_settled |= b.settled_to_eq;
    }
    if (n_failed == probes.size()) return Regime::indeterminate;

    if (any_osc && n_stable >= 1) return Regime::cycle_eq_coexistence;
    if (any_osc) return Regime::unique_stable_cycle;
    if (n_stable >= 2) return Regime::bistable_equilibria;
    if (n_stable == 1) return Regime::unique_stable_eq;
    // no oscillation witnessed and no stable equilibrium: probes disagree
    // with the equilibrium analysis (long transient or missed attractor)
    (void)any_settled;
    return Regime::indeterminate;
}

}  // namespace biphos
