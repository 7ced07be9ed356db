// Acceptance harness: one self-contained check per shipped claim, one
// [PASS]/[FAIL] line each, exit code = number of failures. Where a check
// carries a wall-clock budget the elapsed time is enforced, so a pass here
// certifies both the result and its cost.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "biphos/continuation.hpp"
#include "biphos/csv.hpp"
#include "biphos/integrate.hpp"
#include "biphos/model.hpp"
#include "biphos/phase.hpp"
#include "biphos/rng.hpp"
#include "biphos/stochastic.hpp"

using namespace biphos;

namespace {

int g_failures = 0;

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <class... A>
std::string fmt(const char* f, A... a) {
    char buf[768];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

using Result = std::pair<bool, std::string>;

// budget_s <= 0: no budget to enforce.
void run_criterion(int id, double budget_s, const std::function<Result()>& fn) {
    const double t0 = now_s();
    bool pass = false;
    std::string detail;
    try {
        auto r = fn();
        pass = r.first;
        detail = r.second;
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("exception: ") + e.what();
    }
    const double elapsed = now_s() - t0;
    if (budget_s > 0) {
        detail += fmt(" [%.1f s of %.0f s budget]", elapsed, budget_s);
        if (elapsed > budget_s) {
            pass = false;
            detail += " BUDGET EXCEEDED";
        }
    } else {
        detail += fmt(" [%.1f s]", elapsed);
    }
    std::printf("[%s] AC%d -- %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

// ---------------------------------------------------------------------------
// Shared state between related criteria
// ---------------------------------------------------------------------------

std::optional<Trajectory> g_full_traj;  // AC1 -> AC2

// AC12 -> AC14
struct SrRun {
    Params params;
    std::vector<double> sigmas;
    ResonanceConfig cfg;
    std::uint64_t seed = 0;
    std::string csv;
};
std::optional<SrRun> g_sr_run;

// AC13 -> AC14
struct PeriodRun {
    Params params;
    double sigma = 0;
    PeriodConfig cfg;
    std::uint64_t seed = 0;
    std::string csv;
};
std::optional<PeriodRun> g_period_run;

Trajectory run_full_reference() {
    Params p;
    const Vec7 x0 = make_consistent_full_state(0.6 * p.K_c, 0.2 * p.K_c, p,
                                               /*c_ni=*/0.3, /*Phi=*/1.2,
                                               /*V_cyto=*/2.0);
    SolverConfig cfg;
    cfg.rel_tol = 1e-9;
    cfg.abs_tol = 1e-12;
    cfg.t_end = 100.0;
    cfg.output_times = SolverConfig::uniform_grid(100.0, 0.1);
    return integrate_full(p, x0, cfg);
}

std::string sr_csv(const ResonanceCurve& rc) {
    CsvWriter w({"sigma", "mean_amplitude", "stderr"});
    for (std::size_t i = 0; i < rc.sigmas.size(); ++i)
        w.add_row({rc.sigmas[i], rc.mean_amplitudes[i], rc.stderrs[i]});
    return w.str();
}

std::string period_csv(double param, const PeriodStats& st) {
    CsvWriter w({"param", "mean_period", "cv", "n_periods"});
    if (st.oscillating)
        w.add_row_raw({format_double(param), format_double(st.mean_period),
                       format_double(st.cv), std::to_string(st.n_periods)});
    else
        w.add_row_raw({format_double(param), "nan", "nan",
                       std::to_string(st.n_periods)});
    return w.str();
}

// ---------------------------------------------------------------------------
// AC1 / AC2: physical-manifold invariants of the growth system
// ---------------------------------------------------------------------------

Result ac1() {
    g_full_traj = run_full_reference();
    const auto& tr = *g_full_traj;
    double worst = 0;
    for (Eigen::Index i = 0; i < tr.states.rows(); ++i) {
        const double sum = tr.states(i, C_NO) + tr.states(i, C_NOP) + tr.states(i, C_CY);
        worst = std::max(worst, std::abs(sum * Params{}.A_cyto - 1.0));
    }
    const bool ok = worst <= 1e-6;
    return {ok, fmt("conserved-sum drift over t in [0,100]: max |sum*A_cyto - 1| = %.3e "
                    "(<= 1e-6)", worst)};
}

Result ac2() {
    if (!g_full_traj) g_full_traj = run_full_reference();
    const auto& tr = *g_full_traj;
    double worst = 0;
    for (Eigen::Index i = 0; i < tr.states.rows(); ++i) {
        const double phi = tr.states(i, PHI);
        const double ratio = tr.states(i, V_N) / tr.states(i, V_CYTO);
        worst = std::max(worst, std::abs(phi - ratio) / phi);
    }
    const bool ok = worst <= 1e-6;
    return {ok, fmt("volume-ratio consistency: max |Phi - V_n/V_cyto|/Phi = %.3e (<= 1e-6)",
                    worst)};
}

// ---------------------------------------------------------------------------
// AC3: analytic Jacobian against central differences
// ---------------------------------------------------------------------------

Result ac3() {
    Params p;
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> U(0.0, 1.5);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const Vec2 x(U(rng) * p.K_c, U(rng) * p.K_c);
        const Mat2 Ja = jacobian_reduced(x, p);
        Mat2 Jf;
        for (int j = 0; j < 2; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
            Vec2 xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            Jf.col(j) = (rhs_reduced(xp, p) - rhs_reduced(xm, p)) / (2 * h);
        }
        worst = std::max(worst, (Ja - Jf).norm() / std::max(1.0, Ja.norm()));
    }
    return {worst <= 1e-5,
            fmt("analytic vs central-difference Jacobian at 100 random states: "
                "max relative error %.3e (<= 1e-5)", worst)};
}

// ---------------------------------------------------------------------------
// AC4: certificates + side simulations for every detected Hopf point
// ---------------------------------------------------------------------------

struct HopfAudit {
    int n_events = 0;
    double worst_tr = 0;
    std::string issues;
};

HopfAudit audit_hopf_slice(double tau) {
    HopfAudit audit;
    Params p;
    p.tau = tau;
    const Branch br = continue_equilibrium(p, "K_c", 0.5, 6.0, StepConfig{});
    for (const auto& ev : br.events) {
        if (ev.kind != "hopf") continue;
        ++audit.n_events;
        const Vec2 x(ev.u[0], ev.u[1]);
        const double K = ev.u[2];
        Params q = p;
        q.K_c = K;
        const Mat2 J = jacobian_reduced(x, q);
        const double tr = J.trace(), det = J.determinant();
        audit.worst_tr = std::max(audit.worst_tr, std::abs(tr));
        if (std::abs(tr) > 1e-8)
            audit.issues += fmt(" [K=%.4f |tr|=%.1e]", K, std::abs(tr));
        if (!(det > 0)) audit.issues += fmt(" [K=%.4f det=%.1e<=0]", K, det);

        // 1% to each side: the branch's own stability flags tell the
        // simulation what it must see there.
        for (const int side : {-1, +1}) {
            Params qq = p;
            qq.K_c = K * (1.0 + 0.01 * side);
            const auto eqs = find_equilibria(qq);
            if (eqs.empty()) {
                audit.issues += fmt(" [K=%.4f side %+d: no equilibrium]", K, side);
                continue;
            }
            const auto nearest =
                std::min_element(eqs.begin(), eqs.end(),
                                 [&](const Equilibrium& a, const Equilibrium& b) {
                                     return (a.state - x).norm() < (b.state - x).norm();
                                 });
            const std::size_t below = ev.after_point;
            const std::size_t above = std::min(ev.after_point + 1, br.points.size() - 1);
            const bool expect_stable =
                side < 0 ? br.points[below].stable : br.points[above].stable;

            const double re = std::max(nearest->lambda1.real(), nearest->lambda2.real());
            const double t_obs =
                std::clamp(1.75 / std::max(std::abs(re), 1e-4), 100.0, 8000.0);
            const double d0 = 1e-4 * std::max(1.0, nearest->state.norm());
            const Vec2 x0 = nearest->state + d0 / std::sqrt(2.0) * Vec2(1.0, 1.0);
            SolverConfig cfg;
            cfg.rel_tol = 1e-9;
            cfg.abs_tol = 1e-12;
            cfg.t_end = t_obs;
            cfg.output_times = {t_obs};
            const auto traj = integrate_reduced(qq, x0, cfg);
            const Vec2 xf(traj.states(traj.states.rows() - 1, 0),
                          traj.states(traj.states.rows() - 1, 1));
            const double d1 = (xf - nearest->state).norm();
            const bool decayed = d1 <= 0.5 * d0;
            const bool grew = d1 >= 2.0 * d0 || d1 >= 1e-2;
            if (expect_stable && !decayed)
                audit.issues += fmt(" [K=%.4f side %+d: expected decay, d1/d0=%.2f]",
                                    K, side, d1 / d0);
            if (!expect_stable && !grew)
                audit.issues += fmt(" [K=%.4f side %+d: expected onset, d1/d0=%.2f]",
                                    K, side, d1 / d0);
        }
    }
    return audit;
}

Result ac4() {
    const HopfAudit slow = audit_hopf_slice(0.5);
    const HopfAudit fast = audit_hopf_slice(60.0);
    const bool counts_ok = slow.n_events == 2 && fast.n_events == 2;
    const bool ok = counts_ok && slow.issues.empty() && fast.issues.empty();
    std::string detail =
        fmt("%d Hopf events (tau=0.5: %d, tau=60: %d), worst |tr J| = %.2e; "
            "1%% side simulations consistent with branch stability",
            slow.n_events + fast.n_events, slow.n_events, fast.n_events,
            std::max(slow.worst_tr, fast.worst_tr));
    if (!slow.issues.empty() || !fast.issues.empty())
        detail += ";" + slow.issues + fast.issues;
    return {ok, detail};
}

// ---------------------------------------------------------------------------
// AC5: first-Lyapunov sign oracle on the cubic normal form
// ---------------------------------------------------------------------------

Result ac5() {
    auto make_rhs = [](double a) {
        return [a](const Vec2& z) {
            const double r2 = z[0] * z[0] + z[1] * z[1];
            return Vec2(-z[1] + a * z[0] * r2, z[0] + a * z[1] * r2);
        };
    };
    double worst_err = 0;
    bool signs_ok = true;
    for (const double a : {-1.0, -0.1, 0.1, 1.0}) {
        const double l1 = first_lyapunov_generic(make_rhs(a), Vec2(0, 0));
        if (!(l1 * a > 0)) signs_ok = false;
        worst_err = std::max(worst_err, std::abs(l1 - a));
    }
    const double l1_zero = first_lyapunov_generic(make_rhs(0.0), Vec2(0, 0));
    const bool ok = signs_ok && std::abs(l1_zero) <= 1e-6;
    return {ok, fmt("sign(l1) = sign(a) for a in {-1,-0.1,0.1,1} with max |l1 - a| = %.1e; "
                    "|l1| = %.1e at a = 0 (<= 1e-6)", worst_err, std::abs(l1_zero))};
}

// ---------------------------------------------------------------------------
// AC6 / AC7: the closed Hopf curve in (tau, K_c), its Bautin pair, and the
// monotone shrinkage of the enclosed area with the transport rate
// ---------------------------------------------------------------------------

HopfCurve trace_bell(double k_nt) {
    Params p;
    p.k_nt = k_nt;
    std::optional<std::pair<Vec2, double>> seed;
    double tau_seed = 0;
    for (const double tau : {5.0, 2.0, 10.0, 1.0, 20.0}) {
        Params q = p;
        q.tau = tau;
        try {
            seed = find_hopf(q, "K_c", 0.2, 12.0);
            tau_seed = tau;
            break;
        } catch (const std::exception&) {
        }
    }
    if (!seed) throw std::runtime_error(fmt("no Hopf seed found at k_nt = %g", k_nt));
    Params q = p;
    q.tau = tau_seed;
    q.K_c = seed->second;
    StepConfig cfg;
    return continue_hopf_curve(q, "tau", "K_c", seed->first, cfg);
}

double polygon_area(const Branch& br) {
    double twice = 0;
    const std::size_t n = br.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = br.points[i].u;
        const auto& b = br.points[(i + 1) % n].u;
        twice += a[2] * b[3] - b[2] * a[3];
    }
    return std::abs(twice) / 2.0;
}

Result ac6() {
    const HopfCurve hc = trace_bell(0.1);
    const bool closed = hc.branch.closed;
    int n_bautin = 0;
    bool taus_ok = true;
    std::string taus;
    for (const auto& c2 : hc.codim2) {
        if (c2.kind != "bautin") continue;
        ++n_bautin;
        taus += fmt(" tau=%.2f(l1=%.1e)", c2.p1, c2.l1);
        if (!(c2.p1 >= 20.0 && c2.p1 <= 60.0)) taus_ok = false;
    }
    const bool ok = closed && n_bautin == 2 && taus_ok;
    return {ok, fmt("Hopf curve in (tau, K_c): closed=%s, %d points, %d Bautin points%s "
                    "(need exactly 2, each tau in [20,60])",
                    closed ? "yes" : "no", int(hc.branch.points.size()), n_bautin,
                    taus.c_str())};
}

Result ac7() {
    const std::vector<double> knts = {0.05, 0.1, 0.2, 0.4};
    std::vector<double> areas;
    std::string detail = "enclosed areas:";
    bool all_closed = true;
    for (const double k : knts) {
        const HopfCurve hc = trace_bell(k);
        if (!hc.branch.closed) all_closed = false;
        areas.push_back(polygon_area(hc.branch));
        detail += fmt(" k_nt=%.2f -> %.1f;", k, areas.back());
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < areas.size(); ++i)
        if (!(areas[i] < areas[i - 1])) decreasing = false;
    return {all_closed && decreasing,
            detail + (decreasing ? " strictly decreasing" : " NOT strictly decreasing")};
}

// ---------------------------------------------------------------------------
// AC8: the three-regime ordering along increasing K_c
// ---------------------------------------------------------------------------

Result ac8() {
    struct Expect {
        double K;
        Regime regime;
        int frac_side;  // +1: fraction > 0.5, -1: fraction < 0.5, 0: no check
    };
    const std::vector<Expect> plan = {{1.0, Regime::unique_stable_eq, +1},
                                      {2.75, Regime::unique_stable_cycle, 0},
                                      {4.2, Regime::unique_stable_eq, -1}};
    std::string detail;
    bool ok = true;
    for (const auto& e : plan) {
        Params p;
        p.K_c = e.K;
        const auto eqs = find_equilibria(p);
        const Regime r = classify_regime(p, default_probes(p, eqs), 200.0, 150.0);
        detail += fmt(" K_c=%.2f -> %s", e.K, to_string(r));
        if (r != e.regime) ok = false;
        if (e.frac_side != 0) {
            if (eqs.size() != 1) {
                ok = false;
                detail += fmt(" (%d equilibria, expected 1)", int(eqs.size()));
            } else {
                const double f = eqs.front().frac();
                detail += fmt(" (fraction %.2f)", f);
                if (e.frac_side > 0 && !(f > 0.5)) ok = false;
                if (e.frac_side < 0 && !(f < 0.5)) ok = false;
            }
        }
        detail += ";";
    }
    return {ok, "sweep at tau=0.01:" + detail};
}

// ---------------------------------------------------------------------------
// AC9: onset dichotomy — amplitude jump below the Bautin range, square-root
// growth above it
// ---------------------------------------------------------------------------

Result ac9() {
    // Subcritical slice: amplitude 1% inside the window.
    Params ps;
    ps.tau = 10.0;
    const auto [x_s, K_s] = find_hopf(ps, "K_c", 0.5, 6.0);
    Params qs = ps;
    qs.K_c = K_s * 1.01;
    const auto sub_cycle = cycle_from_simulation(qs, std::nullopt, 6000.0);
    if (!sub_cycle)
        return {false, fmt("no settled oscillation 1%% inside the window at tau=10 "
                           "(K_c=%.4f)", qs.K_c)};
    const double amp_sub = sub_cycle->amplitude;

    // Supercritical slice: amplitude at the matching relative offset.
    Params pS;
    pS.tau = 60.0;
    const auto [x_S, K_S] = find_hopf(pS, "K_c", 2.0, 3.2);
    const auto sup_cycle = cycle_near_hopf(pS, "K_c", K_S, x_S, 0.01 * K_S);
    if (!sup_cycle)
        return {false, fmt("no cycle 1%% past the supercritical onset (tau=60, "
                           "K_c=%.4f)", K_S * 1.01)};
    const double amp_sup = sup_cycle->amplitude;
    const double jump_ratio = amp_sub / amp_sup;

    // Square-root law: log-log slope over a dyadic ladder of offsets.
    std::vector<double> ldp, lamp;
    std::string pts;
    for (const double rel : {0.002, 0.004, 0.008, 0.016}) {
        const auto c = cycle_near_hopf(pS, "K_c", K_S, x_S, rel * K_S);
        if (!c) continue;
        ldp.push_back(std::log(rel));
        lamp.push_back(std::log(c->amplitude));
        pts += fmt(" (%.3f,%.3e)", rel, c->amplitude);
    }
    if (ldp.size() < 3)
        return {false, "fewer than 3 near-onset cycles converged for the slope fit" + pts};
    const std::size_t n = ldp.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += ldp[i];
        my += lamp[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (ldp[i] - mx) * (lamp[i] - my);
        sxx += (ldp[i] - mx) * (ldp[i] - mx);
    }
    const double slope = sxy / sxx;

    const bool ok = jump_ratio >= 10.0 && slope >= 0.4 && slope <= 0.6;
    return {ok, fmt("onset amplitudes at 1%%: subcritical (tau=10) %.3f vs supercritical "
                    "(tau=60) %.4f, ratio %.1f (>= 10); supercritical log-log slope %.3f "
                    "(in [0.4, 0.6])", amp_sub, amp_sup, jump_ratio, slope)};
}

// ---------------------------------------------------------------------------
// AC10: coexisting stable/unstable cycle segments joined at a fold of cycles
// ---------------------------------------------------------------------------

Result ac10() {
    Params p;
    p.tau = 10.0;
    const auto [x_h, K_h] = find_hopf(p, "K_c", 0.5, 6.0);
    (void)x_h;
    // Approach the fold along the stable relaxation branch (the small
    // unstable cycle born at the Hopf point cannot be continued through the
    // canard regime, where its multiplier explodes within an exponentially
    // thin parameter window).
    Params q = p;
    q.K_c = K_h + 0.05;
    const auto seed = cycle_from_simulation(q, std::nullopt, 2000.0);
    if (!seed)
        return {false, fmt("no stable cycle found at K_c=%.4f to seed the branch",
                           q.K_c)};
    const CycleBranch cb =
        continue_cycle(q, "K_c", K_h - 1.2, K_h + 0.6, *seed, StepConfig{});

    const BranchEvent* fold = nullptr;
    for (const auto& ev : cb.events)
        if (ev.kind == "cycle-fold") fold = &ev;
    if (!fold)
        return {false, fmt("no fold of cycles on the branch (%d points, termination %s)",
                           int(cb.points.size()), cb.termination.c_str())};

    int n_coexist = 0;
    for (const auto& a : cb.points) {
        if (!(a.cycle.mu > 1.0)) continue;  // unstable only (NaN mu excluded)
        for (const auto& b : cb.points)
            if (b.cycle.stable() && std::abs(a.param - b.param) < 0.01 * K_h) {
                ++n_coexist;
                break;
            }
    }
    const bool ok = std::abs(fold->test_value) <= 1e-6 && n_coexist >= 3;
    return {ok, fmt("fold of cycles at K_c=%.4f with |mu - 1| = %.1e (<= 1e-6); "
                    "%d unstable points paired with a stable point at the same "
                    "parameter (within 1%%)",
                    fold->u[3], std::abs(fold->test_value), n_coexist)};
}

// ---------------------------------------------------------------------------
// AC11: bistability of equilibria
// ---------------------------------------------------------------------------

Result ac11() {
    auto count = [](const Params& p) {
        const auto eqs = find_equilibria(p);
        int stable = 0;
        for (const auto& e : eqs)
            if (e.stable()) ++stable;
        return std::make_pair(int(eqs.size()), stable);
    };
    Params paper;
    paper.K_c = 14.2;
    paper.tau = 5.0;
    paper.k_nt = 0.00397;
    const auto [n0, s0] = count(paper);
    if (n0 == 3 && s0 == 2)
        return {true, std::string("3 equilibria (2 stable, 1 unstable) at K_c=14.2, "
                                  "tau=5, k_nt=0.00397")};

    // The calibrated kinetics shift the bistable window; the documented
    // fallback segment keeps the triple.
    Params fb;
    fb.K_c = 26.0;
    fb.tau = 5.0;
    fb.k_nt = 0.0025;
    const auto [n1, s1] = count(fb);
    const bool ok = n1 == 3 && s1 == 2;
    return {ok, fmt("historical point gives %d equilibria (%d stable); documented "
                    "fallback segment K_c=26, tau=5, k_nt=0.0025 gives %d (%d stable, "
                    "need 3 with 2 stable)", n0, s0, n1, s1)};
}

// ---------------------------------------------------------------------------
// AC12: stochastic resonance just past the oscillatory window
// ---------------------------------------------------------------------------

Result ac12() {
    // Reference cycle period just inside the window sets the horizon.
    Params pin;
    pin.tau = 0.5;
    pin.K_c = 3.8;
    const auto ref = cycle_from_simulation(pin, std::nullopt, 400.0);
    const double T_cyc = ref ? ref->T : 16.0;

    SrRun run;
    run.params = Params{};
    run.params.tau = 0.5;
    run.params.K_c = 4.2;  // just past the deterministic window
    run.sigmas = {1e-4, 3.16e-4, 1e-3, 3.16e-3, 1e-2, 3.16e-2, 1e-1, 3.16e-1, 1.0};
    run.cfg.t_end = std::max(400.0, 25.0 * T_cyc);
    run.cfg.dt = 1e-3;
    run.cfg.out_dt = 0.05;
    run.cfg.transient_frac = 0.2;
    run.cfg.n_seeds = 10;
    run.seed = 20240915;

    const ResonanceCurve rc = sr_sweep(run.params, run.sigmas, run.cfg, run.seed);
    run.csv = sr_csv(rc);
    g_sr_run = run;

    const auto& amp = rc.mean_amplitudes;
    const std::size_t i_peak = static_cast<std::size_t>(
        std::max_element(amp.begin(), amp.end()) - amp.begin());
    const bool interior = i_peak > 0 && i_peak + 1 < amp.size();
    const double sigma_star = rc.sigmas[i_peak];
    const bool in_decade = sigma_star >= 1e-3 && sigma_star <= 1e-1;
    const double gain = amp[i_peak] / amp.front();
    const bool tail_drops = amp.back() <= 0.8 * amp[i_peak];
    const bool ok = interior && in_decade && gain >= 3.0 && tail_drops;
    return {ok, fmt("amplitude peaks at sigma = %.2g (interior: %s, within a decade of "
                    "1e-2: %s), gain over sigma -> 0 baseline %.1fx (>= 3), tail %.2f "
                    "of peak (<= 0.8); horizon %.0f covering >= 20 cycles of T = %.1f",
                    sigma_star, interior ? "yes" : "no", in_decade ? "yes" : "no", gain,
                    amp.back() / amp[i_peak], run.cfg.t_end, T_cyc)};
}

// ---------------------------------------------------------------------------
// AC13: period robustness dichotomy at sigma = 0.01
// ---------------------------------------------------------------------------

struct SliceCv {
    std::vector<double> positions;
    std::vector<double> cvs;
    std::string note;
    bool all_oscillating = true;
};

SliceCv slice_cv(double tau, double hopf_lo, double hopf_hi, const PeriodConfig& base_cfg,
                 std::uint64_t seed_base, PeriodRun* capture) {
    SliceCv out;
    Params p;
    p.tau = tau;
    const auto [xl, Kl] = find_hopf(p, "K_c", hopf_lo, hopf_hi);
    const auto [xr, Kr] = find_hopf(p, "K_c", Kl + 0.05, hopf_hi);
    out.note = fmt("window (%.3f, %.3f)", Kl, Kr);
    const std::vector<double> fs = {0.3, 0.5, 0.7};
    for (std::size_t i = 0; i < fs.size(); ++i) {
        Params q = p;
        q.K_c = Kl + fs[i] * (Kr - Kl);

        // Thresholds from the deterministic envelope at this position, so the
        // hysteresis band scales with the local oscillation.
        PeriodConfig cfg = base_cfg;
        const auto det = cycle_from_simulation(q, std::nullopt, tau >= 30 ? 4000.0 : 600.0);
        if (det) {
            SolverConfig sc;
            sc.rel_tol = 1e-9;
            sc.abs_tol = 1e-12;
            sc.t_end = 2.5 * det->T;
            sc.output_times = SolverConfig::uniform_grid(sc.t_end, det->T / 400.0);
            const auto orbit = integrate_reduced(q, det->anchor, sc);
            double fmin = 1e9, fmax = -1e9;
            for (Eigen::Index r = 0; r < orbit.states.rows(); ++r) {
                const double f = phospho_fraction(orbit.states.row(r).transpose());
                fmin = std::min(fmin, f);
                fmax = std::max(fmax, f);
            }
            cfg.down_threshold = fmin + 0.3 * (fmax - fmin);
            cfg.up_threshold = fmin + 0.7 * (fmax - fmin);
        }

        const std::uint64_t seed = derive_seed(seed_base, i);
        const PeriodStats st = period_statistics(q, 0.01, cfg, seed);
        if (!st.oscillating) out.all_oscillating = false;
        out.positions.push_back(fs[i]);
        out.cvs.push_back(st.cv);
        out.note += fmt(" f=%.1f: CV=%.3f (n=%ld)", fs[i], st.cv, st.n_periods);
        if (capture && i == 1) {
            capture->params = q;
            capture->sigma = 0.01;
            capture->cfg = cfg;
            capture->seed = seed;
            capture->csv = period_csv(q.K_c, st);
        }
    }
    return out;
}

Result ac13() {
    PeriodConfig sub_cfg;
    sub_cfg.t_end = 400.0;
    sub_cfg.dt = 1e-3;
    sub_cfg.out_dt = 0.05;
    sub_cfg.n_traj = 50;

    PeriodConfig sup_cfg;
    sup_cfg.dt = 0.01;
    sup_cfg.out_dt = 0.25;
    sup_cfg.n_traj = 50;
    Params mid;
    mid.tau = 60.0;
    mid.K_c = 2.65;
    const auto ref = cycle_from_simulation(mid, std::nullopt, 4000.0);
    sup_cfg.t_end = std::max(3000.0, 30.0 * (ref ? ref->T : 100.0));

    PeriodRun capture;
    const SliceCv sub = slice_cv(0.5, 0.5, 6.0, sub_cfg, 91001, &capture);
    g_period_run = capture;
    const SliceCv sup = slice_cv(60.0, 2.0, 3.2, sup_cfg, 92001, nullptr);

    bool ok = sub.all_oscillating && sup.all_oscillating;
    for (const double cv : sub.cvs)
        if (!(cv < 0.1)) ok = false;
    for (const double cv : sup.cvs)
        if (!(cv >= 0.1 && cv <= 0.5)) ok = false;
    for (std::size_t i = 0; i < sub.cvs.size() && i < sup.cvs.size(); ++i)
        if (!(sub.cvs[i] < sup.cvs[i])) ok = false;
    return {ok, "subcritical tau=0.5 " + sub.note + " (all < 0.1) | supercritical tau=60 " +
                    sup.note + " (all in [0.1, 0.5], each above the matched subcritical CV)"};
}

// ---------------------------------------------------------------------------
// AC14: bitwise reproducibility of the stochastic runs above
// ---------------------------------------------------------------------------

Result ac14() {
    if (!g_sr_run) {
        SrRun run;  // fallback if AC12 crashed before caching its run
        run.params.tau = 0.5;
        run.params.K_c = 4.2;
        run.sigmas = {1e-3, 1e-2};
        run.cfg.t_end = 60;
        run.cfg.n_seeds = 2;
        run.seed = 20240915;
        run.csv = sr_csv(sr_sweep(run.params, run.sigmas, run.cfg, run.seed));
        g_sr_run = run;
    }
    const ResonanceCurve again =
        sr_sweep(g_sr_run->params, g_sr_run->sigmas, g_sr_run->cfg, g_sr_run->seed);
    const bool sr_same = sr_csv(again) == g_sr_run->csv;

    if (!g_period_run) {
        PeriodRun run;
        run.params.tau = 0.5;  // fallback if AC13 crashed before caching
        run.sigma = 0.01;
        run.cfg.t_end = 150;
        run.cfg.n_traj = 2;
        run.seed = 91001;
        run.csv = period_csv(run.params.K_c,
                             period_statistics(run.params, run.sigma, run.cfg, run.seed));
        g_period_run = run;
    }
    const PeriodStats st = period_statistics(g_period_run->params, g_period_run->sigma,
                                             g_period_run->cfg, g_period_run->seed);
    const bool pd_same = period_csv(g_period_run->params.K_c, st) == g_period_run->csv;

    return {sr_same && pd_same,
            fmt("noise sweep rerun: %s (%d bytes); period run rerun: %s (%d bytes)",
                sr_same ? "byte-identical" : "DIFFERS", int(g_sr_run->csv.size()),
                pd_same ? "byte-identical" : "DIFFERS", int(g_period_run->csv.size()))};
}

}  // namespace

int main() {
    std::printf("acceptance: calibrated defaults, one line per criterion\n");
    run_criterion(1, 1.0, ac1);
    run_criterion(2, 0.0, ac2);
    run_criterion(3, 1.0, ac3);
    run_criterion(4, 0.0, ac4);
    run_criterion(5, 1.0, ac5);
    run_criterion(6, 120.0, ac6);
    run_criterion(7, 600.0, ac7);
    run_criterion(8, 60.0, ac8);
    run_criterion(9, 300.0, ac9);
    run_criterion(10, 300.0, ac10);
    run_criterion(11, 30.0, ac11);
    run_criterion(12, 300.0, ac12);
    run_criterion(13, 600.0, ac13);
    run_criterion(14, 0.0, ac14);
    std::printf("acceptance: %d of 14 criteria passed\n", 14 - g_failures);
    return g_failures;
}
