#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "biphos/model.hpp"
#include "biphos/params.hpp"

namespace biphos {

struct SolverConfig {
    double rel_tol = 1e-9;   // deterministic local error, relative part
    double abs_tol = 1e-12;  // deterministic local error, absolute part
    double dt = 1e-3;        // fixed stochastic step
    double t_end = 100.0;
    long max_steps = 100'000'000;
    /// When set, the trajectory is sampled here (dense output / interpolation)
    /// instead of at the solver's natural accepted steps.
    std::optional<std::vector<double>> output_times;

    void validate() const {
        if (!(rel_tol > 0) || !(abs_tol > 0))
            throw std::invalid_argument("SolverConfig: tolerances must be > 0");
        if (!(dt > 0)) throw std::invalid_argument("SolverConfig: dt must be > 0");
        if (!(t_end > 0)) throw std::invalid_argument("SolverConfig: t_end must be > 0");
    }

    /// Uniform grid 0..t_end with step `out_dt` (includes both endpoints).
    static std::vector<double> uniform_grid(double t_end, double out_dt);
};

/// Time-stamped samples of one run plus provenance (solver, tolerances or
/// step, seed for stochastic runs, negative-excursion count).
struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd states;  // one row per time, one column per component

    struct Meta {
        std::string solver;
        double rel_tol = 0, abs_tol = 0;  // deterministic runs
        double dt = 0;                    // stochastic runs
        bool stochastic = false;
        std::uint64_t seed = 0;           // meaningful iff stochastic
        long negative_excursions = 0;     // entries into {some component < 0}
        long n_accepted = 0;
        long n_rejected = 0;
    } meta;

    Eigen::VectorXd column(int j) const { return states.col(j); }
};

// ---------------------------------------------------------------------------
// Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) with 4th-order dense
// output, templated on the state type so fixed-size systems run without
// allocation. The observer sees every accepted step together with a dense
// segment and may stop the integration early.
// ---------------------------------------------------------------------------

enum class OdeStatus { ok, stopped_by_observer, max_steps_exceeded, step_underflow };

template <class State>
struct DenseSegment {
    double t0 = 0, h = 0;
    State r1, r2, r3, r4, r5;

    /// Interpolated state at t in [t0, t0+h] (4th-order accurate).
    State eval(double t) const {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
    }
};

struct OdeRunStats {
    long n_accepted = 0;
    long n_rejected = 0;
    OdeStatus status = OdeStatus::ok;
};

/// Integrate dy/dt = rhs(t, y) from (t0, y0) to t_end.
/// Observer: bool(double t_prev, double t_new, const State& y_new,
///                const DenseSegment<State>& seg); return false to stop.
template <class State, class Rhs, class Obs>
OdeRunStats dopri5(Rhs&& rhs, double t0, State y, double t_end,
                   double rel_tol, double abs_tol, long max_steps, Obs&& obs) {
    // Dormand-Prince 5(4) tableau.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                     a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432.0,
                     d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0,
                     d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0,
                     d7 = 69997945.0 / 29380423.0;

    OdeRunStats stats;
    if (t_end <= t0) return stats;
    double t = t0;
    State k1 = rhs(t, y);

    const auto err_norm = [&](const State& y0, const State& y1, const State& yerr) {
        double acc = 0;
        for (int i = 0; i < y0.size(); ++i) {
            const double sc =
                abs_tol + rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            const double q = yerr[i] / sc;
            acc += q * q;
        }
        return std::sqrt(acc / static_cast<double>(y0.size()));
    };

    // Initial step heuristic (order-aware two-sample estimate).
    double h;
    {
        double d0 = 0, dd1 = 0;
        for (int i = 0; i < y.size(); ++i) {
            const double sc = abs_tol + rel_tol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            dd1 += (k1[i] / sc) * (k1[i] / sc);
        }
        d0 = std::sqrt(d0);
        dd1 = std::sqrt(dd1);
        double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
        h0 = std::min(h0, t_end - t0);
        State y1 = y + h0 * k1;
        State f1 = rhs(t + h0, y1);
        double d2 = 0;
        for (int i = 0; i < y.size(); ++i) {
            const double sc = abs_tol + rel_tol * std::abs(y[i]);
            const double q = (f1[i] - k1[i]) / sc;
            d2 += q * q;
        }
        d2 = std::sqrt(d2) / h0;
        const double dmax = std::max(dd1, d2);
        const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                        : std::pow(0.01 / dmax, 0.2);
        h = std::min({100.0 * h0, h1, t_end - t0});
    }

    constexpr double safe = 0.9, fac_min = 0.2, fac_max = 10.0, beta = 0.04;
    constexpr double expo1 = 0.2 - beta * 0.75;
    double facold = 1e-4;
    bool rejected_last = false;
    State k2 = k1, k3 = k1, k4 = k1, k5 = k1, k6 = k1, k7 = k1, ynew = y, yerr = y;

    while (t < t_end) {
        if (stats.n_accepted + stats.n_rejected >= max_steps) {
            stats.status = OdeStatus::max_steps_exceeded;
            return stats;
        }
        if (!(t + h > t)) {
            stats.status = OdeStatus::step_underflow;
            return stats;
        }
        bool last = false;
        if (t + h >= t_end) {
            h = t_end - t;
            last = true;
        }

        k2 = rhs(t + c2 * h, y + h * (a21 * k1));
        k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        k7 = rhs(t + h, ynew);  // FSAL
        yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double err = err_norm(y, ynew, yerr);
        const double fac11 = std::pow(std::max(err, 1e-32), expo1);
        if (err <= 1.0) {
            // accepted: hand the dense segment to the observer
            DenseSegment<State> seg;
            seg.t0 = t;
            seg.h = h;
            seg.r1 = y;
            seg.r2 = ynew - y;
            seg.r3 = h * k1 - seg.r2;
            seg.r4 = seg.r2 - h * k7 - seg.r3;
            seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

            ++stats.n_accepted;
            const double t_new = last ? t_end : t + h;
            if (!obs(t, t_new, ynew, seg)) {
                stats.status = OdeStatus::stopped_by_observer;
                return stats;
            }
            facold = std::max(err, 1e-4);
            double fac = fac11 / std::pow(facold, beta);
            fac = std::max(1.0 / fac_max, std::min(1.0 / fac_min, fac / safe));
            double hnew = h / fac;
            if (rejected_last) hnew = std::min(hnew, h);
            rejected_last = false;
            t = t_new;
            y = ynew;
            k1 = k7;
            h = hnew;
        } else {
            ++stats.n_rejected;
            rejected_last = true;
            h = h / std::min(1.0 / fac_min, fac11 / safe);
        }
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Trajectory-producing front ends
// ---------------------------------------------------------------------------

using RhsXd = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

/// Adaptive integration of an arbitrary (small, dense) system; samples at
/// cfg.output_times via dense output, else at the natural accepted steps.
Trajectory integrate_ode(const RhsXd& rhs, const Eigen::VectorXd& x0,
                         const SolverConfig& cfg);

/// The reduced (c_no, c_nop) system under `p`.
Trajectory integrate_reduced(const Params& p, const Vec2& x0, const SolverConfig& cfg);

/// The seven-component growth system under `p`.
Trajectory integrate_full(const Params& p, const Vec7& x0, const SolverConfig& cfg);

/// Euler-Maruyama on the reduced system with additive noise sigma on both
/// components: x_{k+1} = x_k + f(x_k) dt + sigma sqrt(dt) xi_k. Identical
/// (x0, cfg, params, seed) give bitwise-identical output. sigma = 0
/// reproduces the deterministic fixed-step Euler path exactly. States may go
/// negative; excursions are counted in meta, not clamped (the propensity
/// evaluation clamps internally where powers demand it).
Trajectory integrate_sde(const Params& p, const Vec2& x0, const SolverConfig& cfg,
                         std::uint64_t seed);

/// Schmitt-trigger event extraction: upward crossings of `up_threshold`,
/// re-armed only after the observable drops below `down_threshold`; event
/// times linearly interpolated between samples. The trigger starts disarmed,
/// so a series that begins above the band yields its first event only after
/// one full excursion below.
std::vector<double> detect_crossings(const std::vector<double>& times,
                                     const std::vector<double>& series,
                                     double up_threshold, double down_threshold);

/// Convenience overload applying `observable` to each trajectory row.
std::vector<double> detect_crossings(
    const Trajectory& traj, const std::function<double(const Eigen::VectorXd&)>& observable,
    double up_threshold, double down_threshold);

/// Phosphorylated fraction c_nop/(c_no+c_nop) of a reduced-state row; the
/// period-extraction observable. Returns 0 at total <= 0.
double phospho_fraction(const Eigen::VectorXd& state);

}  // namespace biphos
