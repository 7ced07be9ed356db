#include "biphos/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "biphos/rng.hpp"

namespace biphos {

std::vector<double> SolverConfig::uniform_grid(double t_end, double out_dt) {
    std::vector<double> ts;
    const long n = std::lround(t_end / out_dt);
    ts.reserve(n + 1);
    for (long i = 0; i <= n; ++i) ts.push_back(i * out_dt);
    if (ts.back() < t_end) ts.push_back(t_end);
    return ts;
}

namespace {

// Shared adaptive-run driver: integrates and collects samples either on the
// requested grid (dense interpolation) or at natural steps.
template <class State, class Rhs>
Trajectory run_adaptive(Rhs&& rhs, const State& x0, const SolverConfig& cfg,
                        const char* solver_name) {
    cfg.validate();
    Trajectory out;
    out.meta.solver = solver_name;
    out.meta.rel_tol = cfg.rel_tol;
    out.meta.abs_tol = cfg.abs_tol;

    std::vector<double> ts;
    std::vector<State> xs;
    ts.push_back(0.0);
    xs.push_back(x0);

    OdeRunStats stats;
    if (cfg.output_times) {
        const auto& grid = *cfg.output_times;
        std::size_t next = 0;
        while (next < grid.size() && grid[next] <= 0.0) ++next;  // t=0 already stored
        stats = dopri5<State>(
            rhs, 0.0, x0, cfg.t_end, cfg.rel_tol, cfg.abs_tol, cfg.max_steps,
            [&](double, double t_new, const State& y_new, const DenseSegment<State>& seg) {
                while (next < grid.size() && grid[next] <= t_new) {
                    ts.push_back(grid[next]);
                    xs.push_back(grid[next] == t_new ? y_new : seg.eval(grid[next]));
                    ++next;
                }
                return true;
            });
    } else {
        stats = dopri5<State>(
            rhs, 0.0, x0, cfg.t_end, cfg.rel_tol, cfg.abs_tol, cfg.max_steps,
            [&](double, double t_new, const State& y_new, const DenseSegment<State>&) {
                ts.push_back(t_new);
                xs.push_back(y_new);
                return true;
            });
    }
    if (stats.status == OdeStatus::max_steps_exceeded)
        throw std::runtime_error("integrate_ode: max_steps exceeded");
    if (stats.status == OdeStatus::step_underflow)
        throw std::runtime_error("integrate_ode: step size underflow (stiffness?)");

    out.meta.n_accepted = stats.n_accepted;
    out.meta.n_rejected = stats.n_rejected;
    out.times = std::move(ts);
    out.states.resize(static_cast<long>(out.times.size()), x0.size());
    for (std::size_t i = 0; i < out.times.size(); ++i)
        out.states.row(static_cast<long>(i)) = xs[i].transpose();
    return out;
}

}  // namespace

Trajectory integrate_ode(const RhsXd& rhs, const Eigen::VectorXd& x0,
                         const SolverConfig& cfg) {
    return run_adaptive<Eigen::VectorXd>(
        [&](double t, const Eigen::VectorXd& y) { return rhs(t, y); }, x0, cfg,
        "dopri5");
}

Trajectory integrate_reduced(const Params& p, const Vec2& x0, const SolverConfig& cfg) {
    p.validate();
    return run_adaptive<Vec2>(
        [&p](double, const Vec2& y) { return rhs_reduced(y, p); }, x0, cfg, "dopri5");
}

Trajectory integrate_full(const Params& p, const Vec7& x0, const SolverConfig& cfg) {
    p.validate();
    return run_adaptive<Vec7>(
        [&p](double, const Vec7& y) { return rhs_full(y, p); }, x0, cfg, "dopri5");
}

Trajectory integrate_sde(const Params& p, const Vec2& x0, const SolverConfig& cfg,
                         std::uint64_t seed) {
    p.validate();
    cfg.validate();
    Trajectory out;
    out.meta.solver = "euler-maruyama";
    out.meta.dt = cfg.dt;
    out.meta.stochastic = true;
    out.meta.seed = seed;

    CounterRng rng(seed);
    const double sqdt = std::sqrt(cfg.dt);
    const long n_steps = std::lround(cfg.t_end / cfg.dt);

    // Sampling grid: requested times or every step.
    std::vector<double> grid;
    if (cfg.output_times) grid = *cfg.output_times;

    std::vector<double> ts;
    std::vector<Vec2> xs;
    ts.reserve(grid.empty() ? n_steps + 1 : grid.size() + 1);

    Vec2 x = x0;
    double t = 0.0;
    std::size_t next = 0;
    auto store_initial = [&] {
        if (grid.empty()) {
            ts.push_back(0.0);
            xs.push_back(x);
        } else {
            while (next < grid.size() && grid[next] <= 0.0) {
                ts.push_back(grid[next]);
                xs.push_back(x);
                ++next;
            }
        }
    };
    store_initial();

    bool was_negative = (x[0] < 0.0 || x[1] < 0.0);
    if (was_negative) out.meta.negative_excursions = 1;

    for (long k = 0; k < n_steps && (k < cfg.max_steps); ++k) {
        const Vec2 prev = x;
        const double t_prev = t;
        Vec2 dx = rhs_reduced(x, p) * cfg.dt;
        if (p.sigma > 0.0) {
            dx[0] += p.sigma * sqdt * rng.next_normal();
            dx[1] += p.sigma * sqdt * rng.next_normal();
        }
        x += dx;
        t = (k + 1) * cfg.dt;

        const bool negative = (x[0] < 0.0 || x[1] < 0.0);
        if (negative && !was_negative) ++out.meta.negative_excursions;
        was_negative = negative;

        if (grid.empty()) {
            ts.push_back(t);
            xs.push_back(x);
        } else {
            while (next < grid.size() && grid[next] <= t) {
                const double th = (grid[next] - t_prev) / cfg.dt;
                ts.push_back(grid[next]);
                xs.push_back(prev + th * (x - prev));
                ++next;
            }
        }
        ++out.meta.n_accepted;
    }

    out.times = std::move(ts);
    out.states.resize(static_cast<long>(out.times.size()), 2);
    for (std::size_t i = 0; i < out.times.size(); ++i)
        out.states.row(static_cast<long>(i)) = xs[i].transpose();
    return out;
}

std::vector<double> detect_crossings(const std::vector<double>& times,
                                     const std::vector<double>& series,
                                     double up_threshold, double down_threshold) {
    if (!(up_threshold > down_threshold))
        throw std::invalid_argument("detect_crossings: need up_threshold > down_threshold");
    if (times.size() != series.size())
        throw std::invalid_argument("detect_crossings: length mismatch");
    std::vector<double> events;
    bool armed = false;  // arm only after the series has been below the band
    for (std::size_t i = 1; i < series.size(); ++i) {
        if (!armed && series[i] < down_threshold) armed = true;
        if (armed && series[i - 1] < up_threshold && series[i] >= up_threshold) {
            const double f =
                (up_threshold - series[i - 1]) / (series[i] - series[i - 1]);
            events.push_back(times[i - 1] + f * (times[i] - times[i - 1]));
            armed = false;
        }
    }
    return events;
}

std::vector<double> detect_crossings(
    const Trajectory& traj, const std::function<double(const Eigen::VectorXd&)>& observable,
    double up_threshold, double down_threshold) {
    std::vector<double> series(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        series[i] = observable(traj.states.row(static_cast<long>(i)).transpose());
    return detect_crossings(traj.times, series, up_threshold, down_threshold);
}

double phospho_fraction(const Eigen::VectorXd& state) {
    const double total = state[0] + state[1];
    return total > 0.0 ? state[1] / total : 0.0;
}

}  // namespace biphos
