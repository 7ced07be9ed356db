#include "biphos/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "biphos/continuation.hpp"
#include "biphos/phase.hpp"
#include "biphos/rng.hpp"

namespace biphos {

void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: size must be a nonzero power of two");
    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

double fourier_peak_amplitude(
    const Trajectory& traj,
    const std::function<double(const Eigen::VectorXd&)>& observable) {
    const std::size_t m = traj.times.size();
    if (m < 16)
        throw std::invalid_argument("fourier_peak_amplitude: need at least 16 samples, got " +
                                    std::to_string(m));
    std::size_t n = 1;
    while (n * 2 <= m) n *= 2;
    const std::size_t off = m - n;  // keep the most recent samples
    std::vector<std::complex<double>> a(n);
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = observable(traj.states.row(static_cast<Eigen::Index>(off + i)));
        a[i] = std::complex<double>(v, 0.0);
        mean += v;
    }
    mean /= static_cast<double>(n);
    for (auto& z : a) z -= mean;
    fft_radix2(a);
    double best = 0;
    for (std::size_t k = 1; k <= n / 2; ++k)
        best = std::max(best, std::abs(a[k]) / static_cast<double>(n));
    return best;
}

namespace {

Vec2 default_start(const Params& p, bool prefer_stable) {
    auto eqs = find_equilibria(p);
    if (!eqs.empty()) {
        for (const auto& eq : eqs)
            if (eq.stable() == prefer_stable)
                return eq.state * 1.001 + Vec2(1e-4, 1e-4);
        return eqs.front().state * 1.001 + Vec2(1e-4, 1e-4);
    }
    return Vec2(0.6, 0.2) * p.K_c;
}

Trajectory tail_of(const Trajectory& traj, double t_from) {
    const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t_from);
    const Eigen::Index i0 = static_cast<Eigen::Index>(it - traj.times.begin());
    Trajectory out;
    out.times.assign(traj.times.begin() + i0, traj.times.end());
    out.states = traj.states.bottomRows(traj.states.rows() - i0).eval();
    out.meta = traj.meta;
    return out;
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

ResonanceCurve sr_sweep(const Params& params, std::vector<double> sigmas,
                        const ResonanceConfig& cfg, std::uint64_t base_seed,
                        std::optional<Vec2> x0) {
    if (sigmas.empty()) throw std::invalid_argument("sr_sweep: empty sigma list");
    for (std::size_t i = 0; i + 1 < sigmas.size(); ++i)
        if (!(sigmas[i] < sigmas[i + 1]))
            throw std::invalid_argument("sr_sweep: sigmas must be strictly increasing");
    if (sigmas.front() < 0) throw std::invalid_argument("sr_sweep: negative sigma");
    if (cfg.n_seeds < 1) throw std::invalid_argument("sr_sweep: n_seeds must be positive");

    const Vec2 start = x0 ? *x0 : default_start(params, /*prefer_stable=*/true);

    SolverConfig sc;
    sc.dt = cfg.dt;
    sc.t_end = cfg.t_end;
    sc.output_times = SolverConfig::uniform_grid(cfg.t_end, cfg.out_dt);
    const double t_skip = cfg.transient_frac * cfg.t_end;

    ResonanceCurve curve;
    curve.sigmas = sigmas;
    curve.config = cfg;
    curve.seed_amplitudes.resize(sigmas.size());
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        Params q = params;
        q.sigma = sigmas[i];
        const std::uint64_t sigma_seed = derive_seed(base_seed, i);
        std::vector<double> amps(static_cast<std::size_t>(cfg.n_seeds));
        for (int j = 0; j < cfg.n_seeds; ++j) {
            const Trajectory traj =
                integrate_sde(q, start, sc, derive_seed(sigma_seed, static_cast<std::uint64_t>(j)));
            amps[static_cast<std::size_t>(j)] =
                fourier_peak_amplitude(tail_of(traj, t_skip),
                                       [](const Eigen::VectorXd& s) { return s[0]; });
        }
        double mean = 0;
        for (double a : amps) mean += a;
        mean /= static_cast<double>(amps.size());
        curve.seed_amplitudes[i] = amps;
        curve.mean_amplitudes.push_back(mean);
        curve.stderrs.push_back(sample_std(amps, mean) /
                                std::sqrt(static_cast<double>(amps.size())));
    }
    return curve;
}

PeriodStats period_statistics(const Params& params, double sigma, const PeriodConfig& cfg,
                              std::uint64_t base_seed, std::optional<Vec2> x0) {
    if (cfg.n_traj < 1) throw std::invalid_argument("period_statistics: n_traj must be positive");
    if (!(cfg.down_threshold < cfg.up_threshold))
        throw std::invalid_argument("period_statistics: thresholds must satisfy down < up");

    Params q = params;
    q.sigma = sigma;
    const Vec2 start = x0 ? *x0 : default_start(q, /*prefer_stable=*/false);

    SolverConfig sc;
    sc.dt = cfg.dt;
    sc.t_end = cfg.t_end;
    sc.output_times = SolverConfig::uniform_grid(cfg.t_end, cfg.out_dt);
    const double t_skip = cfg.transient_frac * cfg.t_end;

    std::vector<double> pooled;
    for (int j = 0; j < cfg.n_traj; ++j) {
        const Trajectory traj =
            integrate_sde(q, start, sc, derive_seed(base_seed, static_cast<std::uint64_t>(j)));
        const Trajectory tail = tail_of(traj, t_skip);
        const std::vector<double> events =
            detect_crossings(tail, phospho_fraction, cfg.up_threshold, cfg.down_threshold);
        // First interval dropped: it straddles whatever phase the transient
        // cut left behind.
        for (std::size_t k = 2; k < events.size(); ++k)
            pooled.push_back(events[k] - events[k - 1]);
    }
    // Pooling order must not matter (trajectories may be generated in any
    // order by callers that parallelize); sorting pins the reduction.
    std::sort(pooled.begin(), pooled.end());

    PeriodStats stats;
    stats.n_traj = cfg.n_traj;
    stats.n_periods = static_cast<long>(pooled.size());
    if (pooled.size() < 2) return stats;  // oscillating stays false
    double mean = 0;
    for (double d : pooled) mean += d;
    mean /= static_cast<double>(pooled.size());
    stats.mean_period = mean;
    stats.cv = sample_std(pooled, mean) / mean;
    stats.oscillating = true;
    return stats;
}

std::vector<CvPoint> cv_vs_parameter(const Params& params, const std::string& free_name,
                                     const std::vector<double>& values, double sigma,
                                     const PeriodConfig& cfg, std::uint64_t base_seed, int jobs) {
    std::vector<CvPoint> out(values.size());
    parallel_for(static_cast<int>(values.size()), jobs, [&](int i) {
        Params q = params;
        *param_ptr(q, free_name) = values[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)].value = values[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)].stats = period_statistics(
            q, sigma, cfg, derive_seed(base_seed, static_cast<std::uint64_t>(i)));
    });
    return out;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace biphos
