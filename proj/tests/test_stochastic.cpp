#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "biphos/continuation.hpp"
#include "biphos/rng.hpp"
#include "biphos/stochastic.hpp"
#include "doctest.h"

using namespace biphos;

namespace {

constexpr double kPi = 3.14159265358979323846;

// O(n^2) reference DFT — the oracle for the fast transform.
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0;
        for (std::size_t j = 0; j < n; ++j)
            acc += a[j] * std::polar(1.0, -2.0 * kPi * double(k) * double(j) / double(n));
        out[k] = acc;
    }
    return out;
}

Trajectory sampled_signal(int n, double dt, const std::function<double(double)>& f) {
    Trajectory traj;
    traj.times.resize(static_cast<std::size_t>(n));
    traj.states.resize(n, 1);
    for (int i = 0; i < n; ++i) {
        traj.times[static_cast<std::size_t>(i)] = i * dt;
        traj.states(i, 0) = f(i * dt);
    }
    return traj;
}

const auto first_component = [](const Eigen::VectorXd& s) { return s[0]; };

}  // namespace

TEST_CASE("fft_radix2 matches a naive DFT") {
    std::vector<std::complex<double>> a(64);
    std::uint64_t s = 1;
    for (auto& z : a) {  // cheap deterministic pseudo-random fill
        s = splitmix64(s);
        const double re = double(s >> 11) / double(1ull << 53) - 0.5;
        s = splitmix64(s);
        const double im = double(s >> 11) / double(1ull << 53) - 0.5;
        z = {re, im};
    }
    const auto ref = naive_dft(a);
    auto fast = a;
    fft_radix2(fast);
    for (std::size_t k = 0; k < a.size(); ++k)
        CHECK(std::abs(fast[k] - ref[k]) <= 1e-10);
}

TEST_CASE("fft_radix2 analytic bins") {
    // Impulse: flat spectrum.
    std::vector<std::complex<double>> a(16, 0.0);
    a[0] = 1.0;
    fft_radix2(a);
    for (const auto& z : a) CHECK(std::abs(z - std::complex<double>(1.0, 0.0)) <= 1e-12);

    // Pure complex exponential at bin 3: single nonzero bin of height n.
    std::vector<std::complex<double>> b(32);
    for (std::size_t j = 0; j < b.size(); ++j)
        b[j] = std::polar(1.0, 2.0 * kPi * 3.0 * double(j) / 32.0);
    fft_radix2(b);
    for (std::size_t k = 0; k < b.size(); ++k) {
        if (k == 3)
            CHECK(std::abs(b[k] - std::complex<double>(32.0, 0.0)) <= 1e-9);
        else
            CHECK(std::abs(b[k]) <= 1e-9);
    }

    std::vector<std::complex<double>> bad(12, 0.0);
    CHECK_THROWS_AS(fft_radix2(bad), std::invalid_argument);
}

TEST_CASE("fourier_peak_amplitude scores a sinusoid at A/2") {
    // 8 whole periods across 256 samples.
    const double dt = 1.0;
    const auto traj = sampled_signal(256, dt, [](double t) {
        return 0.7 * std::sin(2.0 * kPi * 8.0 * t / 256.0);
    });
    CHECK(fourier_peak_amplitude(traj, first_component) == doctest::Approx(0.35).epsilon(1e-12));

    // Mean offsets do not leak into the peak.
    const auto shifted = sampled_signal(256, dt, [](double t) {
        return 5.3 + 0.7 * std::sin(2.0 * kPi * 8.0 * t / 256.0);
    });
    CHECK(fourier_peak_amplitude(shifted, first_component) ==
          doctest::Approx(0.35).epsilon(1e-12));

    // Grid refinement of the same signal leaves the score unchanged.
    const auto fine = sampled_signal(1024, 0.25, [](double t) {
        return 0.7 * std::sin(2.0 * kPi * 8.0 * t / 256.0);
    });
    CHECK(fourier_peak_amplitude(fine, first_component) ==
          doctest::Approx(0.35).epsilon(1e-9));
}

TEST_CASE("fourier_peak_amplitude truncates to the most recent samples") {
    // 300 samples: only the last 256 form whole periods of the sinusoid;
    // the leading 44 samples are a large constant that would wreck the
    // spectrum if the head of the series were kept.
    Trajectory traj;
    traj.times.resize(300);
    traj.states.resize(300, 1);
    for (int i = 0; i < 300; ++i) {
        traj.times[static_cast<std::size_t>(i)] = i;
        if (i < 44)
            traj.states(i, 0) = 40.0;
        else
            traj.states(i, 0) = 0.7 * std::sin(2.0 * kPi * 8.0 * double(i - 44) / 256.0);
    }
    CHECK(fourier_peak_amplitude(traj, first_component) == doctest::Approx(0.35).epsilon(1e-9));

    Trajectory tiny = sampled_signal(15, 1.0, [](double t) { return t; });
    CHECK_THROWS_AS(fourier_peak_amplitude(tiny, first_component), std::invalid_argument);
}

TEST_CASE("derive_seed separates indices and bases") {
    std::vector<std::uint64_t> seen;
    for (std::uint64_t b : {1ull, 2ull, 999ull})
        for (std::uint64_t i = 0; i < 20; ++i) seen.push_back(derive_seed(b, i));
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("sr_sweep input validation") {
    Params p;
    ResonanceConfig cfg;
    cfg.t_end = 20;
    CHECK_THROWS_AS(sr_sweep(p, {}, cfg, 1), std::invalid_argument);
    CHECK_THROWS_AS(sr_sweep(p, {1e-3, 1e-3}, cfg, 1), std::invalid_argument);
    CHECK_THROWS_AS(sr_sweep(p, {1e-2, 1e-3}, cfg, 1), std::invalid_argument);
    CHECK_THROWS_AS(sr_sweep(p, {-1e-3, 1e-2}, cfg, 1), std::invalid_argument);
}

TEST_CASE("sr_sweep is reproducible bit for bit") {
    Params p;
    p.K_c = 4.2;
    p.tau = 0.5;
    ResonanceConfig cfg;
    cfg.t_end = 60;
    cfg.dt = 2e-3;
    cfg.out_dt = 0.1;
    cfg.n_seeds = 3;
    const std::vector<double> sigmas = {1e-3, 1e-2, 1e-1};
    const auto a = sr_sweep(p, sigmas, cfg, 777);
    const auto b = sr_sweep(p, sigmas, cfg, 777);
    REQUIRE(a.mean_amplitudes.size() == 3);
    REQUIRE(a.seed_amplitudes.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.mean_amplitudes[i] == b.mean_amplitudes[i]);  // bitwise
        CHECK(a.stderrs[i] == b.stderrs[i]);
        REQUIRE(a.seed_amplitudes[i].size() == 3);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(a.seed_amplitudes[i][j] == b.seed_amplitudes[i][j]);
        CHECK(std::isfinite(a.mean_amplitudes[i]));
        CHECK(a.mean_amplitudes[i] >= 0.0);
    }
    // A different base seed moves the amplitudes.
    const auto c = sr_sweep(p, sigmas, cfg, 778);
    bool any_diff = false;
    for (std::size_t i = 0; i < 3; ++i)
        if (c.mean_amplitudes[i] != a.mean_amplitudes[i]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("period_statistics without noise reproduces the deterministic cycle") {
    Params p;  // reference oscillation
    const auto cyc = cycle_from_simulation(p);
    REQUIRE(cyc.has_value());

    PeriodConfig cfg;
    cfg.t_end = 400.0 + 20.0 * cyc->T;
    cfg.n_traj = 3;  // sigma = 0: every trajectory is identical
    const auto stats = period_statistics(p, 0.0, cfg, 42);
    REQUIRE(stats.oscillating);
    CHECK(stats.n_traj == 3);
    CHECK(stats.n_periods >= 30);
    CHECK(std::abs(stats.mean_period - cyc->T) / cyc->T <= 0.02);
    CHECK(stats.cv <= 5e-3);  // fixed-step integration jitter only
}

TEST_CASE("period_statistics reports no oscillation past the window") {
    Params p;
    p.K_c = 6.0;  // stable equilibrium, no cycle
    PeriodConfig cfg;
    cfg.t_end = 300;
    cfg.n_traj = 2;
    const auto stats = period_statistics(p, 0.0, cfg, 42);
    CHECK(!stats.oscillating);
    CHECK(stats.n_periods < 2);
}

TEST_CASE("period statistics obey the model's time-rescaling symmetry") {
    // Scaling all rates by s and time by 1/s maps trajectories onto each
    // other; for the Euler-Maruyama scheme the map is exact when dt scales
    // along and sigma scales by sqrt(s), because the same normal draws are
    // consumed in the same order. Periods must halve at s = 2 with the CV
    // unchanged.
    Params p;
    p.sigma = 0.0;  // sigma comes in through the argument below
    const double s = 2.0;
    Params q = p;
    q.k_vn *= s;
    q.k_vcy *= s;
    q.k_nt *= s;
    q.tau /= s;

    PeriodConfig base;
    base.t_end = 500;
    base.dt = 1e-3;
    base.out_dt = 0.05;
    base.n_traj = 4;
    PeriodConfig scaled = base;
    scaled.t_end = base.t_end / s;
    scaled.dt = base.dt / s;
    scaled.out_dt = base.out_dt / s;

    const double sigma = 0.01;
    const auto s0 = period_statistics(p, sigma, base, 9001);
    const auto s1 = period_statistics(q, sigma * std::sqrt(s), scaled, 9001);
    REQUIRE(s0.oscillating);
    REQUIRE(s1.oscillating);
    CHECK(s0.n_periods == s1.n_periods);
    // sigma * sqrt(dt) rounds differently under the scaling, so the runs
    // track each other to phase-diffusion accuracy rather than bitwise.
    CHECK(s1.mean_period == doctest::Approx(s0.mean_period / s).epsilon(1e-6));
    CHECK(s1.cv == doctest::Approx(s0.cv).epsilon(1e-6));
}

TEST_CASE("cv_vs_parameter: thread count does not change results") {
    Params p;
    PeriodConfig cfg;
    cfg.t_end = 250;
    cfg.n_traj = 2;
    const std::vector<double> values = {2.4, 2.75, 3.1};
    const double sigma = 0.01;
    const auto serial = cv_vs_parameter(p, "K_c", values, sigma, cfg, 31337, 1);
    const auto threaded = cv_vs_parameter(p, "K_c", values, sigma, cfg, 31337, 3);
    REQUIRE(serial.size() == 3);
    REQUIRE(threaded.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(serial[i].value == values[i]);
        CHECK(serial[i].stats.mean_period == threaded[i].stats.mean_period);  // bitwise
        CHECK(serial[i].stats.cv == threaded[i].stats.cv);
        CHECK(serial[i].stats.n_periods == threaded[i].stats.n_periods);
    }
    // Each point equals a direct call with that point's derived seed.
    Params q = p;
    q.K_c = values[1];
    const auto direct = period_statistics(q, sigma, cfg, derive_seed(31337, 1));
    CHECK(direct.mean_period == serial[1].stats.mean_period);
    CHECK(direct.cv == serial[1].stats.cv);
}

TEST_CASE("parallel_for covers every index exactly once and rethrows") {
    std::vector<std::atomic<int>> hits(257);
    for (auto& h : hits) h = 0;
    parallel_for(257, 4, [&](int i) { ++hits[static_cast<std::size_t>(i)]; });
    for (const auto& h : hits) CHECK(h.load() == 1);

    parallel_for(0, 4, [](int) { throw std::logic_error("never called"); });

    CHECK_THROWS_AS(parallel_for(8, 3,
                                 [](int i) {
                                     if (i == 5) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}
