#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "biphos/integrate.hpp"
#include "biphos/params.hpp"

namespace biphos {

/// In-place radix-2 decimation-in-time FFT; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a);

/// Maximal Fourier amplitude of an observable along a uniformly sampled
/// trajectory: the series is truncated to the largest power of two <= its
/// length (keeping the most recent samples), mean-subtracted (no taper),
/// transformed, and the maximum of
/// |X_k| / n over strictly positive frequencies is returned — so a pure
/// sinusoid of amplitude A sampled over whole periods scores A/2, and the
/// value is invariant to refining the sampling grid of a fixed signal.
/// Throws std::invalid_argument below 16 samples.
double fourier_peak_amplitude(
    const Trajectory& traj,
    const std::function<double(const Eigen::VectorXd&)>& observable);

struct ResonanceConfig {
    double t_end = 400.0;         // horizon per trajectory
    double dt = 1e-3;             // Euler-Maruyama step
    double out_dt = 0.05;         // uniform sampling handed to the FFT
    double transient_frac = 0.2;  // discard t < transient_frac * t_end
    int n_seeds = 10;
};

struct ResonanceCurve {
    std::vector<double> sigmas;           // strictly increasing
    std::vector<double> mean_amplitudes;  // mean over seeds, one per sigma
    std::vector<double> stderrs;          // standard error of that mean
    std::vector<std::vector<double>> seed_amplitudes;  // [sigma][seed]
    ResonanceConfig config;
};

/// Noise sweep of the maximal Fourier amplitude of c_no: for each sigma,
/// n_seeds independent SDE runs from x0 (default: the stable equilibrium,
/// falling back to a mid-box state), transient skipped, amplitudes averaged.
/// Seeds: derive_seed(derive_seed(base_seed, sigma_index), seed_index), so
/// the curve is reproducible bit-for-bit and extending n_seeds keeps the
/// earlier members. Throws if sigmas is empty or not strictly increasing.
ResonanceCurve sr_sweep(const Params& params, std::vector<double> sigmas,
                        const ResonanceConfig& cfg, std::uint64_t base_seed,
                        std::optional<Vec2> x0 = std::nullopt);

struct PeriodStats {
    double mean_period = 0;
    double cv = 0;  // std dev / mean of the pooled inter-event intervals
    long n_periods = 0;
    int n_traj = 0;
    bool oscillating = false;  // at least 2 pooled intervals
};

struct PeriodConfig {
    double t_end = 2000.0;
    double dt = 1e-3;
    double out_dt = 0.05;
    double transient_frac = 0.2;
    double up_threshold = 0.6;  // hysteresis band on the phosphorylated fraction
    double down_threshold = 0.4;
    int n_traj = 50;
};

/// Pooled oscillation-period statistics at one parameter point: n_traj SDE
/// runs (seed j = derive_seed(base_seed, j)), events from the hysteresis
/// trigger on the phosphorylated fraction after the transient, first
/// interval of every trajectory discarded, remaining intervals pooled
/// (sorted for order-independence) into mean and CV. Fewer than 2 pooled
/// intervals is a no-oscillation result (oscillating = false), not an error.
PeriodStats period_statistics(const Params& params, double sigma,
                              const PeriodConfig& cfg, std::uint64_t base_seed,
                              std::optional<Vec2> x0 = std::nullopt);

struct CvPoint {
    double value = 0;
    PeriodStats stats;
};

/// period_statistics mapped over parameter values (derived seed per value),
/// parallel over values when jobs > 1 with identical output either way.
std::vector<CvPoint> cv_vs_parameter(const Params& params, const std::string& free_name,
                                     const std::vector<double>& values, double sigma,
                                     const PeriodConfig& cfg, std::uint64_t base_seed,
                                     int jobs = 1);

/// Index-parallel worker pool: runs fn(0..n-1) on up to `jobs` threads.
/// Deterministic overall output is the caller's contract: fn(i) must write
/// only to slot i of preallocated storage. Rethrows the first exception.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

}  // namespace biphos
