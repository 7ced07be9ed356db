#pragma once

#include <cmath>
#include <cstdint>

namespace biphos {

/// Counter-based SplitMix64 output function: out(k) = mix64(seed + k*golden).
/// Chosen over a stateful engine so that (a) the k-th variate of a stream is
/// a pure function of (seed, k) — parallel ensembles are byte-identical to
/// serial runs — and (b) the algorithm is small enough to re-implement in any
/// language from this header alone.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Stream seed for ensemble member `index` under `base_seed`. Documented,
/// fixed mixing so any single trajectory can be regenerated in isolation.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
    return splitmix64(base_seed ^ splitmix64(index + 1));
}

/// Deterministic counter RNG with Box–Muller normal pairs.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() {
        return splitmix64(seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on (0, 1] — never 0, so log(u) below is finite.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
    }

    /// Standard normal via Box–Muller; generates pairs, caches the second.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace biphos
