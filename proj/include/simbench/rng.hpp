#pragma once

#include <cstdint>
#include <cstddef>

namespace simbench {

/// Purpose tags used when deriving sub-stream seeds, so that draws consumed
/// for one purpose (e.g. coefficient sampling) can never shift the stream of
/// another (e.g. observation noise). Values are part of the reproducibility
/// contract and must not be renumbered.
enum class SeedPurpose : std::uint64_t {
    CoefficientDraw = 1, // DGP parameter sampling
    NoiseDraw       = 2, // per-observation simulation noise
    InitialState    = 3, // initial-history jitter
    ModelInit       = 4, // weight initialization
    Shuffle         = 5, // minibatch / split shuffling
    TuningDraw      = 6, // hyperparameter sampling
    InputNoise      = 7, // Gaussian noise injected on training inputs
};

/// splitmix64 step: advances `state` and returns the next output.
/// Used both as a standalone mixer and to seed the main generator.
inline std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Mixes one 64-bit word into a running hash (splitmix-style avalanche).
inline std::uint64_t mix64(std::uint64_t h, std::uint64_t v) noexcept {
    h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    std::uint64_t s = h;
    return splitmix64_next(s);
}

/// Derives the seed for a (replicate, series, purpose) sub-stream from the
/// experiment base seed. Pure function; the scheme is frozen so that any
/// cell of any run can be reproduced from the manifest alone.
inline std::uint64_t derive_seed(std::uint64_t base_seed,
                                 std::uint64_t replicate,
                                 std::uint64_t series,
                                 SeedPurpose purpose) noexcept {
    std::uint64_t h = mix64(0x5B1CE4E5B9F4A7C1ULL, base_seed);
    h = mix64(h, replicate);
    h = mix64(h, series);
    h = mix64(h, static_cast<std::uint64_t>(purpose));
    return h;
}

/// Deterministic pseudo-random generator (xoshiro256++) with explicitly
/// implemented distributions. The standard library distributions are
/// implementation-defined, so we avoid them: every stream here is
/// bit-reproducible for a given seed on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept {
        // Seed the four lanes from a splitmix64 stream, as recommended by
        // the xoshiro authors; guards against the all-zero state.
        std::uint64_t s = seed;
        for (auto& lane : state_) lane = splitmix64_next(s);
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform draw in [0, 1) with 53-bit resolution.
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform draw in (0, 1]; never returns 0 (safe under log()).
    double uniform01_open_low() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform draw in [lo, hi).
    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform01();
    }

    /// Uniform integer in the inclusive range [lo, hi] (unbiased).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<std::int64_t>(next_u64()); // full range
        // Lemire's multiply-shift rejection method.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * span;
        auto low = static_cast<std::uint64_t>(m);
        if (low < span) {
            const std::uint64_t threshold = (0ULL - span) % span;
            while (low < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * span;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return lo + static_cast<std::int64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller; pairs are generated together and the
    /// spare is cached so the draw count per call is fixed.
    double normal() noexcept;

    double normal(double mean, double stddev) noexcept {
        return mean + stddev * normal();
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace simbench
