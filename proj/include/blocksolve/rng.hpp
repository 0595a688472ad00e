#pragma once

#include <cmath>
#include <cstdint>

namespace blocksolve {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256++ with splitmix64 seeding. All randomness in the library
/// flows through this generator so that traces are reproducible for a
/// given seed independent of the standard library implementation.
///
/// Independent streams (block sampling, gradient noise, instance
/// generation) are derived from one user seed via `stream`.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64_next(sm);
    }

    /// Derives the `stream_id`-th independent substream of `seed`.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t sm = seed;
        std::uint64_t base = splitmix64_next(sm);
        std::uint64_t sid = stream_id + 1;
        std::uint64_t mixed = base ^ splitmix64_next(sid);
        return Rng(mixed);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound). bound == 0 or 1 returns 0 without
    /// consuming the stream. Unbiased via masked rejection.
    std::uint64_t uniform_int(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t mask = mask_for(bound);
        for (;;) {
            const std::uint64_t v = next() & mask;
            if (v < bound) return v;
        }
    }

    /// Standard normal deviate (Box-Muller, cached pair).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    static std::uint64_t mask_for(std::uint64_t bound) {
        std::uint64_t m = bound - 1;
        m |= m >> 1;
        m |= m >> 2;
        m |= m >> 4;
        m |= m >> 8;
        m |= m >> 16;
        m |= m >> 32;
        return m;
    }

    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Stream ids used by the solvers and the CLI. A single --seed fans out
/// into these substreams.
enum class RngStream : std::uint64_t {
    Sampling = 0,  // block subset draws
    Noise = 1,     // stochastic gradient noise
    Generator = 2, // instance generation
};

inline Rng make_stream(std::uint64_t seed, RngStream which) {
    return Rng::stream(seed, static_cast<std::uint64_t>(which));
}

} // namespace blocksolve
