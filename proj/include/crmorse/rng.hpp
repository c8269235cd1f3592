/**
 * @file rng.hpp
 * @brief Deterministic, splittable random streams for reproducible sampling.
 *
 * Every Monte-Carlo draw in this project is addressed by (seed, index): the
 * stream for sample #i is a small counter-based generator keyed by a mix of
 * the run seed and i.  Results are therefore independent of how samples are
 * partitioned across workers, and identical seeds reproduce identical runs
 * bit for bit.
 */
#pragma once

#include <cmath>
#include <cstdint>

namespace crmorse {

/// SplitMix64 step (Steele-Lea-Vigna); full-period 64-bit mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stateless key derivation: one 64-bit output from (seed, index).
inline std::uint64_t mix_key(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    (void)splitmix64(s);
    return splitmix64(s);
}

/// Per-sample random stream.  Cheap to construct; not cryptographic.
class SampleStream {
public:
    SampleStream(std::uint64_t seed, std::uint64_t index)
        : state_(mix_key(seed, index)) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform on [0,1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0,1); never returns 0 (safe for logs).
    double uniform_pos() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; draws are paired internally.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace crmorse
