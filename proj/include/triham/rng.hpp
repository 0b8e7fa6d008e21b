#ifndef TRIHAM_RNG_HPP
#define TRIHAM_RNG_HPP

#include <cmath>
#include <cstdint>

namespace triham {

/// SplitMix64 generator. Hand-rolled so that seeded data sets are
/// bit-reproducible across platforms and independent of the standard
/// library's distribution implementations. All randomness in the library
/// flows through this type; parallel sweeps derive one stream per work item
/// so results do not depend on scheduling.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 bits of mantissa.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal deviate via Box-Muller (first of the pair).
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        // Guard against log(0).
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

/// Derives a child seed from a parent seed and a stream tag. Used to give
/// every trace / data point / Monte Carlo repetition its own independent
/// stream: derive_seed(seed, trace_index), derive_seed(seed, i, j), ...
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    SplitMix64 mix(seed ^ (0x510e527fade682d1ULL + tag * 0x9e3779b97f4a7c15ULL));
    mix.next_u64();
    return mix.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag1,
                                 std::uint64_t tag2) {
    return derive_seed(derive_seed(seed, tag1), tag2);
}

}  // namespace triham

#endif
