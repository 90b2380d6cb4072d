#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace dpkde {

// Finalizer of the splitmix64 generator (Vigna). Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based splitmix64 stream. The state advances by the golden-ratio
// increment; every output is the mixed counter, so streams seeded by distinct
// values are independent of evaluation order.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() { return mix64(state_ += 0x9e3779b97f4a7c15ULL); }

    // Uniform on the open interval (0,1): (k + 1/2) * 2^-53 for k in [0, 2^53).
    double uniform() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via the Box-Muller transform (two uniforms per draw).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.28318530717958647692528676655900577 * u2);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Replicate seed derivation used by the study harness:
//   s0 = mix64(master ^ fnv1a64(density_id))
//   s1 = mix64(s0 ^ n)
//   seed = mix64(s1 ^ replicate)
// Deterministic in (master, density, n, replicate); independent of thread
// count and execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view density_id,
                                 std::uint64_t n, std::uint64_t replicate) {
    std::uint64_t s = mix64(master ^ fnv1a64(density_id));
    s = mix64(s ^ n);
    return mix64(s ^ replicate);
}

}  // namespace dpkde
