#ifndef STILLACT_RNG_HPP
#define STILLACT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace stillact::rng {

using Engine = std::mt19937_64;

/// splitmix64 finalizer; combines a run seed with a stream tag so that every
/// random consumer gets an independent, reproducible stream from one --seed.
/// The first argument is scrambled before the second joins, so the function
/// is not symmetric and swapped inputs land in different streams.
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z += b + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a over the bytes of a label, for naming streams ("pretrain.layer1", ...).
inline std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline Engine make_engine(std::uint64_t seed, std::string_view stream,
                          std::uint64_t index = 0) {
    return Engine{mix(mix(seed, hash_label(stream)), index)};
}

/// Uniform double in [0,1). Hand-rolled so draws are identical across
/// standard-library implementations.
inline double uniform(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
    return lo + (hi - lo) * uniform(eng);
}

/// Uniform integer in [lo, hi], both inclusive.
inline int uniform_int(Engine& eng, int lo, int hi) {
    double u = uniform(eng);
    int span = hi - lo + 1;
    int v = lo + static_cast<int>(u * span);
    return v > hi ? hi : v;
}

/// Standard normal via Box-Muller. Always consumes two draws and never caches,
/// so the stream position is a pure function of the call count.
inline double normal(Engine& eng) {
    double u1 = 1.0 - uniform(eng);  // (0, 1]
    double u2 = uniform(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double normal(Engine& eng, double mean, double sd) {
    return mean + sd * normal(eng);
}

}  // namespace stillact::rng

#endif
