#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ensdecomp {

/// 64-bit engine with a standard-mandated output sequence. Every draw in the
/// library goes through the helpers below so that results do not depend on the
/// standard library's distribution implementations.
using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for stream `stream`, index (a, b), derived from a master seed.
///
/// seed = mix(mix(mix(master ^ mix(stream)) + a) + b). Each index is folded
/// in with a fresh mix so (a, b) and (b, a) give unrelated seeds, and adding
/// trials or members never changes the seeds of existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
    std::uint64_t s = mix64(master ^ mix64(stream));
    s = mix64(s + a);
    return mix64(s + b);
}

namespace streams {
inline constexpr std::uint64_t trial_subsample = 1;
inline constexpr std::uint64_t member = 2;
inline constexpr std::uint64_t tiebreak = 3;
inline constexpr std::uint64_t bootstrap = 4;
inline constexpr std::uint64_t simulation = 5;
inline constexpr std::uint64_t split = 6;
inline constexpr std::uint64_t verify = 7;
}  // namespace streams

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), n > 0, by rejection (no modulo bias).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

/// Standard normal via Box-Muller (one value per call).
inline double standard_normal(Rng& rng) {
    double u1;
    do {
        u1 = uniform01(rng);
    } while (u1 <= 0.0);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ensdecomp
