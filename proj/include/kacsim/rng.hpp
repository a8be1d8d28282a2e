#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "kacsim/vec3.hpp"

namespace kacsim {

// splitmix64, used to whiten user seeds and to derive replica seed streams.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Seed splitting rule: replica (or estimator stream) k of a run with master
// seed s draws its generator seed from splitmix64(s + (k+1) * golden), so
// streams are decorrelated and any replica can be reproduced in isolation.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
    return splitmix64(master + (k + 1) * 0x9e3779b97f4a7c15ull);
}

// mt19937_64 raw stream with hand-rolled output transforms. The transforms
// (not std::uniform_real_distribution etc.) are pinned here so that a given
// seed reproduces the same trajectory independent of the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    // uniform in [0,1), 53-bit resolution
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform in (0,1]
    double uniform_pos() { return 1.0 - uniform(); }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    // index uniform in {0,...,n-1}; n is tiny relative to 2^64 so the
    // modulo bias is irrelevant at any reachable sample count
    std::uint64_t index(std::uint64_t n) { return gen_() % n; }

    double normal() {
        // Box-Muller, no cached spare: two uniforms per draw.
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        return r * std::cos(2.0 * std::numbers::pi * uniform());
    }

    Vec3 normal3() { return {normal(), normal(), normal()}; }

private:
    std::mt19937_64 gen_;
};

}  // namespace kacsim
