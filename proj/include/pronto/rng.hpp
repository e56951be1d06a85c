#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace pronto {

// Deterministic xoshiro256++ generator with the distributions this project needs.
// Uniform/gaussian draws are hand-rolled (not std::*_distribution) so that byte-level
// reproducibility does not depend on the standard library implementation.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = splitmix64(x);
    }

    std::uint64_t next_u64() {
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

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t n = static_cast<std::uint64_t>(hi - lo) + 1;
        if (n == 0) return lo + static_cast<std::int64_t>(next_u64());  // full 64-bit span
        const std::uint64_t reject_below = (0 - n) % n;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r < reject_below);
        return lo + static_cast<std::int64_t>(r % n);
    }

    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Circularly symmetric complex gaussian with E|z - mean|^2 = var.
    std::complex<double> cgaussian(std::complex<double> mean, double var) {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-var * std::log(u1));
        return mean + std::polar(r, 2.0 * std::numbers::pi * u2);
    }

    // Independent stream for a worker/record; derivation depends only on (seed, stream).
    Rng derive(std::uint64_t stream) const {
        std::uint64_t x = seed_ ^ stream;
        x = splitmix64(x);
        return Rng(x ^ 0x9e3779b97f4a7c15ull);
    }

    std::uint64_t seed() const { return seed_; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t s_[4];
};

}  // namespace pronto
