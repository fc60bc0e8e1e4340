#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "nildist/matrix.hpp"

namespace nildist {

/// Counter-based deterministic generator: SplitMix64 applied to an
/// incrementing counter. Identical output on every platform for a given
/// (seed, stream), which is what makes seeded experiment reports
/// bit-reproducible. Streams derived via deriveStream are independent and
/// may be consumed in any order across threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : base_(mix(seed ^ kGolden)) {}

    static Rng deriveStream(std::uint64_t seed, std::uint64_t stream) {
        Rng r(seed);
        r.base_ = mix(r.base_ + mix(stream + kGolden));
        return r;
    }

    std::uint64_t next() { return mix(base_ + (++counter_) * kGolden); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; two uniforms per draw, no cached state.
    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Entry of a complex Ginibre matrix: independent N(0,1) real and imaginary parts.
    Complex complexGaussian() {
        const double re = gaussian();
        const double im = gaussian();
        return Complex(re, im);
    }

    CMatrix ginibre(std::size_t rows, std::size_t cols) {
        CMatrix g(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) g(i, j) = complexGaussian();
        return g;
    }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t base_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace nildist
