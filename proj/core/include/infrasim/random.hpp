#pragma once

#include <cstdint>
#include <random>

namespace infrasim
{
    /// Every stochastic step draws from this engine. Draws are converted to
    /// numbers by the helpers below (not std distributions, whose output is
    /// library specific) so seeded runs match across toolchains.
    using Rng = std::mt19937_64;

    inline std::uint64_t
    splitmix64(std::uint64_t& state)
    {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Independent sub-seed for stream `stream` of a run seeded with `base`.
    inline std::uint64_t
    derive_seed(std::uint64_t base, std::uint64_t stream)
    {
        std::uint64_t s = base;
        std::uint64_t const a = splitmix64(s);
        s = a ^ (stream * 0xD1B54A32D192ED03ull);
        return splitmix64(s);
    }

    inline Rng
    make_rng(std::uint64_t seed)
    {
        std::uint64_t s = seed;
        return Rng(splitmix64(s));
    }

    /// Uniform on [0, 1) with 53 random bits.
    inline double
    uniform01(Rng& rng)
    {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }

    /// Uniform on {0, ..., n-1}, unbiased (rejection). n must be positive.
    inline std::uint64_t
    uniform_index(Rng& rng, std::uint64_t n)
    {
        std::uint64_t const limit = Rng::max() - Rng::max() % n;
        std::uint64_t v = rng();
        while (v >= limit)
        {
            v = rng();
        }
        return v % n;
    }
}
