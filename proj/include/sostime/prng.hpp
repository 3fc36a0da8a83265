#pragma once

#include <cstdint>
#include <string_view>

namespace sostime {

/// Deterministic, splittable pseudo-random streams (SplitMix64 core).
///
/// Every consumer of randomness (each link, each fault injector, each
/// workload generator) derives its own named stream from the scenario seed,
/// so adding or reordering consumers never perturbs the draws of another.
/// Reproducibility of a run therefore depends only on (config, seed).
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    /// Derive an independent stream from (seed, name, a, b).
    static RngStream derive(std::uint64_t seed, std::string_view name,
                            std::uint64_t a = 0, std::uint64_t b = 0)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        std::uint64_t s = seed;
        s = mix(s ^ h);
        s = mix(s ^ (a * 0x9e3779b97f4a7c15ULL + 1));
        s = mix(s ^ (b * 0xbf58476d1ce4e5b9ULL + 1));
        return RngStream(s);
    }

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, bound) via 128-bit multiply (bound > 0).
    std::uint64_t next_below(std::uint64_t bound)
    {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * bound) >> 64);
    }

    /// Uniform integer in [lo, hi], inclusive.
    std::int64_t next_in(std::int64_t lo, std::int64_t hi)
    {
        if (lo >= hi)
            return lo;
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_below(span));
    }

    /// Bernoulli draw against a probability pre-quantized to 2^53 steps.
    bool chance(std::uint64_t numerator_2p53)
    {
        return (next() >> 11) < numerator_2p53;
    }

    /// Quantize a probability in [0,1] for chance(); 1.0 maps to 2^53
    /// (always true), 0.0 to 0 (always false).
    static std::uint64_t quantize_probability(double p)
    {
        if (p <= 0.0)
            return 0;
        if (p >= 1.0)
            return 1ULL << 53;
        return static_cast<std::uint64_t>(p * 9007199254740992.0); // 2^53
    }

private:
    static std::uint64_t mix(std::uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_ = 0x853c49e6748fea9bULL;
};

} // namespace sostime
