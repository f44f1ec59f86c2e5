#pragma once

// Seeded random streams. All randomness in a run derives from one global seed
// mixed with a stream name and integer coordinates (epoch, sample, ...), so
// any draw can be regenerated without replaying earlier ones.

#include <concepts>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace cfnlearn {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Combines a seed with any number of integer coordinates.
template <std::integral... Ints>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Ints... coords) noexcept {
    std::uint64_t h = splitmix64(seed);
    ((h = splitmix64(h ^ static_cast<std::uint64_t>(coords))), ...);
    return h;
}

/// Seed of a named stream.
template <std::integral... Ints>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, Ints... coords) noexcept {
    return derive_seed(seed ^ fnv1a(stream), coords...);
}

/// mt19937_64 with distribution helpers that do not depend on the standard
/// library's (implementation-defined) distribution algorithms, so sequences
/// are identical across toolchains.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
        std::uint64_t x;
        do { x = engine_(); } while (x >= limit);
        return x % bound;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    engine_type& engine() { return engine_; }
    const engine_type& engine() const { return engine_; }

private:
    engine_type engine_;
};

} // namespace cfnlearn
