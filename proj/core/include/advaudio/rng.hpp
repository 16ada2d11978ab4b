#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace advaudio {

/// Seedable random source with a portable output sequence.
///
/// The engine is std::mt19937_64, whose output is fixed by the standard. The
/// standard distributions are implementation-defined, so every distribution
/// used by the library is implemented here on top of the raw 64-bit draws.
///
/// Stream splitting: a child stream for (seed, a, b, ...) is seeded with
/// derive_seed(seed, a, b, ...), a SplitMix64 fold of the components. Child
/// streams never share state with their parent, so work that draws from a
/// per-slot stream gives identical results in any execution order.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (no cached second value).
    double normal();

    bool bernoulli(double p) { return uniform01() < p; }

    /// Number of failures before the next success of a Bernoulli(p) trial,
    /// saturated at `cap`. Used to skip over untouched samples when mutating.
    std::uint64_t geometric_skip(double p, std::uint64_t cap);

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a over the bytes of `text`; used to fold string ids into seeds.
std::uint64_t hash_string(std::string_view text);

inline std::uint64_t derive_seed(std::uint64_t seed) { return splitmix64(seed); }

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t first, Rest... rest)
{
    return derive_seed(splitmix64(seed) ^ splitmix64(first + 0x632be59bd9b4e019ULL),
                       static_cast<std::uint64_t>(rest)...);
}

} // namespace advaudio
