#include "advaudio/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace advaudio {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t Rng::uniform_below(std::uint64_t bound)
{
    // Rejection keeps the result exactly uniform.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = engine_();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi)
{
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) {
        return static_cast<std::int64_t>(engine_());
    }
    return lo + static_cast<std::int64_t>(uniform_below(span));
}

double Rng::uniform01()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal()
{
    double u1 = uniform01();
    while (u1 <= 0.0) {
        u1 = uniform01();
    }
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::geometric_skip(double p, std::uint64_t cap)
{
    if (p >= 1.0) {
        return 0;
    }
    if (p <= 0.0) {
        return cap;
    }
    const double u = 1.0 - uniform01(); // (0, 1]
    const double k = std::floor(std::log(u) / std::log1p(-p));
    if (!(k < static_cast<double>(cap))) {
        return cap;
    }
    return static_cast<std::uint64_t>(k);
}

} // namespace advaudio
