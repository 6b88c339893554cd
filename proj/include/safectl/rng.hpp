#ifndef SAFECTL_RNG_HPP
#define SAFECTL_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace safectl {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d4a2ca9f53d65dull;
    return x ^ (x >> 31);
}

}  // namespace detail

/// All randomized subsystems draw from one root seed through named
/// substreams, so editing one consumer's draw count cannot shift another's.
inline Rng substream(std::uint64_t root_seed, std::string_view name, std::uint64_t index = 0) {
    std::uint64_t s = detail::splitmix64(root_seed ^ detail::fnv1a(name));
    s = detail::splitmix64(s ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    return Rng(s);
}

}  // namespace safectl

#endif  // SAFECTL_RNG_HPP
