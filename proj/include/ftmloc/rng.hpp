#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ftmloc {

// All randomness in a run flows from one 64-bit seed through named
// substreams, so any component (walk, noise, minibatch) can be re-run in
// isolation and whole pipelines replay byte-identically.

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    std::uint64_t s = detail::splitmix64(seed ^ detail::fnv1a(name));
    s = detail::splitmix64(s ^ index);
    return std::mt19937_64(s);
}

// A fresh root seed for an independent dataset (e.g. a held-out test set).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view name) {
    return detail::splitmix64(seed ^ detail::fnv1a(name));
}

}  // namespace ftmloc
