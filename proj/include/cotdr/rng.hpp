#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cotdr {

// splitmix64 finalizer; used to derive independent, reproducible rng streams
// from (user seed, stream tags).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(mix64(a) ^ b); }

inline std::mt19937_64 make_rng(std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = 0x6a09e667f3bcc908ULL;
    for (auto t : tags) h = mix64(h, t);
    return std::mt19937_64(h);
}

}  // namespace cotdr
