#pragma once

#include <cstdint>
#include <random>

namespace shl0 {

/// splitmix64 finalizer; used to derive independent seed streams from
/// (seed, round, restart, replication) style tuples.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(seed ^ mix64(a + 0x51'7c'c1'b7'27'22'0a'95ULL) ^ mix64(b + 0x63'1b'4f'99'29'b5'15'4dULL));
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    return std::mt19937_64(derive_seed(seed, a, b));
}

}  // namespace shl0
