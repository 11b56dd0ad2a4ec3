#pragma once

#include <cstdint>
#include <random>

namespace stabsel {

using Rng = std::mt19937_64;

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based child seed: depends only on (master, stream, index), never on
/// the order in which children are requested.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) noexcept {
    return mix64(mix64(mix64(master) ^ stream) + index);
}

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

// stream tags used across the library
namespace streams {
inline constexpr std::uint64_t subsample = 0x5355425341ULL;
inline constexpr std::uint64_t selector = 0x53454c4543ULL;
inline constexpr std::uint64_t split = 0x53504c4954ULL;
inline constexpr std::uint64_t replicate = 0x5245504cULL;
inline constexpr std::uint64_t design = 0x44455349ULL;
inline constexpr std::uint64_t beta = 0x42455441ULL;
inline constexpr std::uint64_t noise = 0x4e4f4953ULL;
inline constexpr std::uint64_t permute = 0x5045524dULL;
}  // namespace streams

}  // namespace stabsel
