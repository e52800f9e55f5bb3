#pragma once

#include <cstdint>
#include <random>

namespace mlse {

/// Independent random streams per run seed. Diagnostics draw from their own
/// stream so they never shift the sample path or the observation noise.
enum class Stream : std::uint64_t {
    Path = 0x70617468,
    Noise = 0x6e6f6973,
    NetSampling = 0x6e657473,
    Scratch = 0x73637261,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream purpose) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(purpose)));
}

}  // namespace mlse
