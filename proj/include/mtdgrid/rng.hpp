#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mtdgrid {

// splitmix64: advances the state and returns a well-mixed 64-bit value.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derive a substream seed from a run seed, a stream name and an index.
// The name is folded in with FNV-1a, then everything is diffused through
// splitmix64 so that nearby (seed, index) pairs give unrelated streams.
inline std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                                    std::uint64_t index = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t s = seed ^ h;
    splitmix64(s);
    s ^= index * 0x9e3779b97f4a7c15ULL;
    return splitmix64(s);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::string_view name,
                                std::uint64_t index = 0) {
    return std::mt19937_64(substream_seed(seed, name, index));
}

}  // namespace mtdgrid
