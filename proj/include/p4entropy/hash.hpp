#pragma once

#include <cstdint>
#include <cstring>
#include <span>

namespace p4entropy {

// Seeded 64-bit avalanche hash over an opaque byte string (MurmurHash2,
// 64-bit variant). Non-cryptographic; chosen for reproducibility and
// bucket uniformity.
inline std::uint64_t hash64(std::span<const std::uint8_t> key, std::uint64_t seed) {
    constexpr std::uint64_t kMul = 0xc6a4a7935bd1e995ull;
    constexpr int kRot = 47;

    std::uint64_t h = seed ^ (key.size() * kMul);
    const std::uint8_t* data = key.data();
    std::size_t n = key.size();

    while (n >= 8) {
        std::uint64_t k;
        std::memcpy(&k, data, 8);
        k *= kMul;
        k ^= k >> kRot;
        k *= kMul;
        h ^= k;
        h *= kMul;
        data += 8;
        n -= 8;
    }

    std::uint64_t tail = 0;
    for (std::size_t i = 0; i < n; ++i) tail |= static_cast<std::uint64_t>(data[i]) << (8 * i);
    if (n > 0) {
        h ^= tail;
        h *= kMul;
    }

    h ^= h >> kRot;
    h *= kMul;
    h ^= h >> kRot;
    return h;
}

inline std::uint32_t hash32(std::span<const std::uint8_t> key, std::uint64_t seed) {
    return static_cast<std::uint32_t>(hash64(key, seed));
}

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Independent per-lane seed derived from one master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t lane) {
    return splitmix64(master ^ splitmix64(lane));
}

}  // namespace p4entropy
