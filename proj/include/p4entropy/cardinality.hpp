#pragma once

#include <cstdint>
#include <cstring>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "p4entropy/fixpoint.hpp"
#include "p4entropy/hash.hpp"

namespace p4entropy {

// Flow-cardinality estimator over an m = 2^k cell register of max-rank
// values. Update hashes the flow key to 32 bits, takes the low k bits as
// the bucket and ranks the remaining bits by the position of their
// rightmost one; cells keep the per-bucket maximum, so they only grow and
// registers with equal configuration merge exactly by cell-wise max.
//
// Query uses the fixed bias constant 0.39701 for every m and applies no
// small-range correction, a known positive bias for estimates below
// roughly the register size.
class LogLogRegister {
public:
    static constexpr unsigned kHashBits = 32;                      // os
    static constexpr std::uint8_t kMaxCellValue = kHashBits + 1;   // rank of an all-zero suffix
    static constexpr std::uint64_t kAlphaQ10 = 406;                // 0.39701 in Q10, truncated

    LogLogRegister(unsigned k_bits, std::uint64_t hash_seed)
        : k_bits_(k_bits), seed_(hash_seed) {
        if (k_bits < 4 || k_bits > 16)
            throw std::invalid_argument("LogLogRegister: k_bits must be in [4,16]");
        cells_.assign(std::size_t{1} << k_bits, 0);
    }

    void update(std::span<const std::uint8_t> flow_key) {
        const std::uint32_t s = hash32(flow_key, seed_);
        const std::uint32_t bucket = s & (static_cast<std::uint32_t>(cells_.size()) - 1);
        const std::uint32_t x = s >> k_bits_;
        const std::uint32_t b = hamming_weight(fill_ones_rightward(x));
        const std::uint8_t value = static_cast<std::uint8_t>(kHashBits + 1 - b);
        if (value > cells_[bucket]) cells_[bucket] = value;
    }

    // Estimated number of distinct keys seen since the last reset. The
    // cell sum is amplified to Q10 before the >> k so the fractional mean
    // survives into the exponential.
    std::uint64_t query() const {
        const std::uint64_t sum =
            std::accumulate(cells_.begin(), cells_.end(), std::uint64_t{0});
        const FixedQ10 mean_q10{(sum << kQ10Shift) >> k_bits_};
        const std::uint64_t exp = p4exp(mean_q10);
        return (exp * kAlphaQ10 * cells_.size()) >> kQ10Shift;
    }

    void reset() { std::fill(cells_.begin(), cells_.end(), std::uint8_t{0}); }

    unsigned k_bits() const { return k_bits_; }
    std::uint64_t hash_seed() const { return seed_; }
    std::span<const std::uint8_t> cells() const { return cells_; }

    bool operator==(const LogLogRegister&) const = default;

    // Length-prefixed little-endian layout: u32 payload length, u8 k,
    // u64 seed, m cell bytes.
    std::vector<std::uint8_t> serialize() const {
        const std::uint32_t len = static_cast<std::uint32_t>(1 + 8 + cells_.size());
        std::vector<std::uint8_t> out;
        out.reserve(4 + len);
        for (unsigned i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
        out.push_back(static_cast<std::uint8_t>(k_bits_));
        for (unsigned i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(seed_ >> (8 * i)));
        out.insert(out.end(), cells_.begin(), cells_.end());
        return out;
    }

    static LogLogRegister deserialize(std::span<const std::uint8_t> bytes) {
        if (bytes.size() < 4) throw std::invalid_argument("register blob: truncated length prefix");
        std::uint32_t len = 0;
        for (unsigned i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
        if (bytes.size() != 4 + std::size_t{len} || len < 1 + 8)
            throw std::invalid_argument("register blob: length mismatch");
        const unsigned k = bytes[4];
        std::uint64_t seed = 0;
        for (unsigned i = 0; i < 8; ++i) seed |= static_cast<std::uint64_t>(bytes[5 + i]) << (8 * i);
        LogLogRegister reg(k, seed);
        if (len - 1 - 8 != reg.cells_.size())
            throw std::invalid_argument("register blob: cell count does not match k");
        std::memcpy(reg.cells_.data(), bytes.data() + 13, reg.cells_.size());
        for (std::uint8_t c : reg.cells_)
            if (c > kMaxCellValue) throw std::invalid_argument("register blob: cell value out of range");
        return reg;
    }

    friend LogLogRegister merge(const LogLogRegister& a, const LogLogRegister& b) {
        if (a.k_bits_ != b.k_bits_ || a.seed_ != b.seed_)
            throw std::invalid_argument("LogLogRegister::merge: mismatched k or hash seed");
        LogLogRegister out = a;
        for (std::size_t i = 0; i < out.cells_.size(); ++i)
            if (b.cells_[i] > out.cells_[i]) out.cells_[i] = b.cells_[i];
        return out;
    }

private:
    unsigned k_bits_;
    std::uint64_t seed_;
    std::vector<std::uint8_t> cells_;
};

}  // namespace p4entropy
