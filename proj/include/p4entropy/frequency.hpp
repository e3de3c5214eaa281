#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "p4entropy/hash.hpp"

namespace p4entropy {

enum class SketchVariant { count_min, count };

inline SketchVariant parse_sketch_variant(const std::string& name) {
    if (name == "count_min") return SketchVariant::count_min;
    if (name == "count") return SketchVariant::count;
    throw std::invalid_argument("sketch variant must be count_min or count, got '" + name + "'");
}

// Per-flow packet-count estimator: an n_h x n_s counter grid. count_min
// increments one counter per row and reports the row minimum (one-sided
// overestimate); count adds a per-row +-1 sign and reports the median of
// the sign-corrected rows (unbiased, clamped below at zero since a packet
// count cannot be negative). Per-row hash and sign seeds derive from one
// master seed, so identical seed + stream gives bit-identical counters.
class FreqSketch {
public:
    FreqSketch(SketchVariant variant, std::size_t n_h, std::size_t n_s, std::uint64_t seed)
        : variant_(variant), n_h_(n_h), n_s_(n_s) {
        if (n_h == 0 || n_s == 0)
            throw std::invalid_argument("FreqSketch: n_h and n_s must be positive");
        counters_.assign(n_h * n_s, 0);
        row_seeds_.reserve(n_h);
        sign_seeds_.reserve(n_h);
        for (std::size_t r = 0; r < n_h; ++r) {
            row_seeds_.push_back(derive_seed(seed, r));
            sign_seeds_.push_back(derive_seed(seed, 0x100 + r));
        }
    }

    void update(std::span<const std::uint8_t> key) {
        for (std::size_t r = 0; r < n_h_; ++r) {
            std::int64_t& cell = counters_[r * n_s_ + cell_index(r, key)];
            cell += variant_ == SketchVariant::count ? sign(r, key) : 1;
        }
    }

    std::uint64_t query(std::span<const std::uint8_t> key) const {
        if (variant_ == SketchVariant::count_min) {
            std::int64_t est = INT64_MAX;
            for (std::size_t r = 0; r < n_h_; ++r)
                est = std::min(est, counters_[r * n_s_ + cell_index(r, key)]);
            return static_cast<std::uint64_t>(est < 0 ? 0 : est);
        }
        std::int64_t row_est[64];
        const std::size_t rows = std::min<std::size_t>(n_h_, 64);
        for (std::size_t r = 0; r < rows; ++r)
            row_est[r] = sign(r, key) * counters_[r * n_s_ + cell_index(r, key)];
        // lower median for even row counts
        auto* mid = row_est + (rows - 1) / 2;
        std::nth_element(row_est, mid, row_est + rows);
        return static_cast<std::uint64_t>(*mid < 0 ? 0 : *mid);
    }

    void reset() { std::fill(counters_.begin(), counters_.end(), std::int64_t{0}); }

    SketchVariant variant() const { return variant_; }
    std::size_t n_h() const { return n_h_; }
    std::size_t n_s() const { return n_s_; }
    std::span<const std::int64_t> counters() const { return counters_; }
    std::span<const std::int64_t> row(std::size_t r) const {
        return std::span<const std::int64_t>(counters_).subspan(r * n_s_, n_s_);
    }

private:
    std::size_t cell_index(std::size_t r, std::span<const std::uint8_t> key) const {
        return hash64(key, row_seeds_[r]) % n_s_;
    }
    std::int64_t sign(std::size_t r, std::span<const std::uint8_t> key) const {
        return (hash64(key, sign_seeds_[r]) & 1) ? 1 : -1;
    }

    SketchVariant variant_;
    std::size_t n_h_;
    std::size_t n_s_;
    std::vector<std::int64_t> counters_;
    std::vector<std::uint64_t> row_seeds_;
    std::vector<std::uint64_t> sign_seeds_;
};

}  // namespace p4entropy
