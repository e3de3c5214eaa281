#pragma once

#include <cstdint>
#include <stdexcept>

// Q10 fixed-point primitives restricted to the arithmetic a programmable
// data plane offers: shifts, adds, multiplies and bitwise logic. No
// division, no floating point, no data-dependent loops beyond fixed
// unrollable bounds.

namespace p4entropy {

inline constexpr unsigned kQ10Shift = 10;
inline constexpr std::uint64_t kQ10One = 1ull << kQ10Shift;  // 1.0 in Q10

// Integer carrying a real value amplified by 2^10. Products of two Q10
// values are right-shifted 10 bits (truncating) before storage.
struct FixedQ10 {
    std::uint64_t raw = 0;

    friend constexpr bool operator==(FixedQ10, FixedQ10) = default;
    friend constexpr auto operator<=>(FixedQ10, FixedQ10) = default;

    // Reporting convenience only; never feeds estimator arithmetic.
    constexpr double to_double() const { return static_cast<double>(raw) / kQ10One; }
};

// Tuning knobs of the log/exp approximations.
//   n_digits * n_bits : fractional bits extracted by p4log
//   n_terms           : series terms evaluated by p4exp
struct ApproxParams {
    unsigned n_digits = 3;
    unsigned n_bits = 4;
    unsigned n_terms = 7;
};

// Counting 1-Bits: parallel bit summation, bitwise ops only.
constexpr std::uint32_t hamming_weight(std::uint32_t x) {
    x = x - ((x >> 1) & 0x55555555u);
    x = (x & 0x33333333u) + ((x >> 2) & 0x33333333u);
    x = (x + (x >> 4)) & 0x0F0F0F0Fu;
    x = x + (x >> 8);
    x = x + (x >> 16);
    return x & 0x3Fu;
}

constexpr std::uint32_t hamming_weight64(std::uint64_t x) {
    x = x - ((x >> 1) & 0x5555555555555555ull);
    x = (x & 0x3333333333333333ull) + ((x >> 2) & 0x3333333333333333ull);
    x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0Full;
    x = x + (x >> 8);
    x = x + (x >> 16);
    x = x + (x >> 32);
    return static_cast<std::uint32_t>(x & 0x7Fu);
}

// Sets every bit at or left of the rightmost set bit; 0 stays 0.
// Doubling-shift OR cascade, unrolled for a 32-bit word.
constexpr std::uint32_t fill_ones_rightward(std::uint32_t x) {
    std::uint32_t w = x | (x << 1);
    w |= w << 2;
    w |= w << 4;
    w |= w << 8;
    w |= w << 16;
    return w;
}

constexpr std::uint64_t fill_ones_rightward64(std::uint64_t x) {
    std::uint64_t w = x | (x << 1);
    w |= w << 2;
    w |= w << 4;
    w |= w << 8;
    w |= w << 16;
    w |= w << 32;
    return w;
}

namespace detail {

// Sets every bit at or right of the most significant set bit.
constexpr std::uint64_t fill_ones_below_msb(std::uint64_t x) {
    x |= x >> 1;
    x |= x >> 2;
    x |= x >> 4;
    x |= x >> 8;
    x |= x >> 16;
    x |= x >> 32;
    return x;
}

// Position of the most significant set bit, 0-based. Requires x != 0.
constexpr unsigned msb_index(std::uint64_t x) {
    return hamming_weight64(fill_ones_below_msb(x)) - 1;
}

constexpr void validate(const ApproxParams& params) {
    const unsigned frac_bits = params.n_digits * params.n_bits;
    if (params.n_digits == 0 || params.n_bits == 0 || frac_bits > 30)
        throw std::invalid_argument("ApproxParams: n_digits*n_bits must be in [1,30]");
    if (params.n_terms < 2 || params.n_terms > 12)
        throw std::invalid_argument("ApproxParams: n_terms must be in [2,12]");
}

}  // namespace detail

// log2(x) amplified by 2^10. Integer part is the MSB position; the
// fraction comes from repeated squaring of the Q30-normalized mantissa
// (each squaring yields one binary digit of log2). n_digits groups of
// n_bits digits are extracted, then truncated to the Q10 grid.
// Relative error < 1% for all x >= 2; exact at powers of two.
inline FixedQ10 p4log(std::uint64_t x, const ApproxParams& params = {}) {
    detail::validate(params);
    if (x == 0) throw std::domain_error("p4log: x must be positive");
    const unsigned integer_part = detail::msb_index(x);
    // mantissa in [1, 2) as Q30
    std::uint64_t m = integer_part >= 30 ? x >> (integer_part - 30) : x << (30 - integer_part);
    const unsigned frac_bits = params.n_digits * params.n_bits;
    std::uint64_t frac = 0;
    for (unsigned i = 0; i < frac_bits; ++i) {
        const std::uint64_t sq = m * m;  // Q60, in [2^60, 2^62)
        frac <<= 1;
        if (sq >= (1ull << 61)) {  // mantissa^2 >= 2: emit digit, renormalize
            frac |= 1;
            m = sq >> 31;
        } else {
            m = sq >> 30;
        }
    }
    const std::uint64_t frac_q10 =
        frac_bits >= kQ10Shift ? frac >> (frac_bits - kQ10Shift) : frac << (kQ10Shift - frac_bits);
    return FixedQ10{(static_cast<std::uint64_t>(integer_part) << kQ10Shift) | frac_q10};
}

// 2^(e/2^10) as a plain unsigned integer (not Q10-amplified). Integer
// exponents take the exact left-shift path. Fractional exponents are
// evaluated as exp(f*ln2) with an n_terms reciprocal-factorial series in
// Q20, then shifted into place. Relative error < 1% before the final
// truncation to an integer; for results below ~2^7 that truncation
// dominates, so callers needing small fractional powers use p4exp_q10.
inline std::uint64_t p4exp(FixedQ10 e, const ApproxParams& params = {}) {
    detail::validate(params);
    const std::uint64_t integer_part = e.raw >> kQ10Shift;
    const std::uint64_t frac_q10 = e.raw & (kQ10One - 1);
    if (integer_part > 63) throw std::range_error("p4exp: result exceeds 64 bits");
    if (frac_q10 == 0) return 1ull << integer_part;

    constexpr std::uint64_t kLn2Q20 = 726817;  // ln 2 in Q20
    const std::uint64_t u = (frac_q10 * kLn2Q20) >> kQ10Shift;  // f*ln2 in Q20, < ln2
    // 1/t! in Q20 for t = 0..11
    constexpr std::uint64_t kInvFactQ20[12] = {1048576, 1048576, 524288, 174763, 43691,
                                               8738,    1456,    208,    26,     3,
                                               0,       0};
    std::uint64_t acc = kInvFactQ20[params.n_terms - 1];
    for (unsigned t = params.n_terms - 1; t-- > 0;) acc = kInvFactQ20[t] + ((acc * u) >> 20);
    // acc = 2^f in Q20, within (2^20, 2^21)
    return integer_part >= 20 ? acc << (integer_part - 20) : acc >> (20 - integer_part);
}

// 2^(e/2^10) amplified by 2^10, obtained by adding 10 to the exponent's
// integer part. Used wherever the exponential's fractional part must
// survive (entropy correction term, normalized-entropy output).
inline FixedQ10 p4exp_q10(FixedQ10 e, const ApproxParams& params = {}) {
    return FixedQ10{p4exp(FixedQ10{e.raw + (10ull << kQ10Shift)}, params)};
}

}  // namespace p4entropy
