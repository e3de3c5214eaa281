#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "p4entropy/cardinality.hpp"
#include "p4entropy/entropy.hpp"

namespace p4entropy {

namespace detail {

inline const char* kBase64Chars =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(std::span<const std::uint8_t> in) {
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= in.size(); i += 3) {
        const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8) | in[i + 2];
        out.push_back(kBase64Chars[(v >> 18) & 63]);
        out.push_back(kBase64Chars[(v >> 12) & 63]);
        out.push_back(kBase64Chars[(v >> 6) & 63]);
        out.push_back(kBase64Chars[v & 63]);
    }
    const std::size_t rem = in.size() - i;
    if (rem == 1) {
        const std::uint32_t v = in[i] << 16;
        out.push_back(kBase64Chars[(v >> 18) & 63]);
        out.push_back(kBase64Chars[(v >> 12) & 63]);
        out += "==";
    } else if (rem == 2) {
        const std::uint32_t v = (in[i] << 16) | (in[i + 1] << 8);
        out.push_back(kBase64Chars[(v >> 18) & 63]);
        out.push_back(kBase64Chars[(v >> 12) & 63]);
        out.push_back(kBase64Chars[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& in) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    if (in.size() % 4 != 0) throw std::invalid_argument("base64: length not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(in.size() / 4 * 3);
    for (std::size_t i = 0; i < in.size(); i += 4) {
        int v[4];
        int pad = 0;
        for (int j = 0; j < 4; ++j) {
            const char c = in[i + j];
            if (c == '=' && i + 4 == in.size() && j >= 2) {
                v[j] = 0;
                ++pad;
            } else {
                v[j] = value(c);
                if (v[j] < 0 || pad > 0) throw std::invalid_argument("base64: invalid character");
            }
        }
        const std::uint32_t w = (v[0] << 18) | (v[1] << 12) | (v[2] << 6) | v[3];
        out.push_back(static_cast<std::uint8_t>(w >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(w >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(w));
    }
    return out;
}

}  // namespace detail

// One switch's end-of-interval contribution to the network-wide view.
struct SwitchSummary {
    std::string switch_id;
    std::uint64_t packets = 0;
    std::uint64_t sum_q10 = 0;
    LogLogRegister loglog;
};

template <class FrequencyEstimator>
SwitchSummary make_summary(std::string switch_id, const EntropyAccumulator<FrequencyEstimator>& acc) {
    return SwitchSummary{std::move(switch_id), acc.packets(), acc.sum_q10(), acc.loglog()};
}

// Network-wide entropy across switches: packet counts and running sums
// add (each packet assumed counted at exactly one switch -- a flow whose
// packets register at several switches inflates the sum and biases the
// entropy; that bias is inherent to the merge, not corrected), while the
// distinct-flow count comes from the exact cell-wise register union, which
// absorbs duplicates.
inline NormEntropyResult networkwide_entropy(std::span<const SwitchSummary> summaries) {
    if (summaries.empty())
        throw std::invalid_argument("networkwide_entropy: no summaries given");
    std::uint64_t packets = 0;
    std::uint64_t sum_q10 = 0;
    LogLogRegister merged = summaries.front().loglog;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const SwitchSummary& s = summaries[i];
        if (s.loglog.k_bits() != merged.k_bits() || s.loglog.hash_seed() != merged.hash_seed())
            throw std::invalid_argument(
                "networkwide_entropy: summaries use different register configurations");
        packets += s.packets;
        sum_q10 += s.sum_q10;
        if (i > 0) merged = merge(merged, s.loglog);
    }
    return finalize_normalized(packets, sum_q10, merged.query());
}

// File format: JSON header plus the register's byte layout, base64-embedded.
inline nlohmann::json summary_to_json(const SwitchSummary& s) {
    return nlohmann::json{{"switch_id", s.switch_id},
                          {"packets", s.packets},
                          {"sum_q10", s.sum_q10},
                          {"register", detail::base64_encode(s.loglog.serialize())}};
}

inline SwitchSummary summary_from_json(const nlohmann::json& j) {
    for (const char* field : {"switch_id", "packets", "sum_q10", "register"})
        if (!j.contains(field))
            throw std::invalid_argument(std::string("switch summary: field '") + field +
                                        "' missing");
    const std::vector<std::uint8_t> blob =
        detail::base64_decode(j.at("register").get<std::string>());
    return SwitchSummary{j.at("switch_id").get<std::string>(), j.at("packets").get<std::uint64_t>(),
                         j.at("sum_q10").get<std::uint64_t>(), LogLogRegister::deserialize(blob)};
}

inline void write_summary(const std::string& path, const SwitchSummary& s) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open summary file for writing: " + path);
    os << summary_to_json(s).dump() << '\n';
}

inline SwitchSummary read_summary(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open summary file: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed summary file " + path + ": " + e.what());
    }
    return summary_from_json(j);
}

}  // namespace p4entropy
