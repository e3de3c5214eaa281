#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "p4entropy/hash.hpp"
#include "p4entropy/traces.hpp"

// Exact floating-point references for tests and evaluation. This is the
// one layer exempt from the integer-only arithmetic contract; nothing
// here feeds the estimator path.

namespace p4entropy::oracle {

enum class FlowKeyField { dst_ip, src_ip };

inline std::uint32_t key_of(const FlowRecord& r, FlowKeyField f) {
    return f == FlowKeyField::dst_ip ? r.dst_ip : r.src_ip;
}

// Drop-in replacement for FreqSketch backed by an exact hash map; used to
// separate the sketch's approximation error from the entropy recurrence.
class ExactFrequency {
public:
    void update(std::span<const std::uint8_t> key) { ++counts_[to_key(key)]; }

    std::uint64_t query(std::span<const std::uint8_t> key) const {
        const auto it = counts_.find(to_key(key));
        return it == counts_.end() ? 0 : it->second;
    }

    void reset() { counts_.clear(); }

private:
    static std::string to_key(std::span<const std::uint8_t> key) {
        return std::string(reinterpret_cast<const char*>(key.data()), key.size());
    }
    std::unordered_map<std::string, std::uint64_t> counts_;
};

struct ExactIntervalStats {
    double h = 0;       // Shannon entropy, base 2
    double h_norm = 0;  // h / log2(n), 0 when n == 1
    std::uint64_t n = 0;
    std::uint64_t packets = 0;
};

inline ExactIntervalStats exact_entropy(std::span<const FlowRecord> records, FlowKeyField field) {
    if (records.empty()) throw std::domain_error("exact_entropy: empty interval");
    std::unordered_map<std::uint32_t, std::uint64_t> counts;
    for (const FlowRecord& r : records) ++counts[key_of(r, field)];
    ExactIntervalStats out;
    out.packets = records.size();
    out.n = counts.size();
    const double total = static_cast<double>(out.packets);
    for (const auto& [key, f] : counts) {
        const double p = static_cast<double>(f) / total;
        out.h -= p * std::log2(p);
    }
    out.h_norm = out.n > 1 ? out.h / std::log2(static_cast<double>(out.n)) : 0.0;
    return out;
}

inline std::uint64_t exact_cardinality(std::span<const FlowRecord> records, FlowKeyField field) {
    std::unordered_set<std::uint32_t> keys;
    for (const FlowRecord& r : records) keys.insert(key_of(r, field));
    return keys.size();
}

// Bitmap-based distinct-count baseline: n = -bits * ln(empty fraction).
inline double linear_counting(std::span<const FlowRecord> records, FlowKeyField field,
                              std::uint64_t bitmap_bits, std::uint64_t seed = 0) {
    if (bitmap_bits == 0) throw std::invalid_argument("linear_counting: bitmap_bits must be >= 1");
    std::vector<bool> bitmap(bitmap_bits, false);
    for (const FlowRecord& r : records) {
        const std::uint32_t key = key_of(r, field);
        const std::uint8_t bytes[4] = {static_cast<std::uint8_t>(key >> 24),
                                       static_cast<std::uint8_t>(key >> 16),
                                       static_cast<std::uint8_t>(key >> 8),
                                       static_cast<std::uint8_t>(key)};
        bitmap[hash64(bytes, seed) % bitmap_bits] = true;
    }
    std::uint64_t empty = 0;
    for (bool b : bitmap) empty += b ? 0 : 1;
    if (empty == 0)
        throw std::runtime_error("linear_counting: bitmap saturated, estimate undefined");
    return -static_cast<double>(bitmap_bits) *
           std::log(static_cast<double>(empty) / static_cast<double>(bitmap_bits));
}

inline double relative_error(double estimate, double exact) {
    if (exact == 0) throw std::domain_error("relative_error: exact value is zero");
    return std::abs(exact - estimate) / std::abs(exact) * 100.0;
}

struct DetectionMetrics {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    std::optional<double> tp_rate;   // TP/(TP+FN) * 100
    std::optional<double> fp_rate;   // FP/(TN+FP) * 100
    std::optional<double> accuracy;  // (TP+TN)/total * 100
};

inline DetectionMetrics detection_metrics(std::span<const std::uint8_t> alarms,
                                          std::span<const std::uint8_t> attack_truth) {
    if (alarms.size() != attack_truth.size())
        throw std::invalid_argument("detection_metrics: series length mismatch");
    DetectionMetrics m;
    for (std::size_t i = 0; i < alarms.size(); ++i) {
        if (attack_truth[i])
            ++(alarms[i] ? m.tp : m.fn);
        else
            ++(alarms[i] ? m.fp : m.tn);
    }
    if (m.tp + m.fn > 0) m.tp_rate = 100.0 * static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    if (m.tn + m.fp > 0) m.fp_rate = 100.0 * static_cast<double>(m.fp) / static_cast<double>(m.tn + m.fp);
    const std::uint64_t total = m.tp + m.tn + m.fp + m.fn;
    if (total > 0) m.accuracy = 100.0 * static_cast<double>(m.tp + m.tn) / static_cast<double>(total);
    return m;
}

struct EntropyPoint {
    double src_h = 0;
    double dst_h = 0;
};

// Comparison baseline: raw (non-normalized) entropies against adaptive
// mean +- k*stddev bands over a trailing window. Alarms when the source
// entropy rises above its upper band or the destination entropy falls
// below its lower band. Band statistics ingest every interval regardless
// of alarms, which keeps alarm sets nested across sensitivity values.
inline std::vector<std::uint8_t> baseline_dual_entropy_detector(
    std::span<const EntropyPoint> series, double sensitivity_k, std::size_t window = 50,
    std::size_t min_history = 10) {
    if (min_history < 2) throw std::invalid_argument("baseline: min_history must be >= 2");
    std::vector<std::uint8_t> alarms(series.size(), 0);
    std::vector<double> src_hist, dst_hist;
    auto band = [&](const std::vector<double>& hist) {
        const std::size_t n = std::min(window, hist.size());
        double mean = 0;
        for (std::size_t i = hist.size() - n; i < hist.size(); ++i) mean += hist[i];
        mean /= static_cast<double>(n);
        double var = 0;
        for (std::size_t i = hist.size() - n; i < hist.size(); ++i)
            var += (hist[i] - mean) * (hist[i] - mean);
        return std::pair<double, double>{mean, std::sqrt(var / static_cast<double>(n))};
    };
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (src_hist.size() >= min_history) {
            const auto [src_mean, src_sd] = band(src_hist);
            const auto [dst_mean, dst_sd] = band(dst_hist);
            alarms[i] = series[i].src_h > src_mean + sensitivity_k * src_sd ||
                        series[i].dst_h < dst_mean - sensitivity_k * dst_sd;
        }
        src_hist.push_back(series[i].src_h);
        dst_hist.push_back(series[i].dst_h);
    }
    return alarms;
}

}  // namespace p4entropy::oracle
