#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>

#include "p4entropy/cardinality.hpp"
#include "p4entropy/fixpoint.hpp"
#include "p4entropy/frequency.hpp"

namespace p4entropy {

// 1/ln2 ~ 1.44 in Q10, truncated. Asymptotic per-packet increment of the
// running f*log2(f) sum once a flow's count exceeds one.
inline constexpr std::uint64_t kInvLn2Q10 = 1474;

struct NormEntropyResult {
    FixedQ10 h_q10;       // estimated entropy, Q10
    FixedQ10 h_norm_q10;  // estimated normalized entropy, Q10
    std::uint64_t n_hat = 0;
    std::uint64_t packets = 0;

    friend constexpr bool operator==(const NormEntropyResult&, const NormEntropyResult&) = default;
};

// End-of-interval entropy from the interval tallies:
//   H = log2|S| - 2^(log2 Sum - log2 |S|)
// with the whole correction term carried in Q10 so its fraction survives
// the subtraction. When the running sum is below the packet count the
// flow distribution is near-uniform and H collapses to log2|S|.
// Shared with the network-wide merge, which feeds summed tallies.
inline FixedQ10 finalize_entropy(std::uint64_t packets, std::uint64_t sum_q10) {
    if (packets == 0) throw std::domain_error("entropy: empty interval");
    const std::uint64_t sum_final = sum_q10 >> kQ10Shift;
    const FixedQ10 log_packets = p4log(packets);
    if (packets > sum_final) return log_packets;
    const FixedQ10 diff{p4log(sum_final).raw - log_packets.raw};
    const std::uint64_t correction_q10 = p4exp_q10(diff).raw;  // Sum/|S| in Q10
    if (correction_q10 >= log_packets.raw) return FixedQ10{0};
    return FixedQ10{log_packets.raw - correction_q10};
}

// Normalized entropy H / log2(n_hat) in Q10 via
//   diff_n = p4log(H<<10) - (p4log(p4log(n_hat)) - 10<<10)
// whose built-in +10<<10 offset makes p4exp emit the Q10-amplified ratio
// directly. Log-domain hazards (H = 0, n_hat <= 1) map to 0 rather than
// raising; nothing clamps values slightly above 1024 when n_hat
// underestimates the true cardinality.
inline NormEntropyResult finalize_normalized(std::uint64_t packets, std::uint64_t sum_q10,
                                             std::uint64_t n_hat) {
    NormEntropyResult out;
    out.packets = packets;
    out.n_hat = n_hat;
    out.h_q10 = finalize_entropy(packets, sum_q10);
    if (out.h_q10.raw == 0 || n_hat <= 1) return out;
    const std::int64_t log_h = static_cast<std::int64_t>(p4log(out.h_q10.raw).raw);
    const std::int64_t log_log_n =
        static_cast<std::int64_t>(p4log(p4log(n_hat).raw).raw) - (10ll << kQ10Shift);
    const std::int64_t diff_n = log_h - log_log_n;
    if (diff_n > 0) out.h_norm_q10 = FixedQ10{p4exp(FixedQ10{static_cast<std::uint64_t>(diff_n)})};
    return out;
}

// Per-interval streaming state: packet counter, Q10 running sum of
// log2(f) + 1/ln2 over packets whose flow count exceeds one, a frequency
// sketch and a cardinality register. The frequency estimator is a
// template parameter so an exact (hash-map) counter can stand in for the
// sketch when separating approximation layers.
template <class FrequencyEstimator = FreqSketch>
class EntropyAccumulator {
public:
    EntropyAccumulator(FrequencyEstimator sketch, LogLogRegister loglog)
        : sketch_(std::move(sketch)), loglog_(std::move(loglog)) {}

    // Updates the sketch, queries the post-update count and accumulates
    // the one-logarithm increment; first packets of a flow contribute
    // nothing.
    void update(std::span<const std::uint8_t> flow_key) {
        ++packets_;
        sketch_.update(flow_key);
        const std::uint64_t f = sketch_.query(flow_key);
        loglog_.update(flow_key);
        if (f > 1) sum_q10_ += p4log(f).raw + kInvLn2Q10;
    }

    FixedQ10 estimate_entropy() const { return finalize_entropy(packets_, sum_q10_); }

    NormEntropyResult estimate_normalized() const {
        return finalize_normalized(packets_, sum_q10_, loglog_.query());
    }

    // Interval boundary: counters and cells zero, seeds retained.
    void reset() {
        packets_ = 0;
        sum_q10_ = 0;
        sketch_.reset();
        loglog_.reset();
    }

    std::uint64_t packets() const { return packets_; }
    std::uint64_t sum_q10() const { return sum_q10_; }
    const FrequencyEstimator& sketch() const { return sketch_; }
    const LogLogRegister& loglog() const { return loglog_; }

private:
    std::uint64_t packets_ = 0;
    std::uint64_t sum_q10_ = 0;
    FrequencyEstimator sketch_;
    LogLogRegister loglog_;
};

}  // namespace p4entropy
