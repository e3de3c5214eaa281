#pragma once

#include <cstdint>
#include <stdexcept>

#include "p4entropy/fixpoint.hpp"

namespace p4entropy {

struct IntervalVerdict {
    std::uint64_t interval_index = 0;  // k, 1-based
    FixedQ10 h_norm_q10;
    FixedQ10 lambda_q10;    // threshold the comparison used
    bool has_threshold = false;  // false at k = 1 (no prior EWMA)
    bool alarm = false;
};

// Per-interval alarm decision against an adaptive EWMA threshold over
// normalized entropy. An interval alarms when h_norm falls strictly below
// lambda = EWMA - epsilon. Alarm intervals freeze both EWMA and lambda so
// attack traffic cannot drag the threshold down; the first interval only
// seeds the EWMA and never alarms.
class DdosDetector {
public:
    static constexpr FixedQ10 kDefaultAlpha{133};   // 0.13 in Q10, truncated
    static constexpr FixedQ10 kDefaultEpsilon{10};  // 0.01 in Q10, truncated

    explicit DdosDetector(FixedQ10 alpha = kDefaultAlpha, FixedQ10 epsilon = kDefaultEpsilon)
        : alpha_(alpha), epsilon_(epsilon) {
        if (alpha.raw == 0 || alpha.raw >= kQ10One)
            throw std::invalid_argument("DdosDetector: alpha must satisfy 0 < alpha < 1");
        if (epsilon.raw > kQ10One)
            throw std::invalid_argument("DdosDetector: epsilon must satisfy 0 <= epsilon <= 1");
    }

    // Consumes one interval's normalized entropy: decides the alarm,
    // then advances the threshold state.
    IntervalVerdict detect(FixedQ10 h_norm_q10) {
        IntervalVerdict v;
        v.interval_index = ++interval_index_;
        v.h_norm_q10 = h_norm_q10;
        v.has_threshold = has_threshold_;
        v.lambda_q10 = lambda_;
        v.alarm = has_threshold_ && h_norm_q10.raw < lambda_.raw;
        update_threshold(h_norm_q10, v.alarm);
        return v;
    }

    // No alarm, EWMA and lambda frozen: the EWMA recurrence has no
    // defined input for an interval that carried no packets.
    IntervalVerdict advance_empty() {
        IntervalVerdict v;
        v.interval_index = ++interval_index_;
        v.has_threshold = has_threshold_;
        v.lambda_q10 = lambda_;
        return v;
    }

    void update_threshold(FixedQ10 h_norm_q10, bool alarm) {
        if (alarm) return;  // freeze: only legitimate traffic shapes the threshold
        ewma_ = initialized_
                    ? FixedQ10{(alpha_.raw * h_norm_q10.raw +
                                (kQ10One - alpha_.raw) * ewma_.raw) >> kQ10Shift}
                    : h_norm_q10;
        initialized_ = true;
        lambda_ = FixedQ10{ewma_.raw >= epsilon_.raw ? ewma_.raw - epsilon_.raw : 0};
        has_threshold_ = true;
    }

    std::uint64_t interval_index() const { return interval_index_; }
    FixedQ10 lambda_q10() const { return lambda_; }
    FixedQ10 ewma_q10() const { return ewma_; }
    FixedQ10 alpha_q10() const { return alpha_; }
    FixedQ10 epsilon_q10() const { return epsilon_; }
    bool has_threshold() const { return has_threshold_; }

private:
    FixedQ10 alpha_;
    FixedQ10 epsilon_;
    FixedQ10 ewma_;
    FixedQ10 lambda_;
    std::uint64_t interval_index_ = 0;
    bool initialized_ = false;
    bool has_threshold_ = false;
};

}  // namespace p4entropy
