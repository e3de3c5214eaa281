#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "p4entropy/cardinality.hpp"
#include "p4entropy/detector.hpp"
#include "p4entropy/entropy.hpp"
#include "p4entropy/frequency.hpp"
#include "p4entropy/oracle.hpp"
#include "p4entropy/traces.hpp"

// Per-interval replay wiring shared by the CLI and the evaluation
// harness: one estimator per simulated switch, reset at every interval
// boundary, driven by destination-IP flow keys.

namespace p4entropy {

struct EstimatorConfig {
    unsigned k_bits = 11;  // register of m = 2048 cells
    SketchVariant variant = SketchVariant::count;
    std::size_t n_h = 5;
    std::size_t n_s = 2000;
    std::uint64_t seed = 1;
};

inline EntropyAccumulator<FreqSketch> make_accumulator(const EstimatorConfig& cfg) {
    return EntropyAccumulator<FreqSketch>(
        FreqSketch(cfg.variant, cfg.n_h, cfg.n_s, derive_seed(cfg.seed, 0xF)),
        LogLogRegister(cfg.k_bits, derive_seed(cfg.seed, 0xC)));
}

struct IntervalEstimate {
    std::uint64_t interval = 0;
    NormEntropyResult result;  // zero-valued when the interval was empty
};

template <class Accumulator>
std::vector<IntervalEstimate> replay_entropy_with(Accumulator& acc,
                                                  std::span<const IntervalBatch> batches) {
    std::vector<IntervalEstimate> out;
    out.reserve(batches.size());
    for (const IntervalBatch& batch : batches) {
        acc.reset();
        for (const FlowRecord& r : batch.records) acc.update(dst_key(r));
        IntervalEstimate e;
        e.interval = batch.index;
        if (acc.packets() > 0) e.result = acc.estimate_normalized();
        out.push_back(e);
    }
    return out;
}

inline std::vector<IntervalEstimate> replay_entropy(std::span<const IntervalBatch> batches,
                                                    const EstimatorConfig& cfg) {
    auto acc = make_accumulator(cfg);
    return replay_entropy_with(acc, batches);
}

struct CardinalityEstimate {
    std::uint64_t interval = 0;
    std::uint64_t n_hat = 0;
    std::uint64_t n_exact = 0;
};

inline std::vector<CardinalityEstimate> replay_cardinality(std::span<const IntervalBatch> batches,
                                                           unsigned k_bits, std::uint64_t seed) {
    LogLogRegister reg(k_bits, derive_seed(seed, 0));
    std::vector<CardinalityEstimate> out;
    out.reserve(batches.size());
    for (const IntervalBatch& batch : batches) {
        reg.reset();
        for (const FlowRecord& r : batch.records) reg.update(dst_key(r));
        out.push_back({batch.index, reg.query(),
                       oracle::exact_cardinality(batch.records, oracle::FlowKeyField::dst_ip)});
    }
    return out;
}

struct DetectionRun {
    std::vector<IntervalVerdict> verdicts;
    std::vector<std::uint8_t> attack_truth;  // interval is attacked iff it holds >= 1 attack record
};

inline DetectionRun replay_detect(std::span<const IntervalBatch> batches,
                                  const EstimatorConfig& cfg, FixedQ10 alpha, FixedQ10 epsilon) {
    auto acc = make_accumulator(cfg);
    DdosDetector detector(alpha, epsilon);
    DetectionRun run;
    run.verdicts.reserve(batches.size());
    run.attack_truth.reserve(batches.size());
    for (const IntervalBatch& batch : batches) {
        run.attack_truth.push_back(batch.contains_attack() ? 1 : 0);
        if (batch.records.empty()) {
            run.verdicts.push_back(detector.advance_empty());
            continue;
        }
        acc.reset();
        for (const FlowRecord& r : batch.records) acc.update(dst_key(r));
        run.verdicts.push_back(detector.detect(acc.estimate_normalized().h_norm_q10));
    }
    return run;
}

}  // namespace p4entropy
