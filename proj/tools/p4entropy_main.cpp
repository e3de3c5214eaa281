// Trace-replay CLI: generates synthetic flow traces and replays them
// through the cardinality / normalized-entropy estimators and the DDoS
// detector. Machine-readable JSON lines go to stdout (or --out), logs and
// errors to stderr. Exit codes: 0 success, 1 runtime failure, 2
// usage/validation.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "p4entropy/networkwide.hpp"
#include "p4entropy/oracle.hpp"
#include "p4entropy/replay.hpp"
#include "p4entropy/traces.hpp"

using nlohmann::json;
using namespace p4entropy;

namespace {

struct OutputSink {
    explicit OutputSink(const std::string& path) {
        if (!path.empty() && path != "-") {
            file.emplace(path);
            if (!*file) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file ? *file : std::cout; }
    std::optional<std::ofstream> file;
};

json result_json(const json& interval, const NormEntropyResult& r) {
    return json{{"interval", interval},
                {"packets", r.packets},
                {"n_hat", r.n_hat},
                {"h_q10", r.h_q10.raw},
                {"h_norm_q10", r.h_norm_q10.raw},
                {"h", r.h_q10.to_double()},
                {"h_norm", r.h_norm_q10.to_double()}};
}

std::uint64_t interval_us_of(double interval_s) {
    if (interval_s <= 0) throw std::invalid_argument("--interval-s must be positive");
    return static_cast<std::uint64_t>(interval_s * 1e6);
}

FixedQ10 q10_of(double v, const char* flag) {
    if (v < 0 || v > 1) throw std::invalid_argument(std::string(flag) + " must lie in [0,1]");
    return FixedQ10{static_cast<std::uint64_t>(v * 1024.0)};
}

int cmd_gen(const std::string& spec_path, const std::string& out_path) {
    std::ifstream is(spec_path);
    if (!is) throw std::runtime_error("cannot open spec file: " + spec_path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument("malformed spec JSON: " + std::string(e.what()));
    }
    const TraceSpec spec = trace_spec_from_json(j);
    const std::vector<FlowRecord> records = generate_trace(spec);
    write_trace(out_path, records);
    std::cerr << "wrote " << records.size() << " records to " << out_path << "\n";
    return 0;
}

int cmd_cardinality(const std::string& trace_path, unsigned k_bits, std::uint64_t seed,
                    double interval_s, const std::string& out_path) {
    const auto records = read_trace(trace_path);
    const auto batches = split_intervals(records, interval_us_of(interval_s));
    const auto estimates = replay_cardinality(batches, k_bits, seed);
    OutputSink sink(out_path);
    double err_sum = 0;
    std::uint64_t defined = 0;
    for (const CardinalityEstimate& e : estimates) {
        json line{{"interval", e.interval}, {"n_hat", e.n_hat}, {"n_exact", e.n_exact}};
        if (e.n_exact > 0) {
            const double err =
                oracle::relative_error(static_cast<double>(e.n_hat), static_cast<double>(e.n_exact));
            line["rel_err_pct"] = err;
            err_sum += err;
            ++defined;
        } else {
            line["rel_err_pct"] = nullptr;
        }
        sink.stream() << line.dump() << "\n";
    }
    json summary{{"summary", true}, {"intervals", estimates.size()}};
    summary["mean_rel_err_pct"] = defined ? json(err_sum / double(defined)) : json(nullptr);
    sink.stream() << summary.dump() << "\n";
    return 0;
}

int cmd_entropy(const std::string& trace_path, const EstimatorConfig& cfg, double interval_s,
                const std::string& out_path, const std::string& summary_out,
                const std::string& switch_id) {
    const auto records = read_trace(trace_path);
    const auto batches = split_intervals(records, interval_us_of(interval_s));
    OutputSink sink(out_path);

    auto acc = make_accumulator(cfg);
    double err_sum = 0;
    std::uint64_t defined = 0;
    bool have_summary = false;
    SwitchSummary last_summary{switch_id, 0, 0, acc.loglog()};
    for (const IntervalBatch& batch : batches) {
        acc.reset();
        for (const FlowRecord& r : batch.records) acc.update(dst_key(r));
        json line;
        if (acc.packets() == 0) {
            line = json{{"interval", batch.index}, {"packets", 0},           {"n_hat", nullptr},
                        {"h_q10", nullptr},        {"h_norm_q10", nullptr},  {"h", nullptr},
                        {"h_norm", nullptr},       {"h_exact", nullptr},     {"h_norm_exact", nullptr},
                        {"n_exact", 0},            {"rel_err_pct", nullptr}};
        } else {
            const NormEntropyResult est = acc.estimate_normalized();
            const auto exact = oracle::exact_entropy(batch.records, oracle::FlowKeyField::dst_ip);
            line = result_json(batch.index, est);
            line["h_exact"] = exact.h;
            line["h_norm_exact"] = exact.h_norm;
            line["n_exact"] = exact.n;
            if (exact.h > 0) {
                const double err = oracle::relative_error(est.h_q10.to_double(), exact.h);
                line["rel_err_pct"] = err;
                err_sum += err;
                ++defined;
            } else {
                line["rel_err_pct"] = nullptr;
            }
            last_summary = make_summary(switch_id, acc);
            have_summary = true;
        }
        sink.stream() << line.dump() << "\n";
    }
    json summary{{"summary", true}, {"intervals", batches.size()}};
    summary["mean_rel_err_pct"] = defined ? json(err_sum / double(defined)) : json(nullptr);
    sink.stream() << summary.dump() << "\n";
    if (!summary_out.empty()) {
        if (!have_summary) throw std::runtime_error("no non-empty interval to summarize");
        write_summary(summary_out, last_summary);
        std::cerr << "wrote summary of interval-local state to " << summary_out << "\n";
    }
    return 0;
}

int cmd_detect(const std::string& trace_path, const EstimatorConfig& cfg, double interval_s,
               double alpha, double epsilon, double warmup_s, const std::string& out_path) {
    const auto records = read_trace(trace_path);
    const auto batches = split_intervals(records, interval_us_of(interval_s));
    const DetectionRun run =
        replay_detect(batches, cfg, q10_of(alpha, "--alpha"), q10_of(epsilon, "--epsilon"));
    OutputSink sink(out_path);
    for (std::size_t i = 0; i < run.verdicts.size(); ++i) {
        const IntervalVerdict& v = run.verdicts[i];
        json line{{"k", v.interval_index},
                  {"h_norm", v.h_norm_q10.raw},
                  {"lambda", v.has_threshold ? json(v.lambda_q10.raw) : json(nullptr)},
                  {"alarm", v.alarm}};
        sink.stream() << line.dump() << "\n";
    }
    // metrics, optionally skipping a leading warm-up window
    const std::size_t skip =
        warmup_s > 0 ? static_cast<std::size_t>(warmup_s / interval_s) : 0;
    std::vector<std::uint8_t> alarms, truth;
    for (std::size_t i = skip < run.verdicts.size() ? skip : run.verdicts.size();
         i < run.verdicts.size(); ++i) {
        alarms.push_back(run.verdicts[i].alarm ? 1 : 0);
        truth.push_back(run.attack_truth[i]);
    }
    const auto m = oracle::detection_metrics(alarms, truth);
    json summary{{"summary", true},
                 {"intervals", run.verdicts.size()},
                 {"tp", m.tp},
                 {"tn", m.tn},
                 {"fp", m.fp},
                 {"fn", m.fn}};
    summary["d_tp"] = m.tp_rate ? json(*m.tp_rate) : json(nullptr);
    summary["d_fp"] = m.fp_rate ? json(*m.fp_rate) : json(nullptr);
    summary["d_acc"] = m.accuracy ? json(*m.accuracy) : json(nullptr);
    sink.stream() << summary.dump() << "\n";
    return 0;
}

int cmd_merge(const std::vector<std::string>& summary_paths, const std::string& out_path) {
    std::vector<SwitchSummary> summaries;
    summaries.reserve(summary_paths.size());
    for (const std::string& p : summary_paths) summaries.push_back(read_summary(p));
    const NormEntropyResult merged = networkwide_entropy(summaries);
    OutputSink sink(out_path);
    sink.stream() << result_json(nullptr, merged).dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Integer-arithmetic traffic sketches: flow cardinality, normalized entropy "
                 "and entropy-based DDoS detection over flow traces"};
    app.require_subcommand(1);

    std::string trace_path, spec_path, out_path, summary_out, switch_id = "sw0";
    std::string sketch_name = "count";
    EstimatorConfig cfg;
    double interval_s = 1.0, alpha = 0.13, epsilon = 0.01, warmup_s = 0.0;
    std::vector<std::string> summary_paths;

    auto add_estimator_flags = [&](CLI::App* cmd, bool with_sketch) {
        cmd->add_option("--trace", trace_path, "input trace CSV")->required();
        cmd->add_option("--k-bits", cfg.k_bits, "cardinality register size exponent (m = 2^k)")
            ->capture_default_str();
        cmd->add_option("--seed", cfg.seed, "estimator hash seed")->capture_default_str();
        cmd->add_option("--interval-s", interval_s, "time window length in seconds")
            ->capture_default_str();
        cmd->add_option("--out", out_path, "write JSON lines here instead of stdout");
        if (with_sketch) {
            cmd->add_option("--sketch", sketch_name, "frequency sketch variant (count_min|count)")
                ->capture_default_str();
            cmd->add_option("--nh", cfg.n_h, "sketch hash rows")->capture_default_str();
            cmd->add_option("--ns", cfg.n_s, "sketch counters per row")->capture_default_str();
        }
    };

    CLI::App* gen = app.add_subcommand("gen", "generate a labeled synthetic trace");
    gen->add_option("--spec", spec_path, "trace spec JSON")->required();
    gen->add_option("--out", out_path, "output trace CSV")->required();

    CLI::App* card = app.add_subcommand("cardinality", "per-interval flow cardinality estimates");
    add_estimator_flags(card, false);

    CLI::App* ent = app.add_subcommand("entropy", "per-interval entropy estimates vs oracle");
    add_estimator_flags(ent, true);
    ent->add_option("--summary-out", summary_out,
                    "write the last non-empty interval's switch summary JSON here");
    ent->add_option("--switch-id", switch_id, "identifier recorded in the switch summary")
        ->capture_default_str();

    CLI::App* det = app.add_subcommand("detect", "per-interval alarms and detection metrics");
    add_estimator_flags(det, true);
    det->add_option("--alpha", alpha, "EWMA smoothing factor")->capture_default_str();
    det->add_option("--epsilon", epsilon, "threshold margin below the EWMA")
        ->capture_default_str();
    det->add_option("--warmup-s", warmup_s, "leading seconds excluded from the metrics summary")
        ->capture_default_str();

    CLI::App* mrg = app.add_subcommand("merge", "network-wide entropy from switch summaries");
    mrg->add_option("summaries", summary_paths, "switch summary JSON files")
        ->required()
        ->expected(-1);
    mrg->add_option("--out", out_path, "write the merged result here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(spec_path, out_path);
        if (card->parsed()) return cmd_cardinality(trace_path, cfg.k_bits, cfg.seed, interval_s, out_path);
        cfg.variant = parse_sketch_variant(sketch_name);
        if (ent->parsed())
            return cmd_entropy(trace_path, cfg, interval_s, out_path, summary_out, switch_id);
        if (det->parsed())
            return cmd_detect(trace_path, cfg, interval_s, alpha, epsilon, warmup_s, out_path);
        if (mrg->parsed()) return cmd_merge(summary_paths, out_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
