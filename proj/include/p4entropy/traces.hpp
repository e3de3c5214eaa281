#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace p4entropy {

enum class Label : std::uint8_t { legit, attack };

struct FlowRecord {
    std::uint64_t ts_us = 0;  // microseconds since trace start
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;
    Label label = Label::legit;

    friend constexpr bool operator==(const FlowRecord&, const FlowRecord&) = default;
};

inline std::array<std::uint8_t, 4> dst_key(const FlowRecord& r) {
    return {static_cast<std::uint8_t>(r.dst_ip >> 24), static_cast<std::uint8_t>(r.dst_ip >> 16),
            static_cast<std::uint8_t>(r.dst_ip >> 8), static_cast<std::uint8_t>(r.dst_ip)};
}

inline std::array<std::uint8_t, 4> src_key(const FlowRecord& r) {
    return {static_cast<std::uint8_t>(r.src_ip >> 24), static_cast<std::uint8_t>(r.src_ip >> 16),
            static_cast<std::uint8_t>(r.src_ip >> 8), static_cast<std::uint8_t>(r.src_ip)};
}

inline std::string format_ipv4(std::uint32_t ip) {
    return std::to_string(ip >> 24) + '.' + std::to_string((ip >> 16) & 0xFF) + '.' +
           std::to_string((ip >> 8) & 0xFF) + '.' + std::to_string(ip & 0xFF);
}

inline std::uint32_t parse_ipv4(std::string_view s) {
    std::uint32_t ip = 0;
    unsigned octets = 0;
    std::uint32_t cur = 0;
    bool have_digit = false;
    for (char c : s) {
        if (c >= '0' && c <= '9') {
            cur = cur * 10 + static_cast<std::uint32_t>(c - '0');
            if (cur > 255) throw std::runtime_error("ipv4 octet out of range");
            have_digit = true;
        } else if (c == '.') {
            if (!have_digit || octets == 3) throw std::runtime_error("malformed ipv4");
            ip = (ip << 8) | cur;
            cur = 0;
            have_digit = false;
            ++octets;
        } else {
            throw std::runtime_error("malformed ipv4");
        }
    }
    if (!have_digit || octets != 3) throw std::runtime_error("malformed ipv4");
    return (ip << 8) | cur;
}

enum class AttackKind { booter, botnet };

struct LegitProfile {
    std::uint64_t n_flows = 0;
    double pps = 0;
    double zipf_exponent = 1.1;
    // Per-second modulation of the active flow-population size in
    // [n_flows*(1-churn), n_flows]. 0 keeps the population fixed; >0
    // emulates the cardinality swings of real backbone traffic.
    double churn = 0.0;
};

struct AttackProfile {
    AttackKind kind = AttackKind::booter;
    double start_s = 0;
    double pps = 0;                        // booter: injected packet rate
    double attack_traffic_proportion = 0;  // botnet: fraction of legit records redirected
    std::uint64_t n_attack_sources = 0;    // booter: distinct spoofed sources
    std::uint32_t victim_ip = 0;
};

struct TraceSpec {
    double duration_s = 0;
    double interval_s = 1.0;
    LegitProfile legit;
    std::optional<AttackProfile> attack;
    std::uint64_t seed = 0;
};

namespace detail {

inline void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw std::invalid_argument("trace spec: field '" + field + "' " + why);
}

template <class T>
T get_field(const nlohmann::json& j, const std::string& ctx, const char* name) {
    const std::string field = ctx.empty() ? name : ctx + "." + name;
    if (!j.contains(name)) throw std::invalid_argument("trace spec: field '" + field + "' missing");
    try {
        return j.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("trace spec: field '" + field + "' has wrong type");
    }
}

}  // namespace detail

inline void validate(const TraceSpec& spec) {
    using detail::require;
    require(spec.duration_s > 0, "duration_s", "must be positive");
    require(spec.interval_s > 0, "interval_s", "must be positive");
    require(spec.legit.n_flows >= 1, "legit.n_flows", "must be at least 1");
    require(spec.legit.pps > 0, "legit.pps", "must be positive");
    require(spec.legit.zipf_exponent >= 0, "legit.zipf_exponent", "must be nonnegative");
    require(spec.legit.churn >= 0 && spec.legit.churn < 1, "legit.churn", "must be in [0,1)");
    if (spec.attack) {
        const AttackProfile& a = *spec.attack;
        require(a.start_s >= 0 && a.start_s <= spec.duration_s, "attack.start_s",
                "must lie within [0, duration_s]");
        if (a.kind == AttackKind::booter) {
            require(a.pps > 0, "attack.pps", "must be positive for kind booter");
            require(a.n_attack_sources >= 1, "attack.n_attack_sources",
                    "must be at least 1 for kind booter");
        } else {
            // 0 is accepted as the degenerate no-op proportion
            require(a.attack_traffic_proportion >= 0 && a.attack_traffic_proportion <= 1,
                    "attack.attack_traffic_proportion", "must be in [0,1] for kind botnet");
        }
    }
}

inline TraceSpec trace_spec_from_json(const nlohmann::json& j) {
    using detail::get_field;
    TraceSpec spec;
    spec.duration_s = get_field<double>(j, "", "duration_s");
    if (j.contains("interval_s")) spec.interval_s = get_field<double>(j, "", "interval_s");
    spec.seed = get_field<std::uint64_t>(j, "", "seed");
    if (!j.contains("legit")) throw std::invalid_argument("trace spec: field 'legit' missing");
    const nlohmann::json& l = j.at("legit");
    spec.legit.n_flows = get_field<std::uint64_t>(l, "legit", "n_flows");
    spec.legit.pps = get_field<double>(l, "legit", "pps");
    if (l.contains("zipf_exponent"))
        spec.legit.zipf_exponent = get_field<double>(l, "legit", "zipf_exponent");
    if (l.contains("churn")) spec.legit.churn = get_field<double>(l, "legit", "churn");
    if (j.contains("attack") && !j.at("attack").is_null()) {
        const nlohmann::json& a = j.at("attack");
        AttackProfile at;
        const std::string kind = detail::get_field<std::string>(a, "attack", "kind");
        if (kind == "booter") {
            at.kind = AttackKind::booter;
            at.pps = get_field<double>(a, "attack", "pps");
            at.n_attack_sources = get_field<std::uint64_t>(a, "attack", "n_attack_sources");
        } else if (kind == "botnet") {
            at.kind = AttackKind::botnet;
            at.attack_traffic_proportion =
                get_field<double>(a, "attack", "attack_traffic_proportion");
        } else {
            throw std::invalid_argument("trace spec: field 'attack.kind' must be booter or botnet");
        }
        at.start_s = get_field<double>(a, "attack", "start_s");
        at.victim_ip = parse_ipv4(get_field<std::string>(a, "attack", "victim_ip"));
        spec.attack = at;
    }
    validate(spec);
    return spec;
}

inline nlohmann::json trace_spec_to_json(const TraceSpec& spec) {
    nlohmann::json j{{"duration_s", spec.duration_s},
                     {"interval_s", spec.interval_s},
                     {"seed", spec.seed},
                     {"legit",
                      {{"n_flows", spec.legit.n_flows},
                       {"pps", spec.legit.pps},
                       {"zipf_exponent", spec.legit.zipf_exponent},
                       {"churn", spec.legit.churn}}}};
    if (spec.attack) {
        const AttackProfile& a = *spec.attack;
        nlohmann::json aj{{"kind", a.kind == AttackKind::booter ? "booter" : "botnet"},
                          {"start_s", a.start_s},
                          {"victim_ip", format_ipv4(a.victim_ip)}};
        if (a.kind == AttackKind::booter) {
            aj["pps"] = a.pps;
            aj["n_attack_sources"] = a.n_attack_sources;
        } else {
            aj["attack_traffic_proportion"] = a.attack_traffic_proportion;
        }
        j["attack"] = aj;
    }
    return j;
}

namespace detail {

// Explicit samplers on top of the raw engine: the distribution classes of
// the standard library are implementation-defined, which would break
// fixed-seed reproducibility of trace files.
inline double uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
}

inline double standard_normal(std::mt19937_64& rng) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline std::uint64_t sample_poisson(std::mt19937_64& rng, double lambda) {
    if (lambda <= 0) return 0;
    if (lambda < 64) {
        const double limit = std::exp(-lambda);
        double p = 1.0;
        std::uint64_t n = 0;
        do {
            ++n;
            p *= uniform01(rng);
        } while (p > limit);
        return n - 1;
    }
    const double v = lambda + std::sqrt(lambda) * standard_normal(rng) + 0.5;
    return v < 0 ? 0 : static_cast<std::uint64_t>(v);
}

// Dst address of the rank-th legit flow (10.0.0.0/8 block).
inline std::uint32_t legit_dst_ip(std::uint64_t rank) {
    return (10u << 24) | static_cast<std::uint32_t>(rank & 0xFFFFFF);
}

// Src address of the rank-th legit host (172.16.0.0/12 block).
inline std::uint32_t legit_src_ip(std::uint64_t rank) {
    return (172u << 24) | (16u << 16) | static_cast<std::uint32_t>(rank & 0xFFFF) |
           (static_cast<std::uint32_t>((rank >> 16) & 0x0F) << 16);
}

// Src address of the i-th spoofed attack source (198.0.0.0/8 block).
inline std::uint32_t attack_src_ip(std::uint64_t i) {
    return (198u << 24) | static_cast<std::uint32_t>(i & 0xFFFFFF);
}

class ZipfSampler {
public:
    ZipfSampler(std::uint64_t n, double exponent) : cdf_(n) {
        double acc = 0;
        for (std::uint64_t r = 0; r < n; ++r) {
            acc += std::pow(static_cast<double>(r + 1), -exponent);
            cdf_[r] = acc;
        }
    }

    // Rank in [0, active_n), Zipf-distributed over the truncated population.
    std::uint64_t sample(std::mt19937_64& rng, std::uint64_t active_n) const {
        const double u = uniform01(rng) * cdf_[active_n - 1];
        const auto it = std::lower_bound(cdf_.begin(), cdf_.begin() + active_n, u);
        return static_cast<std::uint64_t>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

}  // namespace detail

// Deterministic synthetic trace: per-second Poisson record counts with
// uniform intra-second placement, Zipf-distributed destinations over the
// legit flow population, uniform sources. A booter attack injects its own
// Poisson stream of spoofed-source records towards the victim (every
// configured source is guaranteed to appear when volume allows); a botnet
// attack rewrites a Bernoulli(ATP) share of legit destinations to the
// victim, leaving record count and source population untouched. Records
// carry ground-truth labels and come out sorted by timestamp.
inline std::vector<FlowRecord> generate_trace(const TraceSpec& spec) {
    validate(spec);
    std::mt19937_64 rng(spec.seed);
    // independent stream for attack decisions: injecting or rewriting
    // never perturbs the legit draw sequence, so the same seed with and
    // without an attack block yields pairwise-matching legit records
    std::mt19937_64 attack_rng(0xA77AC4ull ^ (spec.seed * 0x9E3779B97F4A7C15ull));
    const detail::ZipfSampler zipf(spec.legit.n_flows, spec.legit.zipf_exponent);

    std::vector<FlowRecord> out;
    out.reserve(static_cast<std::size_t>(
        spec.duration_s * (spec.legit.pps +
                           (spec.attack && spec.attack->kind == AttackKind::booter
                                ? spec.attack->pps
                                : 0)) *
        1.05));

    std::vector<FlowRecord> second;
    const auto whole_seconds = static_cast<std::uint64_t>(std::ceil(spec.duration_s));
    for (std::uint64_t t = 0; t < whole_seconds; ++t) {
        const double span = std::min(1.0, spec.duration_s - static_cast<double>(t));
        second.clear();

        std::uint64_t active_n = spec.legit.n_flows;
        if (spec.legit.churn > 0) {
            const double scale = 1.0 - spec.legit.churn * detail::uniform01(rng);
            active_n = std::max<std::uint64_t>(
                1, static_cast<std::uint64_t>(std::llround(scale * spec.legit.n_flows)));
        }

        const std::uint64_t n_legit = detail::sample_poisson(rng, spec.legit.pps * span);
        for (std::uint64_t i = 0; i < n_legit; ++i) {
            FlowRecord r;
            r.ts_us = t * 1000000 +
                      static_cast<std::uint64_t>(detail::uniform01(rng) * 999999.0 * span);
            r.dst_ip = detail::legit_dst_ip(zipf.sample(rng, active_n));
            r.src_ip = detail::legit_src_ip(rng() % spec.legit.n_flows);
            second.push_back(r);
        }

        if (spec.attack) {
            const AttackProfile& a = *spec.attack;
            const bool in_window = static_cast<double>(t) + span > a.start_s;
            if (in_window && a.kind == AttackKind::botnet) {
                for (FlowRecord& r : second) {
                    if (r.ts_us < static_cast<std::uint64_t>(a.start_s * 1e6)) continue;
                    if (detail::uniform01(attack_rng) <= a.attack_traffic_proportion) {
                        r.dst_ip = a.victim_ip;
                        r.label = Label::attack;
                    }
                }
            }
            if (in_window && a.kind == AttackKind::booter) {
                const double att_span =
                    std::min(static_cast<double>(t) + span, spec.duration_s) -
                    std::max(static_cast<double>(t), a.start_s);
                const std::uint64_t n_att = detail::sample_poisson(attack_rng, a.pps * att_span);
                const double att_t0 = std::max(static_cast<double>(t), a.start_s);
                for (std::uint64_t i = 0; i < n_att; ++i) {
                    FlowRecord r;
                    r.ts_us = static_cast<std::uint64_t>(
                        att_t0 * 1e6 + detail::uniform01(attack_rng) * 999999.0 * att_span);
                    // cycle through every source first so the configured
                    // cardinality is realized, then draw uniformly
                    const std::uint64_t s =
                        i < a.n_attack_sources ? i : attack_rng() % a.n_attack_sources;
                    r.src_ip = detail::attack_src_ip(s);
                    r.dst_ip = a.victim_ip;
                    r.label = Label::attack;
                    second.push_back(r);
                }
            }
        }

        std::sort(second.begin(), second.end(),
                  [](const FlowRecord& a, const FlowRecord& b) { return a.ts_us < b.ts_us; });
        out.insert(out.end(), second.begin(), second.end());
    }
    return out;
}

inline const char* kTraceCsvHeader = "ts_us,src_ip,dst_ip,label";

inline void write_trace(std::ostream& os, std::span<const FlowRecord> records) {
    os << kTraceCsvHeader << '\n';
    for (const FlowRecord& r : records) {
        os << r.ts_us << ',' << format_ipv4(r.src_ip) << ',' << format_ipv4(r.dst_ip) << ','
           << (r.label == Label::attack ? "attack" : "legit") << '\n';
    }
}

inline void write_trace(const std::string& path, std::span<const FlowRecord> records) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open trace file for writing: " + path);
    write_trace(os, records);
    if (!os.flush()) throw std::runtime_error("failed writing trace file: " + path);
}

// Parses the CSV trace format, rejecting malformed lines and timestamp
// regressions with the offending line number.
inline std::vector<FlowRecord> read_trace(std::istream& is, const std::string& name = "trace") {
    std::vector<FlowRecord> out;
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) {
        throw std::runtime_error(name + ":" + std::to_string(line_no) + ": " + why);
    };
    if (!std::getline(is, line)) return out;  // empty file -> empty stream
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceCsvHeader) fail("expected header '" + std::string(kTraceCsvHeader) + "'");
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        const std::size_t c3 = c2 == std::string::npos ? c2 : line.find(',', c2 + 1);
        if (c3 == std::string::npos) fail("expected 4 comma-separated fields");
        FlowRecord r;
        const std::string_view ts_field(line.data(), c1);
        if (ts_field.empty()) fail("empty timestamp");
        for (char c : ts_field)
            if (c < '0' || c > '9') fail("non-numeric timestamp '" + std::string(ts_field) + "'");
        r.ts_us = std::stoull(std::string(ts_field));
        try {
            r.src_ip = parse_ipv4(std::string_view(line.data() + c1 + 1, c2 - c1 - 1));
            r.dst_ip = parse_ipv4(std::string_view(line.data() + c2 + 1, c3 - c2 - 1));
        } catch (const std::runtime_error& e) {
            fail(e.what());
        }
        const std::string_view label(line.data() + c3 + 1, line.size() - c3 - 1);
        if (label == "legit")
            r.label = Label::legit;
        else if (label == "attack")
            r.label = Label::attack;
        else
            fail("unknown label '" + std::string(label) + "'");
        if (!out.empty() && r.ts_us < out.back().ts_us) fail("timestamp regression");
        out.push_back(r);
    }
    return out;
}

inline std::vector<FlowRecord> read_trace(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open trace file: " + path);
    return read_trace(is, path);
}

struct IntervalBatch {
    std::uint64_t index = 0;
    std::span<const FlowRecord> records;

    bool contains_attack() const {
        for (const FlowRecord& r : records)
            if (r.label == Label::attack) return true;
        return false;
    }
};

// Partitions an ordered record stream into fixed-width time windows;
// batch b holds timestamps in [b*interval, (b+1)*interval). Interior
// empty intervals are emitted so downstream consumers still advance.
inline std::vector<IntervalBatch> split_intervals(std::span<const FlowRecord> records,
                                                  std::uint64_t interval_us) {
    if (interval_us == 0) throw std::invalid_argument("split_intervals: interval must be positive");
    std::vector<IntervalBatch> out;
    if (records.empty()) return out;
    const std::uint64_t last = records.back().ts_us / interval_us;
    std::size_t pos = 0;
    for (std::uint64_t b = 0; b <= last; ++b) {
        const std::uint64_t end_ts = (b + 1) * interval_us;
        std::size_t begin = pos;
        while (pos < records.size() && records[pos].ts_us < end_ts) ++pos;
        out.push_back({b, records.subspan(begin, pos - begin)});
    }
    return out;
}

}  // namespace p4entropy
