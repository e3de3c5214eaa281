#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

// End-to-end tests of the installed CLI binary. The test runner passes
// the binary location in P4E_CLI and the golden-file directory in
// P4E_DATA.

namespace {

using nlohmann::json;

std::string cli_path() {
    const char* p = std::getenv("P4E_CLI");
    REQUIRE(p != nullptr);
    return p;
}

std::string data_dir() {
    const char* p = std::getenv("P4E_DATA");
    REQUIRE(p != nullptr);
    return p;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args) {
    const std::string err_file = "/tmp/p4e_cli_stderr.txt";
    const std::string cmd = cli_path() + " " + args + " 2>" + err_file;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream ef(err_file);
    std::stringstream ss;
    ss << ef.rdbuf();
    r.err = ss.str();
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    os << content;
}

std::vector<json> json_lines(const std::string& text) {
    std::vector<json> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) out.push_back(json::parse(line));
    return out;
}

const char* kDemoSpec = R"({
    "duration_s": 6, "interval_s": 1, "seed": 11,
    "legit": {"n_flows": 300, "pps": 400, "zipf_exponent": 1.0},
    "attack": {"kind": "botnet", "start_s": 3, "attack_traffic_proportion": 0.3,
               "victim_ip": "10.99.99.99"}
})";

}  // namespace

TEST_CASE("gen writes a deterministic labeled trace", "[cli]") {
    spit("/tmp/p4e_spec.json", kDemoSpec);
    const auto r1 = run_cli("gen --spec /tmp/p4e_spec.json --out /tmp/p4e_a.csv");
    CHECK(r1.exit_code == 0);
    const auto r2 = run_cli("gen --spec /tmp/p4e_spec.json --out /tmp/p4e_b.csv");
    CHECK(r2.exit_code == 0);
    const std::string a = slurp("/tmp/p4e_a.csv");
    CHECK(a == slurp("/tmp/p4e_b.csv"));
    CHECK(a.rfind("ts_us,src_ip,dst_ip,label\n", 0) == 0);
    CHECK(a.find("attack") != std::string::npos);
}

TEST_CASE("gen rejects a spec with a missing field, naming it", "[cli]") {
    spit("/tmp/p4e_bad.json", R"({"duration_s": 2, "seed": 1, "legit": {"n_flows": 10}})");
    const auto r = run_cli("gen --spec /tmp/p4e_bad.json --out /tmp/p4e_bad.csv");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("legit.pps") != std::string::npos);
}

TEST_CASE("usage errors exit with code 2", "[cli]") {
    CHECK(run_cli("gen").exit_code == 2);             // missing required flags
    CHECK(run_cli("bogus-subcommand").exit_code == 2);
    CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("a missing trace file is a runtime failure", "[cli]") {
    const auto r = run_cli("cardinality --trace /tmp/p4e_does_not_exist.csv");
    CHECK(r.exit_code == 1);
}

TEST_CASE("a malformed trace line aborts with its location", "[cli]") {
    spit("/tmp/p4e_broken.csv", "ts_us,src_ip,dst_ip,label\n1,10.0.0.1,10.0.0.2,legit\nbroken\n");
    const auto r = run_cli("entropy --trace /tmp/p4e_broken.csv");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find(":3") != std::string::npos);
}

TEST_CASE("cardinality output matches the golden run", "[cli]") {
    const auto r = run_cli("gen --spec " + data_dir() + "/golden_spec.json --out /tmp/p4e_g.csv");
    REQUIRE(r.exit_code == 0);
    const auto c = run_cli("cardinality --trace /tmp/p4e_g.csv --k-bits 6 --seed 5");
    CHECK(c.exit_code == 0);
    CHECK(c.out == slurp(data_dir() + "/golden_cardinality.jsonl"));
}

TEST_CASE("detect output matches the golden run", "[cli]") {
    const auto r = run_cli("gen --spec " + data_dir() + "/golden_spec.json --out /tmp/p4e_g.csv");
    REQUIRE(r.exit_code == 0);
    const auto d = run_cli("detect --trace /tmp/p4e_g.csv --k-bits 6 --seed 5");
    CHECK(d.exit_code == 0);
    CHECK(d.out == slurp(data_dir() + "/golden_detect.jsonl"));

    const auto lines = json_lines(d.out);
    REQUIRE(lines.size() == 7);  // 6 intervals + summary
    for (int i = 0; i < 6; ++i) {
        CHECK(lines[i]["k"] == i + 1);
        CHECK(lines[i].contains("h_norm"));
        CHECK(lines[i].contains("lambda"));
        CHECK(lines[i].contains("alarm"));
    }
    CHECK(lines[0]["lambda"].is_null());  // no threshold exists yet
    CHECK(lines[6]["summary"] == true);
    CHECK(lines[6].contains("d_fp"));
}

TEST_CASE("entropy reports near-maximal normalized entropy for uniform flows", "[cli]") {
    spit("/tmp/p4e_uniform.json", R"({
        "duration_s": 1, "interval_s": 1, "seed": 3,
        "legit": {"n_flows": 1000, "pps": 8000, "zipf_exponent": 0.0}
    })");
    REQUIRE(run_cli("gen --spec /tmp/p4e_uniform.json --out /tmp/p4e_uniform.csv").exit_code == 0);
    const auto r = run_cli("entropy --trace /tmp/p4e_uniform.csv --k-bits 6");
    REQUIRE(r.exit_code == 0);
    const auto lines = json_lines(r.out);
    REQUIRE(lines.size() == 2);
    const double h_norm = lines[0]["h_norm"];
    CHECK(h_norm > 0.90);
    CHECK(h_norm < 1.05);
}

TEST_CASE("cardinality on a single-flow trace reports one exact flow", "[cli]") {
    std::string csv = "ts_us,src_ip,dst_ip,label\n";
    for (int i = 0; i < 32; ++i)
        csv += std::to_string(i * 1000) + ",172.16.0.1,10.0.0.1,legit\n";
    spit("/tmp/p4e_single_card.csv", csv);
    const auto r = run_cli("cardinality --trace /tmp/p4e_single_card.csv --k-bits 4");
    REQUIRE(r.exit_code == 0);
    const auto lines = json_lines(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0]["n_exact"] == 1);
    CHECK(lines[0]["n_hat"].get<std::uint64_t>() >= 1);  // small-range bias reads high
}

TEST_CASE("entropy reports zero for a single flow", "[cli]") {
    std::string csv = "ts_us,src_ip,dst_ip,label\n";
    for (int i = 0; i < 64; ++i)
        csv += std::to_string(i * 1000) + ",172.16.0.1,10.0.0.1,legit\n";
    spit("/tmp/p4e_single.csv", csv);
    const auto r = run_cli("entropy --trace /tmp/p4e_single.csv");
    REQUIRE(r.exit_code == 0);
    const auto lines = json_lines(r.out);
    CHECK(lines[0]["h_q10"] == 0);
    CHECK(lines[0]["h_norm_q10"] == 0);
}

TEST_CASE("summaries merge to the whole-trace estimate", "[cli]") {
    // flow-disjoint halves: odd-rank flows to one switch, the rest to the
    // other, emulated by two separate traces over disjoint populations
    spit("/tmp/p4e_m1.json", R"({
        "duration_s": 1, "interval_s": 1, "seed": 21,
        "legit": {"n_flows": 500, "pps": 5000, "zipf_exponent": 1.0}
    })");
    REQUIRE(run_cli("gen --spec /tmp/p4e_m1.json --out /tmp/p4e_m1.csv").exit_code == 0);

    // split by flow so each destination's packets land at exactly one
    // switch; packet-level splitting would double-count flows and show
    // the documented entropy bias instead
    const std::string whole = slurp("/tmp/p4e_m1.csv");
    std::stringstream ss(whole);
    std::string line, h1 = "", h2 = "";
    std::getline(ss, line);
    h1 = line + "\n";
    h2 = line + "\n";
    while (std::getline(ss, line)) {
        const std::size_t c2 = line.find(',', line.find(',') + 1);
        const std::size_t c3 = line.find(',', c2 + 1);
        const std::string dst = line.substr(c2 + 1, c3 - c2 - 1);
        ((std::hash<std::string>{}(dst) % 2) ? h1 : h2) += line + "\n";
    }
    spit("/tmp/p4e_h1.csv", h1);
    spit("/tmp/p4e_h2.csv", h2);

    REQUIRE(run_cli("entropy --trace /tmp/p4e_h1.csv --summary-out /tmp/p4e_s1.json "
                    "--switch-id sw1").exit_code == 0);
    REQUIRE(run_cli("entropy --trace /tmp/p4e_h2.csv --summary-out /tmp/p4e_s2.json "
                    "--switch-id sw2").exit_code == 0);

    const auto merged = run_cli("merge /tmp/p4e_s1.json /tmp/p4e_s2.json");
    REQUIRE(merged.exit_code == 0);
    const json m = json_lines(merged.out).at(0);

    const auto whole_run = run_cli("entropy --trace /tmp/p4e_m1.csv");
    REQUIRE(whole_run.exit_code == 0);
    const json w = json_lines(whole_run.out).at(0);

    CHECK(m["packets"] == w["packets"]);
    CHECK(m["n_hat"] == w["n_hat"]);  // register union over identical configs
    CHECK(std::abs(double(m["h"]) - double(w["h"])) < 0.2);

    // single summary passes through
    const auto solo = run_cli("merge /tmp/p4e_s1.json");
    CHECK(solo.exit_code == 0);
    CHECK(json_lines(solo.out).at(0).contains("h_norm_q10"));
}

TEST_CASE("merging summaries with mismatched registers exits 2", "[cli]") {
    spit("/tmp/p4e_m2.json", R"({
        "duration_s": 1, "interval_s": 1, "seed": 22,
        "legit": {"n_flows": 100, "pps": 1000, "zipf_exponent": 1.0}
    })");
    REQUIRE(run_cli("gen --spec /tmp/p4e_m2.json --out /tmp/p4e_m2.csv").exit_code == 0);
    REQUIRE(run_cli("entropy --trace /tmp/p4e_m2.csv --summary-out /tmp/p4e_sa.json")
                .exit_code == 0);
    REQUIRE(run_cli("entropy --trace /tmp/p4e_m2.csv --k-bits 8 --summary-out /tmp/p4e_sb.json")
                .exit_code == 0);
    const auto r = run_cli("merge /tmp/p4e_sa.json /tmp/p4e_sb.json");
    CHECK(r.exit_code == 2);
}

TEST_CASE("epsilon sweep through the CLI shows nonincreasing false positives", "[cli]") {
    spit("/tmp/p4e_sweep.json", R"({
        "duration_s": 20, "interval_s": 1, "seed": 31,
        "legit": {"n_flows": 2000, "pps": 5000, "zipf_exponent": 0.8, "churn": 0.25}
    })");
    REQUIRE(run_cli("gen --spec /tmp/p4e_sweep.json --out /tmp/p4e_sweep.csv").exit_code == 0);
    double prev_fp = 101.0;
    for (double eps : {0.0, 0.02, 0.05}) {
        const auto r =
            run_cli("detect --trace /tmp/p4e_sweep.csv --epsilon " + std::to_string(eps));
        REQUIRE(r.exit_code == 0);
        const auto lines = json_lines(r.out);
        const double fp = lines.back()["d_fp"];
        CHECK(fp <= prev_fp);
        prev_fp = fp;
    }
    CHECK(prev_fp == 0.0);  // by eps = 0.05
}
