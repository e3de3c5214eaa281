#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "p4entropy/frequency.hpp"
#include "p4entropy/hash.hpp"

using namespace p4entropy;

namespace {

std::array<std::uint8_t, 8> key_bytes(std::uint64_t v) {
    std::array<std::uint8_t, 8> k;
    for (int i = 0; i < 8; ++i) k[i] = static_cast<std::uint8_t>(v >> (8 * i));
    return k;
}

std::int64_t row_sum(const FreqSketch& sk, std::size_t r) {
    std::int64_t s = 0;
    for (std::int64_t c : sk.row(r)) s += c;
    return s;
}

}  // namespace

TEST_CASE("a single count-min update touches exactly one counter per row", "[frequency]") {
    FreqSketch sk(SketchVariant::count_min, 5, 50, 3);
    sk.update(key_bytes(7));
    for (std::size_t r = 0; r < 5; ++r) {
        std::size_t nonzero = 0;
        for (std::int64_t c : sk.row(r)) {
            if (c != 0) {
                ++nonzero;
                CHECK(c == 1);
            }
        }
        CHECK(nonzero == 1);
    }
}

TEST_CASE("count-min row sums equal the number of updates", "[frequency]") {
    FreqSketch sk(SketchVariant::count_min, 5, 64, 5);
    std::mt19937_64 rng(5);
    const std::uint64_t updates = 5000;
    for (std::uint64_t i = 0; i < updates; ++i) sk.update(key_bytes(rng() % 300));
    for (std::size_t r = 0; r < 5; ++r) CHECK(row_sum(sk, r) == static_cast<std::int64_t>(updates));
}

TEST_CASE("two distinct keys raise every row sum to two", "[frequency]") {
    FreqSketch sk(SketchVariant::count_min, 5, 1000, 11);
    sk.update(key_bytes(1));
    sk.update(key_bytes(2));
    for (std::size_t r = 0; r < 5; ++r) CHECK(row_sum(sk, r) == 2);
}

TEST_CASE("count variant writes a consistent sign", "[frequency]") {
    FreqSketch sk(SketchVariant::count, 5, 100, 7);
    sk.update(key_bytes(9));
    sk.update(key_bytes(9));
    for (std::size_t r = 0; r < 5; ++r) {
        std::int64_t seen = 0;
        for (std::int64_t c : sk.row(r))
            if (c != 0) seen = c;
        CHECK((seen == 2 || seen == -2));
    }
    CHECK(sk.query(key_bytes(9)) == 2);
}

TEST_CASE("query of a never-inserted key on a fresh sketch is 0", "[frequency]") {
    for (SketchVariant v : {SketchVariant::count_min, SketchVariant::count}) {
        FreqSketch sk(v, 5, 2000, 1);
        CHECK(sk.query(key_bytes(12345)) == 0);
    }
}

TEST_CASE("count-min never underestimates", "[frequency]") {
    std::mt19937_64 rng(13);
    for (int round = 0; round < 5; ++round) {
        FreqSketch sk(SketchVariant::count_min, 5, 500, 100 + round);
        std::map<std::uint64_t, std::uint64_t> exact;
        for (int i = 0; i < 20000; ++i) {
            const std::uint64_t key = rng() % 2000;
            sk.update(key_bytes(key));
            ++exact[key];
        }
        for (const auto& [key, f] : exact) CHECK(sk.query(key_bytes(key)) >= f);
    }
}

TEST_CASE("identical seed and stream give bit-identical counters", "[frequency]") {
    for (SketchVariant v : {SketchVariant::count_min, SketchVariant::count}) {
        FreqSketch a(v, 5, 2000, 42), b(v, 5, 2000, 42);
        std::mt19937_64 rng(21);
        for (int i = 0; i < 10000; ++i) {
            const auto key = key_bytes(rng() % 1000);
            a.update(key);
            b.update(key);
        }
        const auto ca = a.counters(), cb = b.counters();
        REQUIRE(ca.size() == cb.size());
        CHECK(std::equal(ca.begin(), ca.end(), cb.begin()));
    }
}

TEST_CASE("count-sketch error concentrates within the L2 envelope", "[frequency]") {
    // Zipfian stream, exact map as oracle
    std::mt19937_64 rng(31);
    FreqSketch sk(SketchVariant::count, 5, 2000, 77);
    std::map<std::uint64_t, std::uint64_t> exact;
    std::vector<double> weights;
    const std::uint64_t n_keys = 10000;
    for (std::uint64_t k = 1; k <= n_keys; ++k) weights.push_back(std::pow(double(k), -1.1));
    std::vector<double> cdf(weights.size());
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) cdf[i] = (acc += weights[i]);
    for (int i = 0; i < 460000; ++i) {
        const double u = (rng() >> 11) * 0x1.0p-53 * acc;
        const std::uint64_t key =
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        sk.update(key_bytes(key));
        ++exact[key];
    }
    double l2 = 0;
    for (const auto& [key, f] : exact) l2 += double(f) * double(f);
    const double envelope = 3.0 * std::sqrt(l2 / 2000.0);
    std::size_t outside = 0;
    for (const auto& [key, f] : exact) {
        const double err = std::abs(double(sk.query(key_bytes(key))) - double(f));
        if (err > envelope) ++outside;
    }
    CHECK(double(outside) / double(exact.size()) < 0.05);
}

TEST_CASE("count-sketch signed error is near zero on average", "[frequency]") {
    // per-key counts sit far above the collision noise floor so the
    // nonnegativity clamp never engages; 20 seeds x 500 keys = 10^4
    // measurements
    std::mt19937_64 rng(37);
    const std::uint64_t n_keys = 500;
    const std::uint64_t per_key = 100;
    double signed_err = 0;
    for (int round = 0; round < 20; ++round) {
        FreqSketch sk(SketchVariant::count, 5, 2000, 9000 + round);
        std::vector<std::uint64_t> order;
        for (std::uint64_t k = 0; k < n_keys; ++k)
            for (std::uint64_t j = 0; j < per_key; ++j) order.push_back(k);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::uint64_t k : order) sk.update(key_bytes(k));
        for (std::uint64_t k = 0; k < n_keys; ++k)
            signed_err += double(sk.query(key_bytes(k))) - double(per_key);
    }
    CHECK(std::abs(signed_err / double(20 * n_keys)) < 0.02 * double(per_key));
}

TEST_CASE("negative count-sketch medians clamp to zero", "[frequency]") {
    // flood the sketch, then look for an absent key whose median is negative
    std::mt19937_64 rng(41);
    FreqSketch sk(SketchVariant::count, 4, 50, 3);  // even row count: lower median
    for (int i = 0; i < 5000; ++i) sk.update(key_bytes(rng() % 100));
    bool found = false;
    for (std::uint64_t probe = 1000; probe < 4000; ++probe) {
        const std::uint64_t q = sk.query(key_bytes(probe));
        if (q == 0) found = true;
    }
    CHECK(found);
}

TEST_CASE("reset zeroes counters but keeps seeds", "[frequency]") {
    FreqSketch sk(SketchVariant::count_min, 5, 100, 5);
    sk.update(key_bytes(3));
    FreqSketch twin(SketchVariant::count_min, 5, 100, 5);
    sk.reset();
    sk.update(key_bytes(4));
    twin.update(key_bytes(4));
    CHECK(std::equal(sk.counters().begin(), sk.counters().end(), twin.counters().begin()));
}

TEST_CASE("constructor validates the grid", "[frequency]") {
    CHECK_THROWS_AS(FreqSketch(SketchVariant::count, 0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(FreqSketch(SketchVariant::count, 5, 0, 1), std::invalid_argument);
    CHECK(parse_sketch_variant("count_min") == SketchVariant::count_min);
    CHECK(parse_sketch_variant("count") == SketchVariant::count);
    CHECK_THROWS_AS(parse_sketch_variant("bogus"), std::invalid_argument);
}
