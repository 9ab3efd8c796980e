#include <catch2/catch_amalgamated.hpp>

#include "personaforge/token_estimator.hpp"
#include "personaforge/util.hpp"
#include "test_helpers.hpp"

#include <nlohmann/json.hpp>

#include <random>

using namespace personaforge;

TEST_CASE("estimate_tokens trivial cases", "[estimator]") {
    TokenEstimator est;
    CHECK(est.estimate("") == 0);
    CHECK(est.estimate("word") == 1);
    CHECK(est.estimate("two words") == 2);
}

TEST_CASE("estimate_tokens is monotone under append", "[estimator]") {
    TokenEstimator est;
    std::mt19937_64 rng(7);
    const std::string alphabet = "abc defg. hi,\njklmnop q ";
    for (int trial = 0; trial < 200; ++trial) {
        std::string s;
        long prev = 0;
        for (int step = 0; step < 30; ++step) {
            s.push_back(alphabet[rng() % alphabet.size()]);
            long cur = est.estimate(s);
            CHECK(cur >= prev);
            prev = cur;
        }
    }
}

TEST_CASE("estimator stays within +0%/+20% of the frozen reference counts", "[estimator]") {
    TokenEstimator est;
    auto counts = nlohmann::json::parse(
        read_file(testutil::data_dir() / "calibration" / "reference_counts.json"));
    REQUIRE(counts.size() >= 10);
    for (const auto& [name, ref_json] : counts.items()) {
        long ref = ref_json.get<long>();
        std::string text = read_file(testutil::data_dir() / "calibration" / name);
        INFO(name << " reference=" << ref);
        // The frozen counts must match the in-test oracle on the same rule.
        CHECK(testutil::reference_token_count(text) == ref);
        long estimate = est.estimate(text);
        CHECK(estimate >= ref);
        CHECK(static_cast<double>(estimate) <= 1.2 * static_cast<double>(ref));
    }
}

TEST_CASE("a document with reference count 19302 is flagged against a 16385 limit", "[estimator]") {
    // Build prose whose reference count lands exactly on 19302, then pad
    // word by word if the sentence granularity overshoots.
    const std::string sentence = "The combined material for this request keeps growing today. ";
    std::string doc;
    while (testutil::reference_token_count(doc + sentence) <= 19302 - 1)
        doc += sentence;
    while (testutil::reference_token_count(doc) < 19302)
        doc += " pad";
    REQUIRE(testutil::reference_token_count(doc) == 19302);

    TokenEstimator est;
    long estimate = est.estimate(doc);
    CHECK(estimate >= 19302);
    CHECK(estimate > 16385); // over the context limit, so the gate must flag it
}

TEST_CASE("inflation factor scales the estimate and exact hook overrides", "[estimator]") {
    TokenEstimator base;
    TokenEstimator inflated;
    inflated.inflation = 1.5;
    std::string text = "ordinary prose with several words in it";
    CHECK(inflated.estimate(text) > base.estimate(text));

    TokenEstimator hooked;
    hooked.exact_hook = [](std::string_view) { return 12345L; };
    CHECK(hooked.estimate(text) == 12345);
}

TEST_CASE("estimate is deterministic", "[estimator]") {
    TokenEstimator est;
    std::string text = read_file(testutil::data_dir() / "calibration" / "doc01_narrative.txt");
    CHECK(est.estimate(text) == est.estimate(text));
}
