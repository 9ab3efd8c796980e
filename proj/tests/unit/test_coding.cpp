#include <catch2/catch_amalgamated.hpp>

#include "personaforge/coding.hpp"
#include "personaforge/mock_backend.hpp"
#include "test_helpers.hpp"

#include <nlohmann/json.hpp>

using namespace personaforge;

namespace {

TranscriptChunk make_chunk(std::string text, const std::string& id = "iv01-c000") {
    TranscriptChunk c;
    c.chunk_id = id;
    c.interview_id = id.substr(0, id.find('-'));
    c.sequence_index = 0;
    c.text = std::move(text);
    c.word_count = static_cast<int>(count_words(c.text));
    return c;
}

CorpusManifest synthetic_manifest(int interviews, int chunks_per_interview) {
    CorpusManifest m;
    m.corpus_id = "corpus-test";
    for (int i = 0; i < interviews; ++i) {
        Interview iv;
        iv.interview_id = "iv" + std::to_string(i);
        m.interviews.push_back(iv);
        for (int c = 0; c < chunks_per_interview; ++c) {
            TranscriptChunk ch;
            ch.interview_id = iv.interview_id;
            ch.sequence_index = c;
            ch.chunk_id = iv.interview_id + "-c" + std::to_string(c);
            ch.text = "The first habit is checking the weather before breakfast. "
                      "A second habit involves writing numbers into the margin. "
                      "Nothing beats asking the neighbour over the fence. "
                      "Batteries always die on the coldest morning of interview " +
                      std::to_string(i) + " part " + std::to_string(c) + ".";
            ch.word_count = static_cast<int>(count_words(ch.text));
            m.chunks.push_back(std::move(ch));
        }
    }
    return m;
}

ModelProfile quick_profile() {
    ModelProfile p;
    p.max_attempts = 1;
    return p;
}

} // namespace

TEST_CASE("default kind specs carry the coding definitions", "[coding]") {
    const auto& specs = default_kind_specs();
    REQUIRE(specs.size() == 4);
    CHECK(kind_spec(CodeKind::Goal).definition.find(
              "User goals are the specific objectives or intentions") == 0);
    CHECK(kind_spec(CodeKind::PersonalityTrait).top_key == "traits");
    CHECK(kind_spec(CodeKind::Behaviour).top_key == "behaviours");
    CHECK(kind_spec(CodeKind::Frustration).definition.find("Frustrations are feelings of "
                                                           "dissatisfaction") == 0);
    for (const auto& s : specs) {
        CHECK(!s.definition.empty());
        CHECK(kind_from_key(s.top_key) == s.kind);
    }
}

TEST_CASE("build_coding_prompt lays out definition, instruction, format, chunk", "[coding]") {
    auto chunk = make_chunk("The respondent said something quotable here.");
    const auto& goal = kind_spec(CodeKind::Goal);
    std::string prompt = build_coding_prompt(chunk, goal, 4);

    size_t def = prompt.find(goal.definition);
    size_t identify = prompt.find("Identify up to 4 relevant user goals");
    size_t format = prompt.find("Format the response as a json file");
    size_t key = prompt.find("keep them together in 'goals'");
    size_t text = prompt.find("```" + chunk.text + "```");
    REQUIRE(def != std::string::npos);
    REQUIRE(identify != std::string::npos);
    REQUIRE(format != std::string::npos);
    REQUIRE(key != std::string::npos);
    REQUIRE(text != std::string::npos);
    CHECK(def < identify);
    CHECK(identify < format);
    CHECK(format < text);
    CHECK(prompt.find("no longer than 4 lines") != std::string::npos);

    // ends byte-exact with the delimited chunk
    std::string tail = "```" + chunk.text + "```";
    REQUIRE(prompt.size() >= tail.size());
    CHECK(prompt.compare(prompt.size() - tail.size(), tail.size(), tail) == 0);

    CHECK(build_coding_prompt(chunk, kind_spec(CodeKind::PersonalityTrait), 4)
              .find("keep them together in 'traits'") != std::string::npos);
    CHECK_THROWS_AS(build_coding_prompt(chunk, goal, 0), std::invalid_argument);
}

TEST_CASE("parse_codes maps entries and enforces bounds", "[coding]") {
    auto chunk = make_chunk("Quote one lives here. Quote two as well.");
    const auto& traits = kind_spec(CodeKind::PersonalityTrait);

    SECTION("valid document with three entries") {
        nlohmann::json doc = {{"traits", nlohmann::json::array()}};
        for (int i = 0; i < 3; ++i)
            doc["traits"].push_back({{"name", "Trait " + std::to_string(i)},
                                     {"description", "Detail " + std::to_string(i)},
                                     {"quote", "Quote one lives here."}});
        auto out = parse_codes(doc.dump(), traits, chunk, 4);
        REQUIRE(out.ok());
        REQUIRE(out.value().codes.size() == 3);
        for (const auto& c : out.value().codes) {
            CHECK(c.kind == CodeKind::PersonalityTrait);
            REQUIRE(c.provenance.size() == 1);
            CHECK(c.provenance[0].first == "iv01");
            CHECK(c.provenance[0].second == "iv01-c000");
        }
    }
    SECTION("six entries truncate to max_codes with a warning") {
        nlohmann::json doc = {{"traits", nlohmann::json::array()}};
        for (int i = 0; i < 6; ++i)
            doc["traits"].push_back(
                {{"name", "T" + std::to_string(i)}, {"description", "D"}, {"quote", ""}});
        auto out = parse_codes(doc.dump(), traits, chunk, 4);
        REQUIRE(out.ok());
        CHECK(out.value().codes.size() == 4);
        REQUIRE(!out.value().warnings.empty());
        CHECK(out.value().warnings[0].find("truncated") != std::string::npos);
    }
    SECTION("markdown fenced json still parses") {
        std::string fenced = "Here you go:\n```json\n{\"traits\": [{\"name\": \"N\", "
                             "\"description\": \"D\", \"quote\": \"Q\"}]}\n```";
        auto out = parse_codes(fenced, traits, chunk, 4);
        REQUIRE(out.ok());
        CHECK(out.value().codes.size() == 1);
    }
    SECTION("failure modes are MalformedResponse") {
        CHECK_FALSE(parse_codes("not json at all", traits, chunk, 4).ok());
        CHECK_FALSE(parse_codes("{\"wrong_key\": []}", traits, chunk, 4).ok());
        CHECK_FALSE(parse_codes("{\"traits\": []}", traits, chunk, 4).ok());
        CHECK_FALSE(parse_codes("{\"traits\": [{\"name\": \"\", \"description\": \"\"}]}", traits,
                                chunk, 4)
                        .ok());
        auto err = parse_codes("garbage", traits, chunk, 4);
        CHECK(err.error().kind == ErrorKind::MalformedResponse);
    }
}

TEST_CASE("code artifacts round-trip through json unchanged", "[coding]") {
    Code c;
    c.code_id = "iv01-c000:behaviours:0";
    c.kind = CodeKind::Behaviour;
    c.name = "Validation";
    c.description = "The user uses digital tools to locate problems but validates them by going "
                    "to the field to ensure that the problem is correctly identified.";
    c.quote = "But then I also go to the field to to validate what is a problem, because obviously "
              "digital toll can you tell you a lot but sometimes it's not enough.";
    c.provenance = {{"iv01", "iv01-c000"}};

    auto once = codes_from_json(codes_to_json({c}));
    REQUIRE(once.size() == 1);
    auto twice = codes_from_json(codes_to_json(once));
    REQUIRE(twice.size() == 1);
    CHECK(twice[0].code_id == c.code_id);
    CHECK(twice[0].kind == c.kind);
    CHECK(twice[0].name == c.name);
    CHECK(twice[0].description == c.description);
    CHECK(twice[0].quote == c.quote);
    CHECK(twice[0].provenance == c.provenance);
    CHECK(codes_to_json({c}) == codes_to_json(twice));
}

TEST_CASE("code_corpus attempts every (chunk, kind) pair", "[coding]") {
    auto manifest = synthetic_manifest(10, 3); // 30 chunks
    MockBackend mock;
    Gateway gateway(mock, quick_profile());
    auto result = code_corpus(manifest, default_kind_specs(), gateway, 4);
    CHECK(mock.calls("code") == 120);
    CHECK(result.report.counts.at("pairs") == 120);
    CHECK(result.report.failures.empty());
    long total = 0;
    for (const auto& [kind, codes] : result.by_kind) {
        CHECK(!codes.empty());
        total += static_cast<long>(codes.size());
        for (const auto& c : codes)
            CHECK(c.kind == kind);
    }
    CHECK(result.report.counts.at("codes_total") == total);
    CHECK(total <= 120 * 4);
}

TEST_CASE("code_corpus on an empty manifest makes no calls", "[coding]") {
    CorpusManifest manifest;
    MockBackend mock;
    Gateway gateway(mock, quick_profile());
    auto result = code_corpus(manifest, default_kind_specs(), gateway, 4);
    CHECK(mock.total_calls() == 0);
    CHECK(result.by_kind.empty());
}

TEST_CASE("one failing pair of 120 is recorded, not fatal", "[coding]") {
    auto manifest = synthetic_manifest(10, 3);
    MockBackend mock;
    mock.add_fault({"code", 17, 1, ErrorKind::ProviderRejection, "scripted failure"});
    Gateway gateway(mock, quick_profile());
    auto result = code_corpus(manifest, default_kind_specs(), gateway, 4);
    CHECK(result.report.failures.size() == 1);
    CHECK(result.report.counts.at("failed_pairs") == 1);
}

TEST_CASE("exceeding the failure fraction aborts the stage", "[coding]") {
    auto manifest = synthetic_manifest(2, 2);
    MockBackend mock;
    mock.add_fault({"code", 1, 999, ErrorKind::ProviderRejection, "all down"});
    Gateway gateway(mock, quick_profile());
    CHECK_THROWS_AS(code_corpus(manifest, default_kind_specs(), gateway, 4, 0.2), StageError);
}

TEST_CASE("malformed response earns exactly one reminder retry", "[coding]") {
    auto manifest = synthetic_manifest(1, 1);
    MockBackend fixture_mock;
    fixture_mock.synthesize = false;
    const auto& spec = default_kind_specs()[0];
    std::string prompt = build_coding_prompt(manifest.chunks[0], spec, 4);
    fixture_mock.add_fixture("code", prompt, "this is not json");
    std::string reminded = prompt + "\n" + json_reminder(spec.top_key);
    fixture_mock.add_fixture("code", reminded,
                             "{\"behaviours\": [{\"name\": \"Recovered\", \"description\": "
                             "\"Second try\", \"quote\": \"\"}]}");
    Gateway gateway(fixture_mock, quick_profile());
    auto result = code_corpus(manifest, {spec}, gateway, 4);
    CHECK(fixture_mock.calls("code") == 2);
    REQUIRE(result.by_kind.at(CodeKind::Behaviour).size() == 1);
    CHECK(result.by_kind.at(CodeKind::Behaviour)[0].name == "Recovered");
    bool saw_retry_warning = false;
    for (const auto& w : result.report.warnings)
        saw_retry_warning = saw_retry_warning || w.find("retrying") != std::string::npos;
    CHECK(saw_retry_warning);
}

TEST_CASE("persistently malformed response fails the pair after one retry", "[coding]") {
    auto manifest = synthetic_manifest(1, 1);
    MockBackend mock;
    mock.synthesize = false;
    const auto& spec = default_kind_specs()[0];
    std::string prompt = build_coding_prompt(manifest.chunks[0], spec, 4);
    mock.add_fixture("code", prompt, "still not json");
    mock.add_fixture("code", prompt + "\n" + json_reminder(spec.top_key), "also not json");
    Gateway gateway(mock, quick_profile());
    auto result = code_corpus(manifest, {spec}, gateway, 4, 1.0);
    CHECK(mock.calls("code") == 2); // exactly one reminder retry, then fail
    REQUIRE(result.report.failures.size() == 1);
    CHECK(result.report.failures[0].find("MalformedResponse") != std::string::npos);
}

TEST_CASE("hallucinated quotes are flagged, verbatim quotes are not", "[coding]") {
    auto chunk = make_chunk("The only honest sentence lives right here in this chunk.");
    CorpusManifest manifest;
    manifest.chunks.push_back(chunk);
    const auto& spec = kind_spec(CodeKind::Goal);
    std::string prompt = build_coding_prompt(chunk, spec, 4);

    SECTION("fabricated quote flagged as potential hallucination") {
        MockBackend mock;
        mock.synthesize = false;
        mock.add_fixture("code", prompt,
                         "{\"goals\": [{\"name\": \"Fabricated\", \"description\": \"D\", "
                         "\"quote\": \"A completely invented statement about sailing boats.\"}]}");
        Gateway gateway(mock, quick_profile());
        auto result = code_corpus(manifest, {spec}, gateway, 4);
        bool flagged = false;
        for (const auto& w : result.report.warnings)
            flagged = flagged || w.find("potential hallucination") != std::string::npos;
        CHECK(flagged);
    }
    SECTION("verbatim quote passes") {
        MockBackend mock;
        mock.synthesize = false;
        mock.add_fixture("code", prompt,
                         "{\"goals\": [{\"name\": \"Honest\", \"description\": \"D\", \"quote\": "
                         "\"The only honest sentence lives right here in this chunk.\"}]}");
        Gateway gateway(mock, quick_profile());
        auto result = code_corpus(manifest, {spec}, gateway, 4);
        for (const auto& w : result.report.warnings)
            CHECK(w.find("potential hallucination") == std::string::npos);
    }
}

TEST_CASE("code_corpus output is deterministic under the mock", "[coding]") {
    auto manifest = synthetic_manifest(3, 2);
    auto run = [&] {
        MockBackend mock;
        Gateway gateway(mock, quick_profile());
        auto result = code_corpus(manifest, default_kind_specs(), gateway, 4);
        nlohmann::json all;
        for (const auto& [kind, codes] : result.by_kind)
            all[kind_key(kind)] = codes_to_json(codes);
        return all.dump();
    };
    CHECK(run() == run());
}
