#include <catch2/catch_amalgamated.hpp>

#include "personaforge/config.hpp"
#include "personaforge/corpus.hpp"
#include "test_helpers.hpp"

#include <filesystem>
#include <fstream>
#include <random>

using namespace personaforge;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> fixture_paths() {
    std::vector<std::string> paths;
    for (int i = 1; i <= 3; ++i)
        paths.push_back((testutil::data_dir() / "corpus" /
                         ("interview_0" + std::to_string(i) + ".txt"))
                            .string());
    return paths;
}

Interview make_interview(std::string text) {
    Interview iv;
    iv.interview_id = "iv";
    iv.cleaned_text = std::move(text);
    return iv;
}

// Deterministic synthetic prose with paragraphs and punctuation.
std::string random_text(std::mt19937_64& rng, size_t word_count) {
    static const char* vocab[] = {"field",   "signal", "harvest", "window", "advice",  "network",
                                  "notebook", "filter", "market",  "winter", "machine", "village",
                                  "question", "answer", "morning", "record", "pattern", "garden"};
    std::string out;
    size_t words = 0;
    size_t sentence_len = 0;
    size_t target = 3 + rng() % 18;
    while (words < word_count) {
        if (!out.empty())
            out += ' ';
        out += vocab[rng() % (sizeof(vocab) / sizeof(vocab[0]))];
        ++words;
        ++sentence_len;
        if (sentence_len >= target) {
            out += (rng() % 5 == 0) ? '!' : '.';
            sentence_len = 0;
            target = 3 + rng() % 18;
            if (rng() % 6 == 0)
                out += "\n\n";
        }
    }
    return out;
}

} // namespace

TEST_CASE("clean_text drops rule lines and squeezes whitespace", "[corpus]") {
    std::vector<CleaningRule> rules = default_cleaning_rules();
    std::string raw = "[Recording starts]\nINTERVIEWER: first question?\nAn answer   with  spaces.\n\n\n\nNext paragraph.";
    std::string cleaned = clean_text(raw, rules);
    CHECK(cleaned == "An answer with spaces.\n\nNext paragraph.");
}

TEST_CASE("ingest builds one interview per path in path order", "[corpus]") {
    auto interviews = ingest(fixture_paths(), default_cleaning_rules());
    REQUIRE(interviews.size() == 3);
    CHECK(interviews[0].interview_id == "interview_01");
    CHECK(interviews[2].interview_id == "interview_03");
    for (const auto& iv : interviews) {
        CHECK(!iv.cleaned_text.empty());
        CHECK(iv.cleaned_text.find("INTERVIEWER:") == std::string::npos);
        CHECK(iv.cleaned_text.find("[Recording") == std::string::npos);
    }
}

TEST_CASE("ingest error paths", "[corpus]") {
    SECTION("unreadable file names the path") {
        CHECK_THROWS_WITH(ingest({"/nonexistent/file.txt"}, {}),
                          Catch::Matchers::ContainsSubstring("/nonexistent/file.txt"));
    }
    SECTION("file that cleans to nothing") {
        auto tmp = fs::temp_directory_path() / "pf_empty_interview.txt";
        std::ofstream(tmp) << "[Recording starts. Nothing else.]\n";
        CHECK_THROWS_WITH(ingest({tmp.string()}, default_cleaning_rules()),
                          Catch::Matchers::ContainsSubstring("empty after cleaning"));
        fs::remove(tmp);
    }
    SECTION("empty path list is not an error") {
        CHECK(ingest({}, {}).empty());
    }
}

TEST_CASE("chunk keeps a short text whole", "[corpus]") {
    std::mt19937_64 rng(1);
    auto iv = make_interview(random_text(rng, 100));
    auto chunks = chunk(iv, 600, 1800);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].word_count == 100);
    CHECK(chunks[0].sequence_index == 0);
}

TEST_CASE("chunk splits long texts on sentence boundaries within bounds", "[corpus]") {
    std::mt19937_64 rng(2);
    auto iv = make_interview(random_text(rng, 3600));
    auto chunks = chunk(iv, 600, 1800);
    REQUIRE(chunks.size() >= 2);
    std::string rejoined;
    for (size_t i = 0; i < chunks.size(); ++i) {
        CHECK(chunks[i].sequence_index == static_cast<int>(i));
        CHECK(chunks[i].word_count <= 1800);
        if (i + 1 < chunks.size())
            CHECK(chunks[i].word_count >= 600);
        CHECK(static_cast<size_t>(chunks[i].word_count) == count_words(chunks[i].text));
        rejoined += chunks[i].text + " ";
    }
    CHECK(testutil::same_modulo_whitespace(rejoined, iv.cleaned_text));
}

TEST_CASE("chunk partition property over randomized texts", "[corpus][property]") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 60; ++trial) {
        int min_words = 20 + static_cast<int>(rng() % 180);
        int max_words = min_words + 30 + static_cast<int>(rng() % 900);
        size_t size = 30 + rng() % 4000;
        auto iv = make_interview(random_text(rng, size));
        auto chunks = chunk(iv, min_words, max_words);
        REQUIRE(!chunks.empty());
        std::string rejoined;
        for (size_t i = 0; i < chunks.size(); ++i) {
            INFO("trial " << trial << " chunk " << i << " min " << min_words << " max " << max_words);
            CHECK(chunks[i].word_count <= max_words);
            if (i + 1 < chunks.size())
                CHECK(chunks[i].word_count >= min_words);
            rejoined += chunks[i].text + " ";
        }
        CHECK(testutil::same_modulo_whitespace(rejoined, iv.cleaned_text));
    }
}

TEST_CASE("chunk rejects bad arguments", "[corpus]") {
    auto iv = make_interview("some text here.");
    CHECK_THROWS_AS(chunk(iv, 0, 100), std::invalid_argument);
    CHECK_THROWS_AS(chunk(iv, 200, 100), std::invalid_argument);
    CHECK_THROWS_AS(chunk(make_interview(""), 10, 100), CorpusError);
}

TEST_CASE("build_manifest is deterministic apart from the timestamp", "[corpus]") {
    auto a = build_manifest(fixture_paths(), default_cleaning_rules(), 150, 300);
    auto b = build_manifest(fixture_paths(), default_cleaning_rules(), 150, 300);
    auto ja = manifest_to_json(a);
    auto jb = manifest_to_json(b);
    ja["created_at"] = "";
    jb["created_at"] = "";
    CHECK(ja == jb);
    CHECK(a.corpus_id == b.corpus_id);

    // round-trip
    auto back = manifest_from_json(manifest_to_json(a));
    CHECK(back.chunks.size() == a.chunks.size());
    CHECK(back.interviews.size() == 3);
}

TEST_CASE("manifest chunks all reference known interviews", "[corpus]") {
    auto m = build_manifest(fixture_paths(), default_cleaning_rules(), 150, 300);
    for (const auto& c : m.chunks) {
        bool found = false;
        for (const auto& iv : m.interviews)
            found = found || iv.interview_id == c.interview_id;
        CHECK(found);
    }
    CHECK(m.chunks.size() >= 3);
}
