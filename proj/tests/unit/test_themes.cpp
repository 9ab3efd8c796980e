#include <catch2/catch_amalgamated.hpp>

#include "personaforge/themes.hpp"
#include "test_helpers.hpp"

#include <nlohmann/json.hpp>

#include <random>
#include <set>

using namespace personaforge;

namespace {

Codebook synthetic_codebook(size_t entries, CodeKind kind = CodeKind::PersonalityTrait,
                            size_t quotes_per_entry = 1, size_t quote_words = 12) {
    Codebook book;
    book.kind = kind;
    book.raw_count = static_cast<long>(entries);
    for (size_t i = 0; i < entries; ++i) {
        MergedCode m;
        m.code_id = "code-" + std::to_string(i);
        m.name = "Topic number " + std::to_string(i);
        m.description = "Summary of the recurring pattern nr " + std::to_string(i) + ".";
        for (size_t q = 0; q < quotes_per_entry; ++q) {
            std::string quote;
            for (size_t w = 0; w < quote_words; ++w)
                quote += "word" + std::to_string((i + q + w) % 17) + " ";
            m.quotes.push_back({trim(quote), "iv" + std::to_string(i % 3), "ch" + std::to_string(i)});
        }
        book.entries.push_back(std::move(m));
    }
    return book;
}

nlohmann::json group(const std::string& name, std::vector<long> topics) {
    return {{"name", name}, {"description", "Description of " + name}, {"topics", topics}};
}

} // namespace

TEST_CASE("build_grouping_prompt interpolates the count and enumerates topics", "[themes]") {
    auto traits = synthetic_codebook(65);
    std::string p8 = build_grouping_prompt(traits, 8);
    CHECK(p8.find("Create 8 significant groups") != std::string::npos);
    CHECK(p8.find("topics can also be in more than one group") != std::string::npos);
    CHECK(p8.find("Group all the topics numbers only") != std::string::npos);
    CHECK(p8.find("Display the full list") != std::string::npos);
    CHECK(p8.find("List of topics:") != std::string::npos);
    CHECK(p8.find("\n65. ") != std::string::npos);
    CHECK(p8.find("\n66. ") == std::string::npos);

    auto goals = synthetic_codebook(20, CodeKind::Goal);
    CHECK(build_grouping_prompt(goals, 11).find("Create 11 significant groups") != std::string::npos);

    auto tiny = synthetic_codebook(3);
    std::string p = build_grouping_prompt(tiny, 2);
    size_t list_start = p.find("List of topics:");
    int numbered_lines = 0;
    for (const auto& line : split_lines(p.substr(list_start)))
        if (!line.empty() && line[0] >= '1' && line[0] <= '9')
            ++numbered_lines;
    CHECK(numbered_lines == 3);

    CHECK_THROWS_AS(build_grouping_prompt(tiny, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_grouping_prompt(Codebook{}, 4), std::invalid_argument);
}

TEST_CASE("parse_themes resolves topic numbers against the codebook", "[themes]") {
    auto book = synthetic_codebook(65);

    SECTION("eight valid groups") {
        nlohmann::json doc;
        doc["groups"] = nlohmann::json::array();
        for (long g = 0; g < 8; ++g)
            doc["groups"].push_back(group("Group " + std::to_string(g),
                                          {g * 8 + 1, g * 8 + 2, g * 8 + 3}));
        auto out = parse_themes(doc.dump(), book, 8);
        REQUIRE(out.ok());
        const auto& set = out.value().set;
        CHECK(set.themes.size() == 8);
        CHECK(set.requested_count == 8);
        for (const auto& t : set.themes) {
            CHECK(!t.meta.member_code_ids.empty());
            CHECK(t.members.size() == t.meta.member_code_ids.size());
            for (size_t m = 0; m < t.members.size(); ++m)
                CHECK(t.members[m].code_id == t.meta.member_code_ids[m]);
        }
    }
    SECTION("multi-membership keeps the topic in both groups") {
        nlohmann::json doc;
        doc["groups"] = {group("A", {1, 2}), group("B", {1, 3})};
        auto out = parse_themes(doc.dump(), book, 2);
        REQUIRE(out.ok());
        const auto& themes = out.value().set.themes;
        REQUIRE(themes.size() == 2);
        CHECK(themes[0].meta.member_code_ids[0] == "code-0");
        CHECK(themes[1].meta.member_code_ids[0] == "code-0");
    }
    SECTION("out-of-range topics are dropped with a warning") {
        nlohmann::json doc;
        doc["groups"] = {group("A", {1, 999}), group("B", {2})};
        auto out = parse_themes(doc.dump(), book, 2);
        REQUIRE(out.ok());
        CHECK(out.value().set.themes[0].meta.member_code_ids.size() == 1);
        bool warned = false;
        for (const auto& w : out.value().warnings)
            warned = warned || w.find("999") != std::string::npos;
        CHECK(warned);
    }
    SECTION("groups with no surviving members are dropped") {
        nlohmann::json doc;
        doc["groups"] = {group("A", {1}), group("Empty", {999})};
        auto out = parse_themes(doc.dump(), book, 2);
        REQUIRE(out.ok());
        CHECK(out.value().set.themes.size() == 1);
    }
    SECTION("count mismatch is a warning, not an error") {
        nlohmann::json doc;
        doc["groups"] = {group("A", {1})};
        auto out = parse_themes(doc.dump(), book, 8);
        REQUIRE(out.ok());
        bool warned = false;
        for (const auto& w : out.value().warnings)
            warned = warned || w.find("requested 8") != std::string::npos;
        CHECK(warned);
    }
    SECTION("unparseable response is MalformedResponse") {
        auto out = parse_themes("no groups anywhere", book, 8);
        REQUIRE_FALSE(out.ok());
        CHECK(out.error().kind == ErrorKind::MalformedResponse);
    }
    SECTION("numbered-list fallback") {
        std::string text = "1. First cluster\nDescription: About early topics\nTopics: 1, 2, 3\n"
                           "2. Second cluster\nDescription: About later topics\nTopics: 4, 5\n";
        auto out = parse_themes(text, book, 2);
        REQUIRE(out.ok());
        REQUIRE(out.value().set.themes.size() == 2);
        CHECK(out.value().set.themes[0].meta.name == "First cluster");
        CHECK(out.value().set.themes[0].meta.member_code_ids.size() == 3);
        CHECK(out.value().set.themes[1].meta.description == "About later topics");
    }
}

TEST_CASE("theme ids and duplicate topic numbers", "[themes]") {
    auto book = synthetic_codebook(5);
    nlohmann::json doc;
    doc["groups"] = {group("A", {1, 1, 2}), group("B", {3})};
    auto out = parse_themes(doc.dump(), book, 2);
    REQUIRE(out.ok());
    CHECK(out.value().set.themes[0].meta.member_code_ids.size() == 2); // dedup within a theme
    CHECK(out.value().set.themes[0].meta.theme_id == "traits-t01");
    CHECK(out.value().set.themes[1].meta.theme_id == "traits-t02");
}

TEST_CASE("serialize_theme_payload carries names, descriptions and quotes", "[themes]") {
    auto book = synthetic_codebook(3, CodeKind::Goal, 2);
    Theme t;
    t.kind = CodeKind::Goal;
    t.theme_id = "goals-t01";
    t.name = "Example theme";
    t.description = "What the theme covers";
    t.member_code_ids = {"code-0", "code-2"};
    auto embedded = embed_theme(t, book);
    REQUIRE(embedded.members.size() == 2);
    std::string payload = serialize_theme_payload(embedded);
    CHECK(payload.find("Theme: Example theme") == 0);
    CHECK(payload.find("Description: What the theme covers") != std::string::npos);
    CHECK(payload.find("- Topic number 0:") != std::string::npos);
    CHECK(payload.find("- Topic number 2:") != std::string::npos);
    CHECK(payload.find("Quote: \"") != std::string::npos);
}

TEST_CASE("split_oversized leaves compliant themes untouched", "[themes]") {
    auto book = synthetic_codebook(4, CodeKind::Goal);
    Theme t;
    t.kind = CodeKind::Goal;
    t.theme_id = "goals-t01";
    t.name = "Small";
    t.member_code_ids = {"code-0", "code-1"};
    TokenEstimator est;
    auto parts = split_oversized(t, book, 100000, est);
    REQUIRE(parts.size() == 1);
    CHECK_FALSE(parts[0].meta.part_index.has_value());
    CHECK_FALSE(parts[0].meta.part_count.has_value());
    CHECK(parts[0].meta.display_name() == "Small");
}

TEST_CASE("split_oversized breaks an over-budget theme into labeled parts", "[themes]") {
    auto book = synthetic_codebook(8, CodeKind::Goal, 3, 40);
    Theme t;
    t.kind = CodeKind::Goal;
    t.theme_id = "goals-t01";
    t.name = "Big";
    t.description = "Oversized theme";
    for (const auto& e : book.entries)
        t.member_code_ids.push_back(e.code_id);
    TokenEstimator est;
    auto whole = embed_theme(t, book);
    long full_estimate = est.estimate(serialize_theme_payload(whole));
    long budget = full_estimate / 2;

    auto parts = split_oversized(t, book, budget, est);
    REQUIRE(parts.size() >= 2);
    std::vector<std::string> reassembled;
    for (size_t i = 0; i < parts.size(); ++i) {
        CHECK(parts[i].meta.part_index == static_cast<int>(i + 1));
        CHECK(parts[i].meta.part_count == static_cast<int>(parts.size()));
        CHECK(parts[i].meta.display_name() ==
              "Big (part " + std::to_string(i + 1) + ")");
        CHECK(est.estimate(serialize_theme_payload(parts[i])) <= budget);
        for (const auto& id : parts[i].meta.member_code_ids)
            reassembled.push_back(id);
    }
    CHECK(reassembled == t.member_code_ids); // partition preserves order, no overlap
}

TEST_CASE("a single member exceeding the budget is an error naming the code", "[themes]") {
    auto book = synthetic_codebook(1, CodeKind::Goal, 5, 120);
    Theme t;
    t.kind = CodeKind::Goal;
    t.theme_id = "goals-t01";
    t.name = "Huge single";
    t.member_code_ids = {"code-0"};
    TokenEstimator est;
    CHECK_THROWS_WITH(split_oversized(t, book, 20, est),
                      Catch::Matchers::ContainsSubstring("code-0"));
}

TEST_CASE("split parts always respect the budget over random themes", "[themes][property]") {
    std::mt19937_64 rng(5);
    TokenEstimator est;
    for (int trial = 0; trial < 60; ++trial) {
        size_t entries = 2 + rng() % 10;
        auto book = synthetic_codebook(entries, CodeKind::Goal, 1 + rng() % 3, 8 + rng() % 60);
        Theme t;
        t.kind = CodeKind::Goal;
        t.theme_id = "goals-t01";
        t.name = "Random theme";
        for (const auto& e : book.entries)
            t.member_code_ids.push_back(e.code_id);
        long smallest_member = std::numeric_limits<long>::max();
        for (const auto& e : book.entries) {
            EmbeddedTheme probe;
            probe.meta = t;
            probe.meta.member_code_ids = {e.code_id};
            probe.members = {e};
            smallest_member = std::min(smallest_member,
                                       est.estimate(serialize_theme_payload(probe)));
        }
        long budget = smallest_member + 40 + static_cast<long>(rng() % 200);
        std::vector<EmbeddedTheme> parts;
        try {
            parts = split_oversized(t, book, budget, est);
        } catch (const StageError&) {
            continue; // a lone member can still exceed the probe-padded budget
        }
        std::vector<std::string> reassembled;
        for (const auto& p : parts) {
            CHECK(est.estimate(serialize_theme_payload(p)) <= budget);
            for (const auto& id : p.meta.member_code_ids)
                reassembled.push_back(id);
        }
        CHECK(reassembled == t.member_code_ids);
    }
}

TEST_CASE("theme sets round-trip through json", "[themes]") {
    auto book = synthetic_codebook(6, CodeKind::Frustration, 2);
    nlohmann::json doc;
    doc["groups"] = {group("A", {1, 2, 3}), group("B", {4, 5}), group("C", {6, 1})};
    auto parsed = parse_themes(doc.dump(), book, 3);
    REQUIRE(parsed.ok());
    auto j = theme_set_to_json(parsed.value().set);
    auto back = theme_set_from_json(j);
    CHECK(theme_set_to_json(back) == j);
    CHECK(back.kind == CodeKind::Frustration);
    REQUIRE(back.themes.size() == 3);
    CHECK(back.themes[0].members.size() == 3);
    CHECK(back.themes[0].members[0].quotes.size() == 2);
}
