#pragma once
#include "personaforge/gateway.hpp"
#include "personaforge/result.hpp"
#include "personaforge/text.hpp"
#include "personaforge/themes.hpp"
#include "personaforge/token_estimator.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace personaforge {

// ---------------------------------------------------------------------
// Combination counting

struct CombinationCount {
    unsigned long long constrained = 0;   // product over sets of C(size, picks)
    unsigned long long unconstrained = 0; // C(sum sizes, sum picks), for reporting
};

inline unsigned long long binomial(unsigned long long n, unsigned long long k) {
    if (k > n)
        throw std::invalid_argument("binomial: k > n");
    k = std::min(k, n - k);
    unsigned long long result = 1;
    for (unsigned long long i = 1; i <= k; ++i) {
        // result * (n - k + i) is always divisible by i at this point
        unsigned long long num = n - k + i;
        unsigned long long g = std::gcd(result, i);
        unsigned long long r = result / g;
        unsigned long long d = i / g;
        if (num % d != 0)
            throw std::logic_error("binomial: unexpected divisibility failure");
        num /= d;
        if (r > std::numeric_limits<unsigned long long>::max() / num)
            throw std::overflow_error("binomial: result exceeds 64 bits");
        result = r * num;
    }
    return result;
}

inline CombinationCount count_combinations(const std::vector<long>& set_sizes, long picks_per_set) {
    if (picks_per_set < 0)
        throw std::invalid_argument("count_combinations: negative picks");
    CombinationCount out;
    out.constrained = 1;
    unsigned long long total = 0;
    for (long size : set_sizes) {
        if (size < picks_per_set)
            throw std::invalid_argument("count_combinations: set of size " + std::to_string(size) +
                                        " cannot supply " + std::to_string(picks_per_set) + " picks");
        unsigned long long c = binomial(static_cast<unsigned long long>(size),
                                        static_cast<unsigned long long>(picks_per_set));
        if (c != 0 && out.constrained > std::numeric_limits<unsigned long long>::max() / c)
            throw std::overflow_error("count_combinations: constrained count exceeds 64 bits");
        out.constrained *= c;
        total += static_cast<unsigned long long>(size);
    }
    out.unconstrained = binomial(total, static_cast<unsigned long long>(picks_per_set) *
                                            static_cast<unsigned long long>(set_sizes.size()));
    return out;
}

// ---------------------------------------------------------------------
// Theme selection

struct ThemeSelection {
    std::string selection_id;
    std::uint64_t rng_seed = 0;
    std::map<CodeKind, std::pair<std::string, std::string>> picks; // two distinct theme ids per kind
    long estimated_prompt_tokens = 0;
};

// Unbiased draw from [0, n) via rejection sampling; deterministic for a
// given engine stream regardless of platform.
inline std::uint64_t bounded_uniform(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0)
        throw std::invalid_argument("bounded_uniform: n must be positive");
    std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    std::uint64_t rem = (max % n + 1) % n; // 2^64 mod n
    std::uint64_t r;
    do {
        r = rng();
    } while (rem != 0 && r > max - rem);
    return r % n;
}

inline std::pair<size_t, size_t> pick_two_distinct(std::mt19937_64& rng, size_t n) {
    size_t i = static_cast<size_t>(bounded_uniform(rng, n));
    size_t j = static_cast<size_t>(bounded_uniform(rng, n - 1));
    if (j >= i)
        ++j;
    return {i, j};
}

struct BudgetCheck {
    bool accepted = false;
    long estimate = 0;
};

// Accept iff the payload leaves room for the reserved response.
inline BudgetCheck precheck_budget(const std::string& selection_payload, const ModelProfile& profile,
                                   const TokenEstimator& estimator) {
    BudgetCheck check;
    check.estimate = estimator.estimate(selection_payload);
    check.accepted = check.estimate + profile.response_reserve <= profile.context_limit;
    return check;
}

inline const EmbeddedTheme* find_theme(const EmbeddedThemeSet& set, const std::string& theme_id) {
    for (const auto& t : set.themes)
        if (t.meta.theme_id == theme_id)
            return &t;
    return nullptr;
}

// Figure-style persona prompt: the structural instructions followed by the
// four labeled lists serialized from the selected themes' full payloads.
inline std::string build_persona_prompt(const ThemeSelection& selection,
                                        const std::map<CodeKind, EmbeddedThemeSet>& theme_sets) {
    auto payload_for = [&](CodeKind kind) {
        const auto& pick = selection.picks.at(kind);
        const auto& set = theme_sets.at(kind);
        const EmbeddedTheme* a = find_theme(set, pick.first);
        const EmbeddedTheme* b = find_theme(set, pick.second);
        if (!a || !b)
            throw std::invalid_argument("build_persona_prompt: selection references unknown theme");
        return serialize_theme_payload(*a) + "\n" + serialize_theme_payload(*b);
    };
    std::string p;
    p += "Using the lists provided below, write a user persona\n\n";
    p += "The persona should be structured as follows:\n\n";
    p += "Name and surname (realistic also based on the country)\n\n";
    p += "Country: name of the country of the Persona (which must be European)\n\n";
    p += "Age: Based on the lists tell if the persona is young, middle or old age\n\n";
    p += "\"Goal & Frustration\": tell what the persona main goal (max 1) is and what is the "
         "persona main frustration, include a quote taken from the quotes in the goal list "
         "representing the main goal\n\n";
    p += "\"Narrative\": include also a narrative background of the persona (max 250 words)\n\n";
    p += "\"Additional goals\": identify with bullet points 2 additional goals (max 20 words "
         "each) and two additional frustrations (max 20 words each) of the persona.\n\n";
    p += "\"Behaviour\": identify the personas key behaviours (max 3, 20 words each),\n\n";
    p += "\"Personality\": identify the main persona personality traits (max 3, 20 words each).\n\n";
    p += "List of frustrations:\n" + payload_for(CodeKind::Frustration) + "\n";
    p += "List of goals:\n" + payload_for(CodeKind::Goal) + "\n";
    p += "List of behaviours:\n" + payload_for(CodeKind::Behaviour) + "\n";
    p += "List of personality traits:\n" + payload_for(CodeKind::PersonalityTrait) + "\n";
    return p;
}

// Token cost of the persona prompt scaffolding itself (instructions and
// list labels), plus slack for the joins around each payload.
inline long persona_prompt_overhead(const TokenEstimator& estimator) {
    ThemeSelection empty_selection;
    std::map<CodeKind, EmbeddedThemeSet> empty_sets;
    for (const auto& kind : all_kinds()) {
        EmbeddedThemeSet set;
        set.kind = kind;
        EmbeddedTheme t;
        t.meta.kind = kind;
        t.meta.theme_id = kind_key(kind) + "-probe";
        set.themes.push_back(t);
        empty_sets[kind] = std::move(set);
        empty_selection.picks[kind] = {kind_key(kind) + "-probe", kind_key(kind) + "-probe"};
    }
    return estimator.estimate(build_persona_prompt(empty_selection, empty_sets)) + 64;
}

// Per-theme budget that makes any 8 compliant themes compose into one
// persona prompt without tripping the context limit.
inline long default_theme_budget(const ModelProfile& profile, const TokenEstimator& estimator) {
    long budget = (profile.context_limit - profile.response_reserve - persona_prompt_overhead(estimator)) / 8;
    if (budget <= 0)
        throw std::invalid_argument("default_theme_budget: context window too small");
    return budget;
}

struct SampledSelection {
    ThemeSelection selection;
    std::string prompt; // the exact prompt the selection was accepted with
};

// Seeded uniform draw of 2 distinct themes per kind, re-drawn (advancing
// the same stream) when the composed prompt fails the budget pre-check.
inline Outcome<SampledSelection> sample_selection(const std::map<CodeKind, EmbeddedThemeSet>& theme_sets,
                                                  std::uint64_t rng_seed, const ModelProfile& profile,
                                                  const TokenEstimator& estimator, int redraw_cap = 25) {
    for (const auto& kind : all_kinds()) {
        auto it = theme_sets.find(kind);
        if (it == theme_sets.end() || it->second.themes.size() < 2)
            throw std::invalid_argument("sample_selection: need at least 2 themes of kind " +
                                        kind_key(kind));
    }
    std::mt19937_64 rng(rng_seed);
    long smallest_over = std::numeric_limits<long>::max();
    for (int attempt = 1; attempt <= redraw_cap; ++attempt) {
        ThemeSelection sel;
        sel.rng_seed = rng_seed;
        sel.selection_id = "sel-" + std::to_string(rng_seed) + "-a" + std::to_string(attempt);
        for (const auto& kind : all_kinds()) {
            const auto& themes = theme_sets.at(kind).themes;
            auto [i, j] = pick_two_distinct(rng, themes.size());
            sel.picks[kind] = {themes[i].meta.theme_id, themes[j].meta.theme_id};
        }
        std::string prompt = build_persona_prompt(sel, theme_sets);
        BudgetCheck check = precheck_budget(prompt, profile, estimator);
        if (check.accepted) {
            sel.estimated_prompt_tokens = check.estimate;
            return SampledSelection{std::move(sel), std::move(prompt)};
        }
        smallest_over = std::min(smallest_over, check.estimate);
    }
    return make_error(ErrorKind::ContextOverflow,
                      "no selection fit the budget after " + std::to_string(redraw_cap) +
                          " attempts; smallest estimate " + std::to_string(smallest_over) +
                          " + reserve " + std::to_string(profile.response_reserve) +
                          " exceeds context limit " + std::to_string(profile.context_limit));
}

inline nlohmann::json selection_to_json(const ThemeSelection& sel) {
    nlohmann::json picks;
    for (const auto& [kind, pair] : sel.picks)
        picks[kind_key(kind)] = {pair.first, pair.second};
    return {{"selection_id", sel.selection_id},
            {"rng_seed", sel.rng_seed},
            {"picks", picks},
            {"estimated_prompt_tokens", sel.estimated_prompt_tokens}};
}

inline ThemeSelection selection_from_json(const nlohmann::json& j) {
    ThemeSelection sel;
    sel.selection_id = j.at("selection_id").get<std::string>();
    sel.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    sel.estimated_prompt_tokens = j.value("estimated_prompt_tokens", 0L);
    for (const auto& [key, pair] : j.at("picks").items())
        sel.picks[kind_from_key(key)] = {pair.at(0).get<std::string>(), pair.at(1).get<std::string>()};
    return sel;
}

// ---------------------------------------------------------------------
// Persona document

enum class AgeBand { Young, Middle, Old };

inline const char* to_string(AgeBand band) {
    switch (band) {
    case AgeBand::Young: return "young";
    case AgeBand::Middle: return "middle";
    case AgeBand::Old: return "old";
    }
    return "middle";
}

inline std::optional<AgeBand> age_band_from_text(std::string_view text) {
    std::string lower = to_lower(text);
    if (lower.find("young") != std::string::npos)
        return AgeBand::Young;
    if (lower.find("middle") != std::string::npos)
        return AgeBand::Middle;
    if (lower.find("old") != std::string::npos || lower.find("senior") != std::string::npos)
        return AgeBand::Old;
    return std::nullopt;
}

struct Persona {
    std::string name;
    std::string country;
    AgeBand age_band = AgeBand::Middle;
    std::string main_goal;
    std::string main_frustration;
    std::string goal_quote;
    std::string narrative;
    std::vector<std::string> additional_goals;
    std::vector<std::string> additional_frustrations;
    std::vector<std::string> behaviours;
    std::vector<std::string> traits;
    std::string selection_id;
    std::vector<std::string> flags; // advisory limit violations, non-fatal
};

inline bool is_european_country(const std::string& country) {
    static const std::vector<std::string> countries = {
        "albania", "austria", "belgium", "bosnia", "bulgaria", "croatia", "cyprus", "czech republic",
        "czechia", "denmark", "estonia", "finland", "france", "germany", "greece", "hungary",
        "iceland", "ireland", "italy", "latvia", "lithuania", "luxembourg", "malta", "moldova",
        "montenegro", "netherlands", "north macedonia", "norway", "poland", "portugal", "romania",
        "serbia", "slovakia", "slovenia", "spain", "sweden", "switzerland", "ukraine",
        "united kingdom"};
    std::string lower = to_lower(trim(country));
    for (const auto& c : countries)
        if (lower.find(c) != std::string::npos)
            return true;
    return false;
}

namespace detail {

// Strip markdown decoration that wraps headings: #, *, _, backticks.
inline std::string strip_markdown(const std::string& line) {
    std::string out;
    out.reserve(line.size());
    for (char c : line) {
        if (c == '*' || c == '#' || c == '`' || c == '_')
            continue;
        out.push_back(c);
    }
    return trim(out);
}

inline bool is_bullet(const std::string& line, std::string& content) {
    std::string t = trim(line);
    if (t.empty())
        return false;
    if (t[0] == '-' || t[0] == '*' || (t.size() >= 3 && t.compare(0, 3, "\xe2\x80\xa2") == 0)) {
        content = trim(t.substr(t[0] == '-' || t[0] == '*' ? 1 : 3));
        return !content.empty();
    }
    size_t i = 0;
    while (i < t.size() && t[i] >= '0' && t[i] <= '9')
        ++i;
    if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) {
        content = trim(t.substr(i + 1));
        return !content.empty();
    }
    return false;
}

// Heading ids in parse order; "" means free text of the current section.
enum class Section {
    None, Name, Country, Age, GoalFrustration, Quote, Narrative,
    AdditionalGoals, AdditionalFrustrations, Behaviour, Personality
};

inline std::optional<std::pair<Section, std::string>> match_heading(const std::string& line) {
    std::string plain = strip_markdown(line);
    std::string lower = to_lower(plain);
    struct Pattern {
        const char* prefix;
        Section section;
    };
    // Longer prefixes first so "additional goals" beats "goal".
    static const Pattern patterns[] = {
        {"name and surname", Section::Name},
        {"additional goals", Section::AdditionalGoals},
        {"additional frustrations", Section::AdditionalFrustrations},
        {"goal & frustration", Section::GoalFrustration},
        {"goal and frustration", Section::GoalFrustration},
        {"goals & frustrations", Section::GoalFrustration},
        {"personality traits", Section::Personality},
        {"personality", Section::Personality},
        {"behaviours", Section::Behaviour},
        {"behaviors", Section::Behaviour},
        {"behaviour", Section::Behaviour},
        {"behavior", Section::Behaviour},
        {"narrative", Section::Narrative},
        {"country", Section::Country},
        {"quote", Section::Quote},
        {"name", Section::Name},
        {"age", Section::Age},
    };
    for (const auto& p : patterns) {
        size_t n = std::string(p.prefix).size();
        if (lower.rfind(p.prefix, 0) != 0)
            continue;
        // Heading must be the whole token or be followed by punctuation.
        if (lower.size() > n && lower[n] != ':' && lower[n] != ' ' && lower[n] != '"')
            continue;
        size_t colon = plain.find(':');
        std::string value = colon == std::string::npos ? "" : trim(plain.substr(colon + 1));
        // Guard against prose lines that merely start with the word.
        if (colon == std::string::npos && lower.size() > n + 1)
            continue;
        return std::make_pair(p.section, value);
    }
    return std::nullopt;
}

inline std::string first_quoted_span(const std::string& text) {
    // Plain or typographic double quotes.
    static const std::vector<std::pair<std::string, std::string>> quote_pairs = {
        {"\"", "\""}, {"\xe2\x80\x9c", "\xe2\x80\x9d"}};
    for (const auto& [open, close] : quote_pairs) {
        size_t b = text.find(open);
        if (b == std::string::npos)
            continue;
        size_t e = text.find(close, b + open.size());
        if (e == std::string::npos)
            continue;
        return trim(text.substr(b + open.size(), e - b - open.size()));
    }
    return "";
}

inline std::string strip_outer_quotes(const std::string& text) {
    std::string span = first_quoted_span(text);
    return span.empty() ? trim(text) : span;
}

} // namespace detail

// Parse a persona write-up. Tolerant of markdown decoration and heading
// punctuation variants; word-limit violations are flagged, not fatal.
// A missing required section is a MalformedResponse.
inline Outcome<Persona> parse_persona(const std::string& response_text, const ThemeSelection& selection) {
    using detail::Section;
    std::map<Section, std::vector<std::string>> sections;
    Section current = Section::None;
    for (const auto& line : split_lines(response_text)) {
        std::string bullet;
        if (detail::is_bullet(line, bullet)) {
            sections[current].push_back("\x01" + bullet); // mark bullets for later
            continue;
        }
        if (auto heading = detail::match_heading(line)) {
            current = heading->first;
            sections[current]; // a heading registers its section even when empty
            if (!heading->second.empty())
                sections[current].push_back(heading->second);
            continue;
        }
        std::string t = trim(line);
        if (!t.empty())
            sections[current].push_back(t);
    }

    auto section_text = [&](Section s) {
        std::string out;
        auto it = sections.find(s);
        if (it == sections.end())
            return out;
        for (const auto& piece : it->second) {
            std::string p = piece;
            if (!p.empty() && p[0] == '\x01')
                p = p.substr(1);
            if (!out.empty())
                out += ' ';
            out += p;
        }
        return out;
    };
    auto section_bullets = [&](Section s) {
        std::vector<std::string> out;
        auto it = sections.find(s);
        if (it == sections.end())
            return out;
        for (const auto& piece : it->second)
            if (!piece.empty() && piece[0] == '\x01')
                out.push_back(piece.substr(1));
        return out;
    };

    for (Section required : {Section::Name, Section::Country, Section::Age, Section::GoalFrustration,
                             Section::Narrative, Section::AdditionalGoals, Section::Behaviour,
                             Section::Personality}) {
        if (sections.find(required) == sections.end()) {
            static const std::map<Section, const char*> names = {
                {Section::Name, "Name"},
                {Section::Country, "Country"},
                {Section::Age, "Age"},
                {Section::GoalFrustration, "Goal & Frustration"},
                {Section::Narrative, "Narrative"},
                {Section::AdditionalGoals, "Additional goals"},
                {Section::Behaviour, "Behaviour"},
                {Section::Personality, "Personality"}};
            return make_error(ErrorKind::MalformedResponse,
                              std::string("persona section not found: ") + names.at(required));
        }
    }

    Persona p;
    p.selection_id = selection.selection_id;
    p.name = section_text(Section::Name);
    p.country = section_text(Section::Country);
    if (!is_european_country(p.country))
        p.flags.push_back("country not recognized as European: " + p.country);

    std::string age_text = section_text(Section::Age);
    if (auto band = age_band_from_text(age_text)) {
        p.age_band = *band;
    } else {
        p.age_band = AgeBand::Middle;
        p.flags.push_back("age band unrecognized: " + age_text);
    }

    std::string gf = section_text(Section::GoalFrustration);
    auto gf_sentences = split_sentences(gf);
    if (!gf_sentences.empty())
        p.main_goal = gf_sentences.front();
    for (size_t i = 1; i < gf_sentences.size(); ++i) {
        if (to_lower(gf_sentences[i]).find("frustration") != std::string::npos) {
            p.main_frustration = gf_sentences[i];
            break;
        }
    }
    if (p.main_frustration.empty() && gf_sentences.size() > 1)
        p.main_frustration = gf_sentences[1];
    if (p.main_frustration.empty())
        p.flags.push_back("main frustration not identified");

    std::string quote_section = section_text(Section::Quote);
    p.goal_quote = quote_section.empty() ? detail::first_quoted_span(gf)
                                         : detail::strip_outer_quotes(quote_section);
    if (p.goal_quote.empty())
        p.flags.push_back("goal quote missing");

    p.narrative = section_text(Section::Narrative);
    size_t narrative_words = count_words(p.narrative);
    if (narrative_words > 300) // 250-word prompt limit + 20% tolerance
        p.flags.push_back("narrative over limit: " + std::to_string(narrative_words) + " words");

    p.additional_goals = section_bullets(Section::AdditionalGoals);
    p.additional_frustrations = section_bullets(Section::AdditionalFrustrations);
    if (p.additional_frustrations.empty() && p.additional_goals.size() >= 4) {
        // Figure-3 style single section carrying both lists.
        p.additional_frustrations.assign(p.additional_goals.begin() + 2, p.additional_goals.end());
        p.additional_goals.resize(2);
        p.flags.push_back("split combined additional goals/frustrations list");
    }
    p.behaviours = section_bullets(Section::Behaviour);
    p.traits = section_bullets(Section::Personality);

    auto check_list = [&](const std::vector<std::string>& items, size_t expected, size_t word_limit,
                          const char* label) {
        if (items.size() != expected)
            p.flags.push_back(std::string(label) + ": expected " + std::to_string(expected) +
                              " entries, found " + std::to_string(items.size()));
        for (const auto& item : items) {
            size_t words = count_words(item);
            if (words > word_limit)
                p.flags.push_back(std::string(label) + " entry over " +
                                  std::to_string(word_limit) + " words: " + item.substr(0, 40));
        }
    };
    // 20-word prompt limits carry the same 20% tolerance as the narrative.
    check_list(p.additional_goals, 2, 24, "additional goals");
    check_list(p.additional_frustrations, 2, 24, "additional frustrations");
    if (p.behaviours.size() > 3)
        p.flags.push_back("more than 3 behaviours listed");
    if (p.traits.size() > 3)
        p.flags.push_back("more than 3 personality traits listed");

    return p;
}

struct QuoteProvenance {
    bool matched = false;
    double best_score = 0.0;
    std::string matched_quote;
};

// Check the persona's goal quote against the union of quotes carried by
// the selected goal themes.
inline QuoteProvenance validate_quote_provenance(const Persona& persona, const ThemeSelection& selection,
                                                 const std::map<CodeKind, EmbeddedThemeSet>& theme_sets,
                                                 double threshold = 0.8) {
    QuoteProvenance result;
    if (persona.goal_quote.empty())
        return result;
    const auto& set = theme_sets.at(CodeKind::Goal);
    const auto& pick = selection.picks.at(CodeKind::Goal);
    for (const auto& theme_id : {pick.first, pick.second}) {
        const EmbeddedTheme* theme = find_theme(set, theme_id);
        if (!theme)
            continue;
        for (const auto& member : theme->members) {
            for (const auto& q : member.quotes) {
                if (q.quote.empty())
                    continue;
                double score = fuzzy_contains_score(q.quote, persona.goal_quote);
                if (score > result.best_score) {
                    result.best_score = score;
                    result.matched_quote = q.quote;
                }
            }
        }
    }
    result.matched = result.best_score >= threshold;
    return result;
}

inline nlohmann::json persona_to_json(const Persona& p) {
    return {{"name", p.name},
            {"country", p.country},
            {"age_band", to_string(p.age_band)},
            {"main_goal", p.main_goal},
            {"main_frustration", p.main_frustration},
            {"goal_quote", p.goal_quote},
            {"narrative", p.narrative},
            {"additional_goals", p.additional_goals},
            {"additional_frustrations", p.additional_frustrations},
            {"behaviours", p.behaviours},
            {"traits", p.traits},
            {"selection_id", p.selection_id},
            {"flags", p.flags}};
}

inline Persona persona_from_json(const nlohmann::json& j) {
    Persona p;
    p.name = j.at("name").get<std::string>();
    p.country = j.at("country").get<std::string>();
    std::string band = j.at("age_band").get<std::string>();
    p.age_band = band == "young" ? AgeBand::Young : band == "old" ? AgeBand::Old : AgeBand::Middle;
    p.main_goal = j.value("main_goal", "");
    p.main_frustration = j.value("main_frustration", "");
    p.goal_quote = j.value("goal_quote", "");
    p.narrative = j.value("narrative", "");
    p.additional_goals = j.value("additional_goals", std::vector<std::string>{});
    p.additional_frustrations = j.value("additional_frustrations", std::vector<std::string>{});
    p.behaviours = j.value("behaviours", std::vector<std::string>{});
    p.traits = j.value("traits", std::vector<std::string>{});
    p.selection_id = j.value("selection_id", "");
    p.flags = j.value("flags", std::vector<std::string>{});
    return p;
}

enum class PersonaFormat { StructuredDocument, PlainText };

// Structured format is lossless JSON; plain text follows the write-up
// section order (name, country, age, goal & frustration, quote,
// narrative, additional lists, behaviours, personality).
inline std::string render_persona(const Persona& p, PersonaFormat format) {
    if (format == PersonaFormat::StructuredDocument)
        return persona_to_json(p).dump(2) + "\n";
    std::string age = p.age_band == AgeBand::Young ? "Young age"
                      : p.age_band == AgeBand::Old ? "Old age"
                                                   : "Middle age";
    std::string out;
    out += "Name and surname: " + p.name + "\n";
    out += "Country: " + p.country + "\n";
    out += "Age: " + age + "\n\n";
    out += "Goal & Frustration: " + p.main_goal;
    if (!p.main_frustration.empty())
        out += " " + p.main_frustration;
    out += "\n\n";
    if (!p.goal_quote.empty())
        out += "Quote: \"" + p.goal_quote + "\"\n\n";
    out += "Narrative: " + p.narrative + "\n\n";
    out += "Additional goals:\n";
    for (const auto& g : p.additional_goals)
        out += "- " + g + "\n";
    out += "\nAdditional frustrations:\n";
    for (const auto& f : p.additional_frustrations)
        out += "- " + f + "\n";
    out += "\nBehaviour:\n";
    for (const auto& b : p.behaviours)
        out += "- " + b + "\n";
    out += "\nPersonality:\n";
    for (const auto& t : p.traits)
        out += "- " + t + "\n";
    return out;
}

} // namespace personaforge
