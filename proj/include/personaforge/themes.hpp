#pragma once
#include "personaforge/codebook.hpp"
#include "personaforge/json_extract.hpp"
#include "personaforge/result.hpp"
#include "personaforge/token_estimator.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace personaforge {

struct Theme {
    std::string theme_id;
    CodeKind kind = CodeKind::Behaviour;
    std::string name; // base name; parts render as "name (part N)"
    std::string description;
    std::vector<std::string> member_code_ids;
    std::optional<int> part_index; // 1-based, present iff part_count is
    std::optional<int> part_count;

    std::string display_name() const {
        if (part_index)
            return name + " (part " + std::to_string(*part_index) + ")";
        return name;
    }
};

// A theme with its member payload inlined, so downstream prompting never
// needs the codebook again.
struct EmbeddedTheme {
    Theme meta;
    std::vector<MergedCode> members;
};

struct EmbeddedThemeSet {
    CodeKind kind = CodeKind::Behaviour;
    int requested_count = 0;
    std::vector<EmbeddedTheme> themes;
};

// Numbered topic list over the codebook entries; grouping is requested by
// topic numbers only, multi-membership allowed.
inline std::string build_grouping_prompt(const Codebook& codebook, int n_groups) {
    if (n_groups < 2)
        throw std::invalid_argument("build_grouping_prompt: n_groups must be >= 2");
    if (codebook.entries.empty())
        throw std::invalid_argument("build_grouping_prompt: empty codebook");
    std::string p;
    p += "Determine how all the topics in the following list of topics can be grouped together, "
         "and topics can also be in more than one group.\n";
    p += "Group all the topics numbers only and provide a name and a description for each group\n";
    p += "Create " + std::to_string(n_groups) + " significant groups\n";
    p += "Display the full list\n\n";
    p += "List of topics:\n";
    for (size_t i = 0; i < codebook.entries.size(); ++i) {
        const auto& e = codebook.entries[i];
        p += std::to_string(i + 1) + ". " + e.name + ": " + e.description + "\n";
    }
    return p;
}

inline EmbeddedTheme embed_theme(const Theme& theme, const Codebook& codebook) {
    EmbeddedTheme out;
    out.meta = theme;
    for (const auto& id : theme.member_code_ids) {
        for (const auto& e : codebook.entries) {
            if (e.code_id == id) {
                out.members.push_back(e);
                break;
            }
        }
    }
    return out;
}

struct ParsedThemes {
    EmbeddedThemeSet set;
    std::vector<std::string> warnings;
};

namespace detail {

// Parse "1, 4, 12"-style integer lists; non-numeric fragments ignored.
inline std::vector<long> parse_int_list(const std::string& s) {
    std::vector<long> out;
    long cur = 0;
    bool in_num = false;
    for (char c : s) {
        if (c >= '0' && c <= '9') {
            cur = cur * 10 + (c - '0');
            in_num = true;
        } else {
            if (in_num)
                out.push_back(cur);
            cur = 0;
            in_num = false;
        }
    }
    if (in_num)
        out.push_back(cur);
    return out;
}

struct RawGroup {
    std::string name;
    std::string description;
    std::vector<long> topics;
};

inline std::vector<RawGroup> groups_from_json(const nlohmann::json& doc) {
    std::vector<RawGroup> out;
    const nlohmann::json* arr = nullptr;
    if (doc.is_array()) {
        arr = &doc;
    } else if (doc.is_object()) {
        for (const char* key : {"groups", "themes", "Groups"}) {
            auto it = doc.find(key);
            if (it != doc.end() && it->is_array()) {
                arr = &*it;
                break;
            }
        }
    }
    if (!arr)
        return out;
    for (const auto& g : *arr) {
        if (!g.is_object())
            continue;
        RawGroup rg;
        rg.name = trim(first_string(g, {"name", "Name", "group", "title"}));
        rg.description = trim(first_string(g, {"description", "Description"}));
        for (const char* key : {"topics", "topic_numbers", "members", "numbers"}) {
            auto it = g.find(key);
            if (it == g.end())
                continue;
            if (it->is_array()) {
                for (const auto& t : *it) {
                    if (t.is_number_integer())
                        rg.topics.push_back(t.get<long>());
                    else if (t.is_string())
                        for (long v : parse_int_list(t.get<std::string>()))
                            rg.topics.push_back(v);
                }
            } else if (it->is_string()) {
                rg.topics = parse_int_list(it->get<std::string>());
            }
            break;
        }
        out.push_back(std::move(rg));
    }
    return out;
}

// Numbered-list fallback: "1. Name" headers with "Description:" and
// "Topics:" lines underneath.
inline std::vector<RawGroup> groups_from_text(const std::string& text) {
    std::vector<RawGroup> out;
    for (const auto& raw_line : split_lines(text)) {
        std::string line = trim(raw_line);
        if (line.empty())
            continue;
        size_t i = 0;
        while (i < line.size() && line[i] >= '0' && line[i] <= '9')
            ++i;
        if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
            out.push_back({trim(line.substr(i + 1)), "", {}});
            continue;
        }
        if (out.empty())
            continue;
        std::string lower = to_lower(line);
        if (lower.rfind("description:", 0) == 0)
            out.back().description = trim(line.substr(12));
        else if (lower.rfind("topics:", 0) == 0)
            out.back().topics = parse_int_list(line.substr(7));
    }
    return out;
}

} // namespace detail

// Parse grouped topics back into themes. Out-of-range topic numbers are
// dropped with a warning, empty groups are dropped, and a count mismatch
// against requested_count is logged rather than fatal.
inline Outcome<ParsedThemes> parse_themes(const std::string& response_text, const Codebook& codebook,
                                          int requested_count) {
    std::vector<detail::RawGroup> raw;
    if (auto doc = extract_json(response_text))
        raw = detail::groups_from_json(*doc);
    if (raw.empty())
        raw = detail::groups_from_text(response_text);
    if (raw.empty())
        return make_error(ErrorKind::MalformedResponse, "no theme groups found in response");

    ParsedThemes out;
    out.set.kind = codebook.kind;
    out.set.requested_count = requested_count;
    long n = static_cast<long>(codebook.entries.size());
    for (auto& rg : raw) {
        Theme t;
        t.kind = codebook.kind;
        t.name = rg.name.empty() ? "Unnamed group" : rg.name;
        t.description = rg.description;
        std::set<long> seen;
        for (long topic : rg.topics) {
            if (topic < 1 || topic > n) {
                out.warnings.push_back("theme '" + t.name + "': topic " + std::to_string(topic) +
                                       " out of range 1.." + std::to_string(n) + ", dropped");
                continue;
            }
            if (!seen.insert(topic).second)
                continue;
            t.member_code_ids.push_back(codebook.entries[static_cast<size_t>(topic - 1)].code_id);
        }
        if (t.member_code_ids.empty()) {
            out.warnings.push_back("theme '" + t.name + "' has no surviving members, dropped");
            continue;
        }
        char seq[16];
        std::snprintf(seq, sizeof(seq), "%02zu", out.set.themes.size() + 1);
        t.theme_id = kind_key(codebook.kind) + "-t" + seq;
        out.set.themes.push_back(embed_theme(t, codebook));
    }
    if (out.set.themes.empty())
        return make_error(ErrorKind::MalformedResponse, "every parsed theme group was empty");
    if (static_cast<int>(out.set.themes.size()) != requested_count)
        out.warnings.push_back("model returned " + std::to_string(out.set.themes.size()) +
                               " groups, requested " + std::to_string(requested_count));
    return out;
}

// The serialized form a theme takes inside a persona prompt: name,
// description, member codes with their descriptions and quotes.
inline std::string serialize_theme_payload(const EmbeddedTheme& theme) {
    std::string s;
    s += "Theme: " + theme.meta.display_name() + "\n";
    s += "Description: " + theme.meta.description + "\n";
    s += "Codes:\n";
    for (const auto& m : theme.members) {
        s += "- " + m.name + ": " + m.description + "\n";
        for (const auto& q : m.quotes)
            if (!q.quote.empty())
                s += "  Quote: \"" + q.quote + "\"\n";
    }
    return s;
}

// Break an over-budget theme into consecutive member slices, each fitting
// the per-theme token budget. Member order is preserved and parts
// partition the member list exactly.
inline std::vector<EmbeddedTheme> split_oversized(const EmbeddedTheme& theme, long token_budget_per_theme,
                                                  const TokenEstimator& estimator) {
    if (token_budget_per_theme <= 0)
        throw std::invalid_argument("split_oversized: budget must be positive");
    if (estimator.estimate(serialize_theme_payload(theme)) <= token_budget_per_theme)
        return {theme};

    std::vector<std::vector<MergedCode>> slices;
    std::vector<MergedCode> cur;
    auto slice_fits = [&](const std::vector<MergedCode>& members) {
        EmbeddedTheme probe;
        probe.meta = theme.meta;
        probe.meta.part_index = 888; // probe with a wide suffix so real part labels never exceed it
        probe.meta.part_count = 888;
        probe.members = members;
        return estimator.estimate(serialize_theme_payload(probe)) <= token_budget_per_theme;
    };
    for (const auto& m : theme.members) {
        cur.push_back(m);
        if (slice_fits(cur))
            continue;
        if (cur.size() == 1)
            throw StageError("theme '" + theme.meta.name + "': code " + m.code_id +
                             " alone exceeds the per-theme token budget");
        cur.pop_back();
        slices.push_back(std::move(cur));
        cur = {m};
        if (!slice_fits(cur))
            throw StageError("theme '" + theme.meta.name + "': code " + m.code_id +
                             " alone exceeds the per-theme token budget");
    }
    if (!cur.empty())
        slices.push_back(std::move(cur));

    std::vector<EmbeddedTheme> parts;
    int count = static_cast<int>(slices.size());
    for (int i = 0; i < count; ++i) {
        EmbeddedTheme part;
        part.meta = theme.meta;
        part.meta.part_index = i + 1;
        part.meta.part_count = count;
        part.meta.theme_id = theme.meta.theme_id + "-p" + std::to_string(i + 1);
        part.members = slices[static_cast<size_t>(i)];
        part.meta.member_code_ids.clear();
        for (const auto& m : part.members)
            part.meta.member_code_ids.push_back(m.code_id);
        parts.push_back(std::move(part));
    }
    return parts;
}

inline std::vector<EmbeddedTheme> split_oversized(const Theme& theme, const Codebook& codebook,
                                                  long token_budget_per_theme,
                                                  const TokenEstimator& estimator) {
    return split_oversized(embed_theme(theme, codebook), token_budget_per_theme, estimator);
}

inline nlohmann::json theme_set_to_json(const EmbeddedThemeSet& set) {
    nlohmann::json j;
    j["kind"] = kind_key(set.kind);
    j["requested_count"] = set.requested_count;
    j["themes"] = nlohmann::json::array();
    for (const auto& t : set.themes) {
        nlohmann::json tj;
        tj["theme_id"] = t.meta.theme_id;
        tj["name"] = t.meta.name;
        tj["description"] = t.meta.description;
        if (t.meta.part_index) {
            tj["part_index"] = *t.meta.part_index;
            tj["part_count"] = *t.meta.part_count;
        }
        tj["members"] = nlohmann::json::array();
        for (const auto& m : t.members) {
            nlohmann::json quotes = nlohmann::json::array();
            for (const auto& q : m.quotes)
                quotes.push_back(
                    {{"quote", q.quote}, {"interview_id", q.interview_id}, {"chunk_id", q.chunk_id}});
            tj["members"].push_back({{"code_id", m.code_id},
                                     {"name", m.name},
                                     {"description", m.description},
                                     {"quotes", quotes}});
        }
        j["themes"].push_back(std::move(tj));
    }
    return j;
}

inline EmbeddedThemeSet theme_set_from_json(const nlohmann::json& j) {
    EmbeddedThemeSet set;
    set.kind = kind_from_key(j.at("kind").get<std::string>());
    set.requested_count = j.at("requested_count").get<int>();
    for (const auto& tj : j.at("themes")) {
        EmbeddedTheme t;
        t.meta.theme_id = tj.at("theme_id").get<std::string>();
        t.meta.kind = set.kind;
        t.meta.name = tj.at("name").get<std::string>();
        t.meta.description = tj.value("description", "");
        if (tj.contains("part_index")) {
            t.meta.part_index = tj.at("part_index").get<int>();
            t.meta.part_count = tj.at("part_count").get<int>();
        }
        for (const auto& mj : tj.at("members")) {
            MergedCode m;
            m.code_id = mj.at("code_id").get<std::string>();
            m.name = mj.at("name").get<std::string>();
            m.description = mj.value("description", "");
            for (const auto& qj : mj.value("quotes", nlohmann::json::array()))
                m.quotes.push_back({qj.at("quote").get<std::string>(),
                                    qj.at("interview_id").get<std::string>(),
                                    qj.at("chunk_id").get<std::string>()});
            t.meta.member_code_ids.push_back(m.code_id);
            t.members.push_back(std::move(m));
        }
        set.themes.push_back(std::move(t));
    }
    return set;
}

} // namespace personaforge
