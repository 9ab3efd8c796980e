#pragma once
#include "personaforge/coding.hpp"
#include "personaforge/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace personaforge {

inline void utf8_append(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline bool is_strippable_punct(char32_t cp) {
    if (cp < 0x80)
        return !is_alnum_ascii(cp) && !is_space(cp);
    switch (cp) { // typographic punctuation seen in model output
    case 0x2018: case 0x2019: case 0x201C: case 0x201D:
    case 0x00AB: case 0x00BB: case 0x2013: case 0x2014:
    case 0x2026: case 0x00B7: case 0x2039: case 0x203A:
        return true;
    default:
        return false;
    }
}

// Lowercase, collapse whitespace, strip punctuation off both ends.
// Idempotent; the merge signal for duplicate detection.
inline std::string normalize_name(std::string_view name) {
    std::string base = normalize_whitespace(to_lower(name));
    std::vector<char32_t> cps;
    size_t i = 0;
    while (i < base.size())
        cps.push_back(utf8_next(base, i));
    // Strip punctuation and the whitespace it may expose, so the result
    // always starts and ends on a word character.
    auto strippable = [](char32_t cp) { return is_strippable_punct(cp) || is_space(cp); };
    size_t b = 0, e = cps.size();
    while (b < e && strippable(cps[b]))
        ++b;
    while (e > b && strippable(cps[e - 1]))
        --e;
    std::string out;
    for (size_t k = b; k < e; ++k)
        utf8_append(cps[k], out);
    return trim(out);
}

struct MergedCode {
    std::string code_id; // the representative's id
    std::string name;
    std::string description;
    std::vector<std::string> aliases;
    long source_count = 1; // raw codes merged into this entry
    struct QuoteRef {
        std::string quote;
        std::string interview_id;
        std::string chunk_id;
    };
    std::vector<QuoteRef> quotes;
};

struct MergeDecision {
    std::string kept_id;
    std::string merged_id;
    double similarity = 0.0;
    bool exact = false;
};

struct Codebook {
    CodeKind kind = CodeKind::Behaviour;
    std::vector<MergedCode> entries;
    std::vector<MergeDecision> merge_log;
    long raw_count = 0;
};

// Codebook reduction: exact normalized-name duplicates always merge, and
// so do pairs whose normalized names reach the similarity threshold. The
// relation is closed transitively (union-find) so the result is
// independent of pair visitation order. Representative per group: longest
// description, ties broken by smallest code_id. Descriptions are never
// merged textually; every provenance pair survives as a quote entry.
inline Codebook reduce(std::vector<Code> raw, double similarity_threshold = 0.9) {
    Codebook book;
    if (raw.empty())
        return book;
    for (const auto& c : raw)
        if (c.kind != raw.front().kind)
            throw std::invalid_argument("reduce: mixed code kinds");
    book.kind = raw.front().kind;
    book.raw_count = static_cast<long>(raw.size());

    std::sort(raw.begin(), raw.end(), [](const Code& a, const Code& b) { return a.code_id < b.code_id; });

    std::vector<std::string> norm(raw.size());
    for (size_t i = 0; i < raw.size(); ++i)
        norm[i] = normalize_name(raw[i].name);

    std::vector<size_t> parent(raw.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    for (size_t i = 0; i < raw.size(); ++i) {
        for (size_t j = i + 1; j < raw.size(); ++j) {
            bool exact = norm[i] == norm[j];
            double sim = exact ? 1.0 : name_similarity(norm[i], norm[j]);
            if (!exact && sim < similarity_threshold)
                continue;
            book.merge_log.push_back({raw[i].code_id, raw[j].code_id, sim, exact});
            size_t ri = find(i), rj = find(j);
            if (ri != rj)
                parent[std::max(ri, rj)] = std::min(ri, rj);
        }
    }

    std::map<size_t, std::vector<size_t>> groups; // root -> member indices (code_id order)
    for (size_t i = 0; i < raw.size(); ++i)
        groups[find(i)].push_back(i);

    for (const auto& [root, members] : groups) {
        size_t rep = members.front();
        for (size_t m : members) {
            if (raw[m].description.size() > raw[rep].description.size())
                rep = m; // members are in code_id order, so ties keep the smaller id
        }
        MergedCode mc;
        mc.code_id = raw[rep].code_id;
        mc.name = raw[rep].name;
        mc.description = raw[rep].description;
        mc.source_count = static_cast<long>(members.size());
        for (size_t m : members) {
            if (m != rep && raw[m].name != mc.name &&
                std::find(mc.aliases.begin(), mc.aliases.end(), raw[m].name) == mc.aliases.end())
                mc.aliases.push_back(raw[m].name);
            for (const auto& [iv, ch] : raw[m].provenance)
                mc.quotes.push_back({raw[m].quote, iv, ch});
        }
        book.entries.push_back(std::move(mc));
    }
    std::sort(book.entries.begin(), book.entries.end(),
              [](const MergedCode& a, const MergedCode& b) {
                  return normalize_name(a.name) < normalize_name(b.name);
              });
    return book;
}

struct ReductionStats {
    long raw = 0;
    long unique = 0;
    long merges = 0;
    long largest_group = 0;
};

inline ReductionStats reduction_stats(const Codebook& book) {
    ReductionStats s;
    s.raw = book.raw_count;
    s.unique = static_cast<long>(book.entries.size());
    s.merges = s.raw - s.unique;
    for (const auto& e : book.entries)
        s.largest_group = std::max(s.largest_group, e.source_count);
    if (book.entries.empty())
        s.largest_group = 0;
    return s;
}

inline nlohmann::json codebook_to_json(const Codebook& book) {
    nlohmann::json j;
    j["kind"] = kind_key(book.kind);
    j["raw_count"] = book.raw_count;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : book.entries) {
        nlohmann::json quotes = nlohmann::json::array();
        for (const auto& q : e.quotes)
            quotes.push_back({{"quote", q.quote}, {"interview_id", q.interview_id}, {"chunk_id", q.chunk_id}});
        j["entries"].push_back({{"code_id", e.code_id},
                                {"name", e.name},
                                {"description", e.description},
                                {"aliases", e.aliases},
                                {"source_count", e.source_count},
                                {"quotes", quotes}});
    }
    j["merge_log"] = nlohmann::json::array();
    for (const auto& d : book.merge_log)
        j["merge_log"].push_back({{"kept", d.kept_id},
                                  {"merged", d.merged_id},
                                  {"similarity", d.similarity},
                                  {"exact", d.exact}});
    return j;
}

inline Codebook codebook_from_json(const nlohmann::json& j) {
    Codebook book;
    book.kind = kind_from_key(j.at("kind").get<std::string>());
    book.raw_count = j.value("raw_count", 0L);
    for (const auto& ej : j.at("entries")) {
        MergedCode e;
        e.code_id = ej.at("code_id").get<std::string>();
        e.name = ej.at("name").get<std::string>();
        e.description = ej.at("description").get<std::string>();
        e.aliases = ej.value("aliases", std::vector<std::string>{});
        e.source_count = ej.value("source_count", 1L);
        for (const auto& qj : ej.value("quotes", nlohmann::json::array()))
            e.quotes.push_back({qj.at("quote").get<std::string>(),
                                qj.at("interview_id").get<std::string>(),
                                qj.at("chunk_id").get<std::string>()});
        book.entries.push_back(std::move(e));
    }
    for (const auto& dj : j.value("merge_log", nlohmann::json::array()))
        book.merge_log.push_back({dj.at("kept").get<std::string>(), dj.at("merged").get<std::string>(),
                                  dj.at("similarity").get<double>(), dj.at("exact").get<bool>()});
    return book;
}

// Human-readable merge log, one decision per line.
inline std::string merge_log_text(const Codebook& book) {
    std::string out;
    for (const auto& d : book.merge_log) {
        char sim[32];
        std::snprintf(sim, sizeof(sim), "%.3f", d.similarity);
        out += d.merged_id + " -> " + d.kept_id + " (" + (d.exact ? "exact" : "similar") +
               ", similarity " + sim + ")\n";
    }
    return out;
}

} // namespace personaforge
