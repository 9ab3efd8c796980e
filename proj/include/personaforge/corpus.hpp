#pragma once
#include "personaforge/text.hpp"
#include "personaforge/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

namespace personaforge {

struct CorpusError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A named line filter: any line matching `pattern` (ECMAScript regex,
// searched) is removed during cleaning. Cleaning is mechanical only;
// judgment-based edits stay with the human.
struct CleaningRule {
    std::string name;
    std::string pattern;
};

struct Interview {
    std::string interview_id;
    std::string source_path;
    std::string raw_text;
    std::string cleaned_text;
};

struct TranscriptChunk {
    std::string chunk_id;
    std::string interview_id;
    int sequence_index = 0;
    std::string text;
    int word_count = 0;
};

struct CorpusManifest {
    std::string corpus_id;
    std::vector<Interview> interviews;
    std::vector<TranscriptChunk> chunks;
    std::string created_at;
    std::vector<std::string> cleaning_rules_applied;
};

// Drop rule-matching lines, collapse horizontal whitespace, and squeeze
// blank-line runs down to a single paragraph break.
inline std::string clean_text(const std::string& raw, const std::vector<CleaningRule>& rules) {
    std::vector<std::regex> compiled;
    compiled.reserve(rules.size());
    for (const auto& r : rules)
        compiled.emplace_back(r.pattern, std::regex::ECMAScript);

    std::string out;
    out.reserve(raw.size());
    int pending_breaks = 0;
    bool any_content = false;
    for (const auto& line : split_lines(raw)) {
        bool dropped = false;
        for (const auto& re : compiled) {
            if (std::regex_search(line, re)) {
                dropped = true;
                break;
            }
        }
        if (dropped)
            continue;
        std::string squeezed = normalize_whitespace(line);
        if (squeezed.empty()) {
            if (any_content)
                pending_breaks = std::min(pending_breaks + 1, 2);
            continue;
        }
        if (any_content)
            out.append(pending_breaks >= 1 ? "\n\n" : "\n");
        pending_breaks = 0;
        out += squeezed;
        any_content = true;
    }
    return out;
}

// Greedy sentence-fill chunker. Accumulates sentences up to max_words;
// when the next sentence would overflow and the open chunk is still under
// min_words, the sentence is word-split to fill the chunk to exactly
// max_words. Non-final chunks therefore always land in [min, max]; the
// final chunk may be shorter.
inline std::vector<TranscriptChunk> chunk(const Interview& interview, int min_words, int max_words) {
    if (min_words <= 0 || min_words > max_words)
        throw std::invalid_argument("chunk: require 0 < min_words <= max_words");
    if (interview.cleaned_text.empty())
        throw CorpusError(interview.interview_id + ": cleaned_text empty");

    std::vector<std::string> segments = split_sentences(interview.cleaned_text);
    std::vector<TranscriptChunk> chunks;
    std::string cur;
    int cur_words = 0;

    auto close = [&] {
        if (cur.empty())
            return;
        TranscriptChunk c;
        c.interview_id = interview.interview_id;
        c.sequence_index = static_cast<int>(chunks.size());
        char seq[16];
        std::snprintf(seq, sizeof(seq), "%03d", c.sequence_index);
        c.chunk_id = interview.interview_id + "-c" + seq;
        c.text = std::move(cur);
        c.word_count = static_cast<int>(count_words(c.text));
        chunks.push_back(std::move(c));
        cur.clear();
        cur_words = 0;
    };
    auto append_piece = [&](const std::string& piece, int words) {
        if (!cur.empty())
            cur += ' ';
        cur += piece;
        cur_words += words;
    };

    size_t idx = 0;
    std::string carry; // remainder of a word-split sentence
    while (idx < segments.size() || !carry.empty()) {
        const std::string& seg = carry.empty() ? segments[idx] : carry;
        int w = static_cast<int>(count_words(seg));
        if (cur_words + w <= max_words) {
            append_piece(seg, w);
            if (carry.empty())
                ++idx;
            else
                carry.clear();
            continue;
        }
        if (cur_words >= min_words) {
            close();
            continue;
        }
        // Fill to max_words by splitting the segment at a word boundary.
        int need = max_words - cur_words;
        auto words = split_words(seg);
        std::string head, tail;
        for (size_t i = 0; i < words.size(); ++i) {
            std::string& dst = static_cast<int>(i) < need ? head : tail;
            if (!dst.empty())
                dst += ' ';
            dst += words[i];
        }
        append_piece(head, need);
        close();
        if (carry.empty())
            ++idx;
        carry = std::move(tail);
    }
    close();
    return chunks;
}

// One Interview per path, ordered by path; fails loudly naming the file
// or interview at fault.
inline std::vector<Interview> ingest(std::vector<std::string> paths, const std::vector<CleaningRule>& rules) {
    std::sort(paths.begin(), paths.end());
    std::vector<Interview> interviews;
    interviews.reserve(paths.size());
    for (const auto& p : paths) {
        Interview iv;
        iv.source_path = p;
        iv.interview_id = std::filesystem::path(p).stem().string();
        for (const auto& prev : interviews) {
            if (prev.interview_id == iv.interview_id)
                throw CorpusError("duplicate interview id: " + iv.interview_id);
        }
        iv.raw_text = read_file(p);
        iv.cleaned_text = clean_text(iv.raw_text, rules);
        if (iv.cleaned_text.empty())
            throw CorpusError(iv.interview_id + ": empty after cleaning");
        interviews.push_back(std::move(iv));
    }
    return interviews;
}

// ingest + per-interview chunking, assembled into one manifest.
inline CorpusManifest build_manifest(const std::vector<std::string>& paths,
                                     const std::vector<CleaningRule>& rules,
                                     int min_words, int max_words) {
    CorpusManifest m;
    m.interviews = ingest(paths, rules);
    for (const auto& r : rules)
        m.cleaning_rules_applied.push_back(r.name);
    std::uint64_t h = fnv1a("corpus");
    for (const auto& iv : m.interviews) {
        h ^= fnv1a(iv.interview_id) + fnv1a(iv.cleaned_text);
        auto ivchunks = chunk(iv, min_words, max_words);
        m.chunks.insert(m.chunks.end(), ivchunks.begin(), ivchunks.end());
    }
    m.corpus_id = "corpus-" + to_hex(h).substr(0, 12);
    m.created_at = iso_timestamp_utc();
    return m;
}

inline nlohmann::json manifest_to_json(const CorpusManifest& m) {
    nlohmann::json j;
    j["corpus_id"] = m.corpus_id;
    j["created_at"] = m.created_at;
    j["cleaning_rules_applied"] = m.cleaning_rules_applied;
    j["interviews"] = nlohmann::json::array();
    for (const auto& iv : m.interviews) {
        j["interviews"].push_back({{"interview_id", iv.interview_id},
                                   {"source_path", iv.source_path},
                                   {"cleaned_text", iv.cleaned_text}});
    }
    j["chunks"] = nlohmann::json::array();
    for (const auto& c : m.chunks) {
        j["chunks"].push_back({{"chunk_id", c.chunk_id},
                               {"interview_id", c.interview_id},
                               {"sequence_index", c.sequence_index},
                               {"text", c.text},
                               {"word_count", c.word_count}});
    }
    return j;
}

inline CorpusManifest manifest_from_json(const nlohmann::json& j) {
    CorpusManifest m;
    m.corpus_id = j.at("corpus_id").get<std::string>();
    m.created_at = j.value("created_at", "");
    m.cleaning_rules_applied = j.value("cleaning_rules_applied", std::vector<std::string>{});
    for (const auto& ij : j.at("interviews")) {
        Interview iv;
        iv.interview_id = ij.at("interview_id").get<std::string>();
        iv.source_path = ij.value("source_path", "");
        iv.cleaned_text = ij.value("cleaned_text", "");
        m.interviews.push_back(std::move(iv));
    }
    for (const auto& cj : j.at("chunks")) {
        TranscriptChunk c;
        c.chunk_id = cj.at("chunk_id").get<std::string>();
        c.interview_id = cj.at("interview_id").get<std::string>();
        c.sequence_index = cj.at("sequence_index").get<int>();
        c.text = cj.at("text").get<std::string>();
        c.word_count = cj.at("word_count").get<int>();
        m.chunks.push_back(std::move(c));
    }
    return m;
}

} // namespace personaforge
