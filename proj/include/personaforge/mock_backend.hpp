#pragma once
#include "personaforge/gateway.hpp"
#include "personaforge/text.hpp"
#include "personaforge/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace personaforge {

struct RecordedRequest {
    std::string stage;
    std::string prompt;
    std::uint64_t prompt_hash = 0;
    long estimated_prompt_tokens = 0;
    int max_response_tokens = 0;
    int context_limit = 0;
};

struct MockFault {
    std::string stage;  // empty matches any stage
    int at_call = 1;    // 1-based ordinal within the stage
    int times = 1;      // consecutive calls to fail from at_call on
    ErrorKind kind = ErrorKind::Transport;
    std::string detail = "injected fault";
};

namespace mock {

inline std::string title_case(std::string word) {
    if (!word.empty())
        word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
    for (size_t i = 1; i < word.size(); ++i)
        word[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(word[i])));
    return word;
}

inline std::string strip_punct(const std::string& word) {
    std::string out;
    for (char c : word)
        if (is_alnum_ascii(static_cast<unsigned char>(c)) || c == '-')
            out.push_back(c);
    return out;
}

// The two longest distinct words of the sentence, title-cased, as a
// plausible code name. Deterministic: ties keep earlier words.
inline std::string salient_name(const std::string& sentence) {
    auto words = split_words(sentence);
    std::string best, second;
    for (const auto& raw : words) {
        std::string w = strip_punct(raw);
        if (w.size() < 4)
            continue;
        std::string lower = to_lower(w);
        if (lower == to_lower(best) || lower == to_lower(second))
            continue;
        if (w.size() > best.size()) {
            second = best;
            best = w;
        } else if (w.size() > second.size()) {
            second = w;
        }
    }
    if (best.empty())
        return "General Remark";
    if (second.empty())
        return title_case(best);
    return title_case(second) + " " + title_case(best);
}

inline std::string first_words(const std::string& text, size_t n) {
    auto words = split_words(text);
    std::string out;
    for (size_t i = 0; i < std::min(n, words.size()); ++i) {
        if (!out.empty())
            out += ' ';
        out += words[i];
    }
    return out;
}

inline std::string truncate_words(const std::string& text, size_t max_chars) {
    if (text.size() <= max_chars)
        return text;
    auto words = split_words(text);
    std::string out;
    for (const auto& w : words) {
        if (out.size() + w.size() + 1 > max_chars)
            break;
        if (!out.empty())
            out += ' ';
        out += w;
    }
    return out.empty() ? text.substr(0, max_chars) : out;
}

inline long find_int_after(const std::string& text, const std::string& marker) {
    size_t pos = text.find(marker);
    if (pos == std::string::npos)
        return -1;
    pos += marker.size();
    long v = 0;
    bool any = false;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
        v = v * 10 + (text[pos] - '0');
        ++pos;
        any = true;
    }
    return any ? v : -1;
}

// Scripted stand-in for phase-2 coding: pulls real sentences out of the
// delimited chunk so every quote is verbatim source text.
inline std::string synthesize_codes(const std::string& prompt, std::uint64_t h) {
    std::string top_key = "items";
    size_t kpos = prompt.find("keep them together in '");
    if (kpos != std::string::npos) {
        kpos += std::string("keep them together in '").size();
        size_t kend = prompt.find('\'', kpos);
        if (kend != std::string::npos)
            top_key = prompt.substr(kpos, kend - kpos);
    }
    long max_codes = find_int_after(prompt, "Identify up to ");
    if (max_codes < 1)
        max_codes = 4;

    size_t b = prompt.find("```");
    size_t e = prompt.rfind("```");
    std::string chunk = (b != std::string::npos && e > b + 3) ? prompt.substr(b + 3, e - b - 3)
                                                              : prompt;
    auto sentences = split_sentences(chunk);
    if (sentences.empty())
        sentences.push_back(chunk);

    size_t k = std::min<size_t>({static_cast<size_t>(max_codes), sentences.size(),
                                 3 + static_cast<size_t>(h % 2)});
    size_t start = static_cast<size_t>(h % sentences.size());
    size_t step = std::max<size_t>(1, sentences.size() / k);

    nlohmann::json entries = nlohmann::json::array();
    for (size_t i = 0; i < k; ++i) {
        const std::string& s = sentences[(start + i * step) % sentences.size()];
        entries.push_back({{"name", salient_name(s)},
                           {"description", "The interviewee talks about " +
                                               to_lower(first_words(s, 10)) + "."},
                           {"quote", truncate_words(s, 300)}});
    }
    nlohmann::json doc;
    doc[top_key] = entries;
    return doc.dump(1);
}

// Scripted stand-in for phase-3 grouping: deals the numbered topics
// round-robin into the requested number of groups and doubles topic 1
// into a second group to exercise multi-membership.
inline std::string synthesize_groups(const std::string& prompt) {
    long n_groups = find_int_after(prompt, "Create ");
    if (n_groups < 2)
        n_groups = 2;
    std::vector<std::string> topic_names;
    bool in_list = false;
    for (const auto& line : split_lines(prompt)) {
        std::string t = trim(line);
        if (t == "List of topics:") {
            in_list = true;
            continue;
        }
        if (!in_list || t.empty())
            continue;
        size_t i = 0;
        while (i < t.size() && t[i] >= '0' && t[i] <= '9')
            ++i;
        if (i == 0 || i >= t.size() || t[i] != '.')
            continue;
        std::string rest = trim(t.substr(i + 1));
        size_t colon = rest.find(':');
        topic_names.push_back(colon == std::string::npos ? rest : trim(rest.substr(0, colon)));
    }

    struct Group {
        std::vector<long> topics;
    };
    std::vector<Group> groups(static_cast<size_t>(n_groups));
    for (size_t t = 0; t < topic_names.size(); ++t)
        groups[t % groups.size()].topics.push_back(static_cast<long>(t + 1));
    if (groups.size() >= 2 && !topic_names.empty())
        groups[1].topics.insert(groups[1].topics.begin(), 1); // topic 1 sits in two groups

    nlohmann::json arr = nlohmann::json::array();
    for (const auto& g : groups) {
        if (g.topics.empty())
            continue;
        std::string lead = topic_names[static_cast<size_t>(g.topics.front() - 1)];
        std::string desc = "This group includes topics related to ";
        for (size_t i = 0; i < std::min<size_t>(3, g.topics.size()); ++i) {
            if (i > 0)
                desc += ", ";
            desc += to_lower(topic_names[static_cast<size_t>(g.topics[i] - 1)]);
        }
        desc += ".";
        arr.push_back({{"name", lead + " and related topics"},
                       {"description", desc},
                       {"topics", g.topics}});
    }
    nlohmann::json doc;
    doc["groups"] = arr;
    return doc.dump(1);
}

struct ListDigest {
    std::vector<std::string> theme_names;
    std::vector<std::string> code_names;
    std::vector<std::string> quotes;
};

inline ListDigest digest_list(const std::string& segment) {
    ListDigest d;
    for (const auto& raw : split_lines(segment)) {
        std::string line = trim(raw);
        if (line.rfind("Theme: ", 0) == 0) {
            d.theme_names.push_back(line.substr(7));
        } else if (line.rfind("- ", 0) == 0) {
            size_t colon = line.find(':');
            d.code_names.push_back(colon == std::string::npos ? line.substr(2)
                                                              : trim(line.substr(2, colon - 2)));
        } else if (line.rfind("Quote: \"", 0) == 0) {
            size_t close = line.rfind('"');
            if (close > 8)
                d.quotes.push_back(line.substr(8, close - 8));
        }
    }
    return d;
}

// Scripted stand-in for phase-6 write-up. The goal quote is copied from
// the goal list so provenance validation can succeed against the source.
inline std::string synthesize_persona(const std::string& prompt, std::uint64_t h) {
    auto segment = [&](const char* label) -> std::string {
        size_t b = prompt.find(label);
        if (b == std::string::npos)
            return "";
        b += std::string(label).size();
        size_t e = prompt.find("List of ", b);
        return prompt.substr(b, e == std::string::npos ? std::string::npos : e - b);
    };
    ListDigest frustrations = digest_list(segment("List of frustrations:"));
    ListDigest goals = digest_list(segment("List of goals:"));
    ListDigest behaviours = digest_list(segment("List of behaviours:"));
    ListDigest traits = digest_list(segment("List of personality traits:"));

    static const char* first_names[] = {"Sofia", "Marco", "Elena",  "Jonas", "Marta",
                                        "Pieter", "Anna",  "Luca",  "Greta", "Tomas"};
    static const char* last_names[] = {"Keller",  "Rossi",    "Novak",     "Bakker",
                                       "Lehmann", "Moreau",   "Kowalski",  "Lindqvist"};
    static const char* countries[] = {"Germany", "Italy",  "Netherlands", "France",
                                      "Poland",  "Sweden", "Austria",     "Spain"};
    std::string first = first_names[h % 10];
    std::string last = last_names[(h >> 8) % 8];
    std::string country = countries[(h >> 16) % 8];
    static const char* ages[] = {"Young age", "Middle age", "Old age"};
    std::string age = ages[(h >> 24) % 3];

    auto theme_or = [](const ListDigest& d, const char* fallback) {
        return d.theme_names.empty() ? std::string(fallback) : to_lower(d.theme_names.front());
    };
    std::string goal_theme = theme_or(goals, "their main objective");
    std::string frustration_theme = theme_or(frustrations, "recurring obstacles");
    std::string behaviour_theme = theme_or(behaviours, "their daily routine");

    auto take = [](const std::vector<std::string>& items, size_t n, size_t offset) {
        std::vector<std::string> out;
        for (size_t i = 0; i < items.size() && out.size() < n; ++i)
            out.push_back(items[(offset + i) % items.size()]);
        return out;
    };
    auto goals2 = take(goals.code_names, 2, h % std::max<size_t>(1, goals.code_names.size()));
    auto frus2 = take(frustrations.code_names, 2, (h >> 4) % std::max<size_t>(1, frustrations.code_names.size()));
    auto beh3 = take(behaviours.code_names, 3, 0);
    auto tra3 = take(traits.code_names, 3, 0);

    std::string out;
    out += "**Name and surname:** " + first + " " + last + "\n";
    out += "**Country:** " + country + "\n";
    out += "**Age:** " + age + "\n\n";
    out += "**Goal & Frustration:** " + first + "'s main goal is to make progress on " +
           goal_theme + ". " + first + "'s main frustration is " + frustration_theme + ".\n\n";
    if (!goals.quotes.empty())
        out += "**Quote:** \"" + goals.quotes[h % goals.quotes.size()] + "\"\n\n";
    out += "**Narrative:** " + first + " " + last + " lives in " + country +
           " and spends most working days close to the people the interviews describe. " + first +
           " cares most about " + goal_theme + " and keeps running into " + frustration_theme +
           ". Colleagues know " + first + " for " + behaviour_theme +
           ", and for a steady way of turning small observations into workable routines. "
           "Over the years " + first +
           " has learned which sources to trust, which tools repay the time spent on them, and "
           "when to simply ask a neighbour instead.\n\n";
    out += "**Additional goals:**\n";
    for (const auto& g : goals2)
        out += "- " + g + "\n";
    out += "\n**Additional frustrations:**\n";
    for (const auto& f : frus2)
        out += "- " + f + "\n";
    out += "\n**Behaviour:**\n";
    for (const auto& b : beh3)
        out += "- " + b + "\n";
    out += "\n**Personality:**\n";
    for (const auto& t : tra3)
        out += "- " + t + "\n";
    return out;
}

} // namespace mock

// Deterministic offline backend. Resolution order per request: fault
// schedule, scripted fixture keyed by (stage, prompt hash), then the
// per-stage synthesizer when enabled. Every request is recorded so tests
// can assert on what would have been transmitted.
class MockBackend : public CompletionBackend {
public:
    bool synthesize = true;
    std::uint64_t seed = 0;

    void add_fixture(const std::string& stage, const std::string& prompt, std::string response) {
        std::lock_guard<std::mutex> lock(mutex_);
        fixtures_[{stage, fnv1a(prompt)}] = std::move(response);
    }
    void add_fixture_hash(const std::string& stage, std::uint64_t prompt_hash, std::string response) {
        std::lock_guard<std::mutex> lock(mutex_);
        fixtures_[{stage, prompt_hash}] = std::move(response);
    }
    void add_fault(MockFault fault) {
        std::lock_guard<std::mutex> lock(mutex_);
        faults_.push_back(std::move(fault));
    }

    // Fixture file: {"synthesize": bool, "seed": n, "fixtures": [...], "faults": [...]}
    void load_fixture_file(const std::string& path) {
        auto doc = nlohmann::json::parse(read_file(path));
        std::lock_guard<std::mutex> lock(mutex_);
        synthesize = doc.value("synthesize", synthesize);
        seed = doc.value("seed", seed);
        for (const auto& f : doc.value("fixtures", nlohmann::json::array())) {
            std::uint64_t h = std::stoull(f.at("prompt_hash").get<std::string>(), nullptr, 16);
            fixtures_[{f.at("stage").get<std::string>(), h}] = f.at("response").get<std::string>();
        }
        for (const auto& f : doc.value("faults", nlohmann::json::array())) {
            MockFault mf;
            mf.stage = f.value("stage", "");
            mf.at_call = f.value("at_call", 1);
            mf.times = f.value("times", 1);
            mf.detail = f.value("detail", "injected fault");
            std::string kind = f.value("kind", "Transport");
            if (kind == "ContextOverflow") mf.kind = ErrorKind::ContextOverflow;
            else if (kind == "RateLimited") mf.kind = ErrorKind::RateLimited;
            else if (kind == "MalformedResponse") mf.kind = ErrorKind::MalformedResponse;
            else if (kind == "ProviderRejection") mf.kind = ErrorKind::ProviderRejection;
            else mf.kind = ErrorKind::Transport;
            faults_.push_back(std::move(mf));
        }
    }

    Outcome<CompletionResult> send(const CompletionRequest& request, const ModelProfile& profile) override {
        std::lock_guard<std::mutex> lock(mutex_);
        std::uint64_t h = fnv1a(request.prompt);
        log_.push_back({request.stage, request.prompt, h, request.estimated_prompt_tokens,
                        request.max_response_tokens, profile.context_limit});
        int ordinal = ++stage_calls_[request.stage];
        for (const auto& f : faults_) {
            if (!f.stage.empty() && f.stage != request.stage)
                continue;
            if (ordinal >= f.at_call && ordinal < f.at_call + f.times)
                return make_error(f.kind, f.detail);
        }
        auto it = fixtures_.find({request.stage, h});
        if (it != fixtures_.end())
            return CompletionResult{it->second, std::nullopt, std::nullopt, 0};
        if (!synthesize)
            return make_error(ErrorKind::ProviderRejection,
                              "no fixture for stage '" + request.stage + "' prompt hash " + to_hex(h));
        std::uint64_t salted = h ^ (seed * 0x9e3779b97f4a7c15ull);
        std::string text;
        if (request.stage == "code")
            text = mock::synthesize_codes(request.prompt, salted);
        else if (request.stage == "themes")
            text = mock::synthesize_groups(request.prompt);
        else if (request.stage == "persona")
            text = mock::synthesize_persona(request.prompt, salted);
        else
            return make_error(ErrorKind::ProviderRejection, "unknown stage tag: " + request.stage);
        return CompletionResult{std::move(text), std::nullopt, std::nullopt, 0};
    }

    std::vector<RecordedRequest> log() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return log_;
    }
    size_t calls(const std::string& stage) const {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = stage_calls_.find(stage);
        return it == stage_calls_.end() ? 0 : static_cast<size_t>(it->second);
    }
    size_t total_calls() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return log_.size();
    }
    void clear_log() {
        std::lock_guard<std::mutex> lock(mutex_);
        log_.clear();
        stage_calls_.clear();
    }

private:
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, std::uint64_t>, std::string> fixtures_;
    std::vector<MockFault> faults_;
    std::map<std::string, int> stage_calls_;
    std::vector<RecordedRequest> log_;
};

} // namespace personaforge
