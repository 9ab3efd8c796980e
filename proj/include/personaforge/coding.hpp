#pragma once
#include "personaforge/corpus.hpp"
#include "personaforge/gateway.hpp"
#include "personaforge/json_extract.hpp"
#include "personaforge/report.hpp"
#include "personaforge/result.hpp"
#include "personaforge/util.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace personaforge {

struct StageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class CodeKind { Behaviour, Frustration, Goal, PersonalityTrait };

inline const std::vector<CodeKind>& all_kinds() {
    static const std::vector<CodeKind> kinds = {CodeKind::Behaviour, CodeKind::Frustration,
                                                CodeKind::Goal, CodeKind::PersonalityTrait};
    return kinds;
}

// One analysis lens: its coding-prompt definition and the single top-level
// key the model is told to put its entries under.
struct KindSpec {
    CodeKind kind = CodeKind::Behaviour;
    std::string label;      // "Behaviour"
    std::string noun;       // "user behaviours", as prompted
    std::string singular;   // "behaviour"
    std::string definition; // leading definition sentence of the prompt
    std::string top_key;    // "behaviours"
};

inline const std::vector<KindSpec>& default_kind_specs() {
    static const std::vector<KindSpec> specs = {
        {CodeKind::Behaviour, "Behaviour", "user behaviours", "behaviour",
         "User behavior are the actions, interactions, and communications made by individuals "
         "while engaging with digital or physical products, or services",
         "behaviours"},
        {CodeKind::Frustration, "Frustration", "user frustrations", "frustration",
         "Frustrations are feelings of dissatisfaction, resulting from obstacles, unmet "
         "expectations, or barriers to achieving one's goals.",
         "frustrations"},
        {CodeKind::Goal, "Goal", "user goals", "goal",
         "User goals are the specific objectives or intentions that individuals aim to "
         "accomplish when interacting with a product or service.",
         "goals"},
        {CodeKind::PersonalityTrait, "Personality trait", "user personality traits",
         "personality trait",
         "User personality traits refer to typical patterns of behavior, thoughts, and "
         "emotions of users.",
         "traits"},
    };
    return specs;
}

inline const KindSpec& kind_spec(CodeKind kind, const std::vector<KindSpec>& specs = default_kind_specs()) {
    for (const auto& s : specs)
        if (s.kind == kind)
            return s;
    throw std::logic_error("unknown code kind");
}

inline std::string kind_key(CodeKind kind) { return kind_spec(kind).top_key; }

inline CodeKind kind_from_key(const std::string& key) {
    for (const auto& s : default_kind_specs())
        if (s.top_key == key)
            return s.kind;
    throw std::invalid_argument("unknown kind key: " + key);
}

// A labeled pattern found in one chunk, with provenance back to the
// interview and chunk it came from.
struct Code {
    std::string code_id;
    CodeKind kind = CodeKind::Behaviour;
    std::string name;
    std::string description;
    std::string quote;
    std::vector<std::pair<std::string, std::string>> provenance; // (interview_id, chunk_id)
};

// Definition, instruction, json-format request, then the chunk inside
// triple backticks. The prompt ends byte-exact with the delimited text.
inline std::string build_coding_prompt(const TranscriptChunk& chunk, const KindSpec& spec, int max_codes) {
    if (max_codes < 1)
        throw std::invalid_argument("build_coding_prompt: max_codes must be >= 1");
    std::string p;
    p += spec.definition;
    p += "\n\n";
    p += "Identify up to " + std::to_string(max_codes) + " relevant " + spec.noun +
         " of the interviewee in the text below, provide a name for each " + spec.singular +
         ", a summary description of the " + spec.singular +
         " and a quote from the respondent for each " + spec.singular + " no longer than 4 lines\n\n";
    p += "Format the response as a json file keeping names, descriptions and quotes together in "
         "the json, and keep them together in '" +
         spec.top_key + "'.\n\n";
    p += "```" + chunk.text + "```";
    return p;
}

inline std::string json_reminder(const std::string& top_key) {
    return "Respond with valid json only, under the key '" + top_key + "'.";
}

struct ParsedCodes {
    std::vector<Code> codes;
    std::vector<std::string> warnings;
};

inline Outcome<ParsedCodes> parse_codes(const std::string& response_text, const KindSpec& spec,
                                        const TranscriptChunk& chunk, int max_codes) {
    auto doc = extract_json(response_text);
    if (!doc)
        return make_error(ErrorKind::MalformedResponse, chunk.chunk_id + ": response is not a json document");
    const nlohmann::json* entries = nullptr;
    if (doc->is_object()) {
        auto it = doc->find(spec.top_key);
        if (it != doc->end() && it->is_array())
            entries = &*it;
    }
    if (!entries)
        return make_error(ErrorKind::MalformedResponse,
                          chunk.chunk_id + ": missing top key '" + spec.top_key + "'");

    ParsedCodes out;
    for (const auto& e : *entries) {
        if (static_cast<int>(out.codes.size()) >= max_codes) {
            out.warnings.push_back(chunk.chunk_id + ": truncated entries beyond max_codes=" +
                                   std::to_string(max_codes));
            break;
        }
        if (!e.is_object()) {
            out.warnings.push_back(chunk.chunk_id + ": skipped non-object entry");
            continue;
        }
        Code c;
        c.kind = spec.kind;
        c.name = trim(first_string(e, {"name", "Name", "code", "title"}));
        c.description = trim(first_string(e, {"description", "Description", "summary"}));
        c.quote = trim(first_string(e, {"quote", "Quote"}));
        if (c.name.empty() || c.description.empty()) {
            out.warnings.push_back(chunk.chunk_id + ": skipped entry with empty name or description");
            continue;
        }
        c.code_id = chunk.chunk_id + ":" + spec.top_key + ":" + std::to_string(out.codes.size());
        c.provenance.emplace_back(chunk.interview_id, chunk.chunk_id);
        out.codes.push_back(std::move(c));
    }
    if (out.codes.empty())
        return make_error(ErrorKind::MalformedResponse, chunk.chunk_id + ": zero valid entries");
    return out;
}

struct CodingResult {
    std::map<CodeKind, std::vector<Code>> by_kind;
    StageReport report;
};

// Phase-2 driver: every (chunk, kind) pair is prompted, parsed, and
// provenance-checked. A malformed response earns exactly one retry with a
// json reminder appended; per-pair failures are recorded, and the stage
// only aborts when more than `max_failure_fraction` of pairs fail.
inline CodingResult code_corpus(const CorpusManifest& manifest, const std::vector<KindSpec>& specs,
                                Gateway& gateway, int max_codes, double max_failure_fraction = 0.2) {
    struct Task {
        const KindSpec* spec;
        const TranscriptChunk* chunk;
    };
    std::vector<Task> tasks;
    for (const auto& spec : specs)
        for (const auto& chunk : manifest.chunks)
            tasks.push_back({&spec, &chunk});

    struct Slot {
        std::vector<Code> codes;
        std::vector<std::string> warnings;
        std::string failure;
    };
    std::vector<Slot> slots(tasks.size());

    parallel_for(tasks.size(), gateway.profile().max_in_flight, [&](size_t i) {
        const auto& [spec, chunk] = tasks[i];
        Slot& slot = slots[i];
        std::string prompt = build_coding_prompt(*chunk, *spec, max_codes);
        auto attempt = [&](const std::string& p) -> Outcome<ParsedCodes> {
            auto completion = gateway.complete(p, "code");
            if (!completion.ok())
                return completion.error();
            return parse_codes(completion.value().text, *spec, *chunk, max_codes);
        };
        auto parsed = attempt(prompt);
        if (!parsed.ok() && parsed.error().kind == ErrorKind::MalformedResponse) {
            slot.warnings.push_back(chunk->chunk_id + "/" + spec->top_key +
                                    ": malformed response, retrying with json reminder");
            parsed = attempt(prompt + "\n" + json_reminder(spec->top_key));
        }
        if (!parsed.ok()) {
            slot.failure = chunk->chunk_id + "/" + spec->top_key + ": " + parsed.error().message();
            return;
        }
        slot.codes = std::move(parsed.value().codes);
        for (auto& w : parsed.value().warnings)
            slot.warnings.push_back(std::move(w));
        for (const auto& code : slot.codes) {
            if (!code.quote.empty() && !fuzzy_contains(chunk->text, code.quote))
                slot.warnings.push_back("potential hallucination: quote of " + code.code_id +
                                        " not found in source chunk");
            if (code.quote.size() > 4 * 80)
                slot.warnings.push_back(code.code_id + ": quote longer than 4 lines");
        }
    });

    CodingResult result;
    result.report.stage = "code";
    for (size_t i = 0; i < tasks.size(); ++i) {
        auto& slot = slots[i];
        for (auto& c : slot.codes)
            result.by_kind[tasks[i].spec->kind].push_back(std::move(c));
        for (auto& w : slot.warnings)
            result.report.warn(std::move(w));
        if (!slot.failure.empty())
            result.report.fail(std::move(slot.failure));
    }
    result.report.counts["pairs"] = static_cast<long>(tasks.size());
    result.report.counts["failed_pairs"] = static_cast<long>(result.report.failures.size());
    long total_codes = 0;
    for (const auto& [kind, codes] : result.by_kind) {
        result.report.counts["codes_" + kind_key(kind)] = static_cast<long>(codes.size());
        total_codes += static_cast<long>(codes.size());
    }
    result.report.counts["codes_total"] = total_codes;

    if (!tasks.empty() &&
        static_cast<double>(result.report.failures.size()) >
            max_failure_fraction * static_cast<double>(tasks.size())) {
        std::string msg = "coding stage aborted: " + std::to_string(result.report.failures.size()) +
                          " of " + std::to_string(tasks.size()) + " pairs failed";
        for (const auto& f : result.report.failures)
            msg += "\n  " + f;
        throw StageError(msg);
    }
    return result;
}

inline nlohmann::json codes_to_json(const std::vector<Code>& codes) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : codes) {
        nlohmann::json prov = nlohmann::json::array();
        for (const auto& [iv, ch] : c.provenance)
            prov.push_back({{"interview_id", iv}, {"chunk_id", ch}});
        arr.push_back({{"code_id", c.code_id},
                       {"kind", kind_key(c.kind)},
                       {"name", c.name},
                       {"description", c.description},
                       {"quote", c.quote},
                       {"provenance", prov}});
    }
    return arr;
}

inline std::vector<Code> codes_from_json(const nlohmann::json& arr) {
    std::vector<Code> out;
    for (const auto& j : arr) {
        Code c;
        c.code_id = j.at("code_id").get<std::string>();
        c.kind = kind_from_key(j.at("kind").get<std::string>());
        c.name = j.at("name").get<std::string>();
        c.description = j.at("description").get<std::string>();
        c.quote = j.value("quote", "");
        for (const auto& p : j.value("provenance", nlohmann::json::array()))
            c.provenance.emplace_back(p.at("interview_id").get<std::string>(),
                                      p.at("chunk_id").get<std::string>());
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace personaforge
