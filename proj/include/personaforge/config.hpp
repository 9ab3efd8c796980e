#pragma once
#include "personaforge/coding.hpp"
#include "personaforge/corpus.hpp"
#include "personaforge/gateway.hpp"
#include "personaforge/util.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace personaforge {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::vector<CleaningRule> default_cleaning_rules() {
    return {
        {"bracketed-markers", R"(^\s*\[.*\]\s*$)"},    // stage directions, [intro] blocks
        {"interviewer-label", R"(^\s*INTERVIEWER\s*:)"}, // drop the question lines, keep answers
    };
}

struct PipelineConfig {
    ModelProfile profile;

    int chunk_min_words = 600;
    int chunk_max_words = 1800;
    std::vector<CleaningRule> cleaning_rules = default_cleaning_rules();

    int max_codes = 4;
    double max_failure_fraction = 0.2;
    std::vector<KindSpec> kind_specs = default_kind_specs();

    double similarity_threshold = 0.9;

    std::map<CodeKind, int> theme_counts = {{CodeKind::Behaviour, 11},
                                            {CodeKind::Frustration, 11},
                                            {CodeKind::Goal, 11},
                                            {CodeKind::PersonalityTrait, 8}};
    long theme_token_budget = 0; // 0 = derive from the model profile

    int persona_count = 5;
    std::optional<std::uint64_t> seed; // unset = draw one and record it in the manifest
    int redraw_cap = 25;

    std::vector<std::string> inputs;

    bool mock_enabled = false;
    std::string mock_fixture_file;
    std::uint64_t mock_seed = 0;

    double estimator_inflation = 1.0;

    TokenEstimator make_estimator() const {
        TokenEstimator est;
        est.inflation = estimator_inflation;
        return est;
    }

    // Only fields that influence artifact content take part in the hash;
    // retry pacing, key names and parallelism knobs do not.
    nlohmann::json semantic_json() const {
        nlohmann::json defs;
        for (const auto& s : kind_specs)
            defs[s.top_key] = s.definition;
        nlohmann::json counts;
        for (const auto& [kind, n] : theme_counts)
            counts[kind_key(kind)] = n;
        nlohmann::json rules = nlohmann::json::array();
        for (const auto& r : cleaning_rules)
            rules.push_back({{"name", r.name}, {"pattern", r.pattern}});
        return {{"model",
                 {{"name", profile.model_name},
                  {"endpoint_url", profile.endpoint_url},
                  {"context_limit", profile.context_limit},
                  {"response_reserve", profile.response_reserve},
                  {"temperature", profile.temperature}}},
                {"chunking", {{"min_words", chunk_min_words}, {"max_words", chunk_max_words}}},
                {"cleaning_rules", rules},
                {"coding",
                 {{"max_codes", max_codes},
                  {"max_failure_fraction", max_failure_fraction},
                  {"definitions", defs}}},
                {"codebook", {{"similarity_threshold", similarity_threshold}}},
                {"themes", {{"counts", counts}, {"token_budget", theme_token_budget}}},
                {"personas",
                 {{"count", persona_count},
                  {"seed", seed ? nlohmann::json(*seed) : nlohmann::json()},
                  {"redraw_cap", redraw_cap}}},
                {"inputs", inputs},
                {"mock",
                 {{"enabled", mock_enabled},
                  {"fixtures", mock_fixture_file},
                  {"seed", mock_seed}}},
                {"estimator", {{"inflation", estimator_inflation}}}};
    }

    std::string config_hash() const { return to_hex(fnv1a(semantic_json().dump())); }

    // Collects every violation instead of stopping at the first.
    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (profile.context_limit <= 0)
            errors.push_back("model.context_limit must be positive");
        if (profile.response_reserve <= 0 || profile.response_reserve >= profile.context_limit)
            errors.push_back("model.response_reserve must satisfy 0 < reserve < context_limit");
        if (profile.max_attempts < 1)
            errors.push_back("model.max_attempts must be >= 1");
        if (profile.max_in_flight < 1)
            errors.push_back("model.max_in_flight must be >= 1");
        if (chunk_min_words <= 0 || chunk_min_words > chunk_max_words)
            errors.push_back("chunking requires 0 < min_words <= max_words");
        if (max_codes < 1)
            errors.push_back("coding.max_codes must be >= 1");
        if (max_failure_fraction < 0.0 || max_failure_fraction > 1.0)
            errors.push_back("coding.max_failure_fraction must be in [0, 1]");
        if (similarity_threshold <= 0.0 || similarity_threshold > 1.0)
            errors.push_back("codebook.similarity_threshold must be in (0, 1]");
        for (const auto& [kind, n] : theme_counts)
            if (n < 2)
                errors.push_back("themes.counts." + kind_key(kind) + " must be >= 2");
        if (theme_token_budget < 0)
            errors.push_back("themes.token_budget must be >= 0 (0 derives a default)");
        if (persona_count < 1)
            errors.push_back("personas.count must be >= 1");
        if (redraw_cap < 1)
            errors.push_back("personas.redraw_cap must be >= 1");
        if (estimator_inflation < 1.0)
            errors.push_back("estimator.inflation must be >= 1.0 to stay conservative");
        for (const auto& s : kind_specs)
            if (s.definition.empty())
                errors.push_back("coding.definitions." + s.top_key + " must not be empty");
        return errors;
    }

    void validate_or_throw() const {
        auto errors = validate();
        if (errors.empty())
            return;
        std::string msg = "invalid configuration:";
        for (const auto& e : errors)
            msg += "\n  - " + e;
        throw ConfigError(msg);
    }
};

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    if (j.contains("model")) {
        const auto& m = j.at("model");
        cfg.profile.model_name = m.value("name", cfg.profile.model_name);
        cfg.profile.endpoint_url = m.value("endpoint_url", cfg.profile.endpoint_url);
        cfg.profile.context_limit = m.value("context_limit", cfg.profile.context_limit);
        cfg.profile.response_reserve = m.value("response_reserve", cfg.profile.response_reserve);
        cfg.profile.temperature = m.value("temperature", cfg.profile.temperature);
        cfg.profile.api_key_env = m.value("api_key_env", cfg.profile.api_key_env);
        cfg.profile.max_attempts = m.value("max_attempts", cfg.profile.max_attempts);
        cfg.profile.backoff_base_ms = m.value("backoff_base_ms", cfg.profile.backoff_base_ms);
        cfg.profile.backoff_factor = m.value("backoff_factor", cfg.profile.backoff_factor);
        cfg.profile.max_in_flight = m.value("max_in_flight", cfg.profile.max_in_flight);
    }
    if (j.contains("chunking")) {
        cfg.chunk_min_words = j.at("chunking").value("min_words", cfg.chunk_min_words);
        cfg.chunk_max_words = j.at("chunking").value("max_words", cfg.chunk_max_words);
    }
    if (j.contains("cleaning_rules")) {
        cfg.cleaning_rules.clear();
        for (const auto& r : j.at("cleaning_rules"))
            cfg.cleaning_rules.push_back({r.at("name").get<std::string>(), r.at("pattern").get<std::string>()});
    }
    if (j.contains("coding")) {
        const auto& c = j.at("coding");
        cfg.max_codes = c.value("max_codes", cfg.max_codes);
        cfg.max_failure_fraction = c.value("max_failure_fraction", cfg.max_failure_fraction);
        if (c.contains("definitions"))
            for (auto& spec : cfg.kind_specs)
                spec.definition = c.at("definitions").value(spec.top_key, spec.definition);
    }
    if (j.contains("codebook"))
        cfg.similarity_threshold = j.at("codebook").value("similarity_threshold", cfg.similarity_threshold);
    if (j.contains("themes")) {
        const auto& t = j.at("themes");
        if (t.contains("counts"))
            for (auto& [kind, n] : cfg.theme_counts)
                n = t.at("counts").value(kind_key(kind), n);
        cfg.theme_token_budget = t.value("token_budget", cfg.theme_token_budget);
    }
    if (j.contains("personas")) {
        const auto& p = j.at("personas");
        cfg.persona_count = p.value("count", cfg.persona_count);
        if (p.contains("seed") && !p.at("seed").is_null())
            cfg.seed = p.at("seed").get<std::uint64_t>();
        cfg.redraw_cap = p.value("redraw_cap", cfg.redraw_cap);
    }
    if (j.contains("inputs"))
        cfg.inputs = j.at("inputs").get<std::vector<std::string>>();
    if (j.contains("mock")) {
        const auto& m = j.at("mock");
        cfg.mock_enabled = m.value("enabled", cfg.mock_enabled);
        cfg.mock_fixture_file = m.value("fixtures", cfg.mock_fixture_file);
        cfg.mock_seed = m.value("seed", cfg.mock_seed);
    }
    if (j.contains("estimator"))
        cfg.estimator_inflation = j.at("estimator").value("inflation", cfg.estimator_inflation);
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    auto doc = nlohmann::json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded())
        throw ConfigError("config file is not valid json: " + path);
    PipelineConfig cfg = config_from_json(doc);
    cfg.validate_or_throw();
    return cfg;
}

} // namespace personaforge
