#pragma once
#include "personaforge/codebook.hpp"
#include "personaforge/coding.hpp"
#include "personaforge/config.hpp"
#include "personaforge/corpus.hpp"
#include "personaforge/gateway.hpp"
#include "personaforge/persona.hpp"
#include "personaforge/report.hpp"
#include "personaforge/themes.hpp"
#include "personaforge/util.hpp"

#include <nlohmann/json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace personaforge {

inline const std::vector<std::string>& pipeline_stages() {
    static const std::vector<std::string> stages = {"ingest", "code", "reduce", "themes", "personas"};
    return stages;
}

inline int stage_index(const std::string& stage) {
    const auto& stages = pipeline_stages();
    for (size_t i = 0; i < stages.size(); ++i)
        if (stages[i] == stage)
            return static_cast<int>(i);
    throw std::invalid_argument("unknown stage: " + stage);
}

struct StageRecord {
    std::string stage;
    std::string status; // success | cached | failed
    std::string config_hash;
    std::string started_at;
    long duration_ms = 0;
    std::uint64_t seed = 0; // 0 = stage is not randomized
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
};

struct RunManifest {
    std::string run_id;
    std::string config_hash;
    std::map<std::string, std::uint64_t> seeds;
    std::vector<StageRecord> records; // pipeline order

    StageRecord* find(const std::string& stage) {
        for (auto& r : records)
            if (r.stage == stage)
                return &r;
        return nullptr;
    }
    const StageRecord* find(const std::string& stage) const {
        for (const auto& r : records)
            if (r.stage == stage)
                return &r;
        return nullptr;
    }

    void upsert(StageRecord record) {
        if (auto* existing = find(record.stage)) {
            *existing = std::move(record);
            return;
        }
        records.push_back(std::move(record));
        std::sort(records.begin(), records.end(), [](const StageRecord& a, const StageRecord& b) {
            return stage_index(a.stage) < stage_index(b.stage);
        });
    }
};

inline nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& r : m.records)
        stages.push_back({{"stage", r.stage},
                          {"status", r.status},
                          {"config_hash", r.config_hash},
                          {"started_at", r.started_at},
                          {"duration_ms", r.duration_ms},
                          {"seed", r.seed},
                          {"inputs", r.inputs},
                          {"outputs", r.outputs}});
    return {{"run_id", m.run_id}, {"config_hash", m.config_hash}, {"seeds", m.seeds}, {"stages", stages}};
}

inline RunManifest run_manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    m.run_id = j.at("run_id").get<std::string>();
    m.config_hash = j.value("config_hash", "");
    if (j.contains("seeds"))
        m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    for (const auto& rj : j.value("stages", nlohmann::json::array())) {
        StageRecord r;
        r.stage = rj.at("stage").get<std::string>();
        r.status = rj.value("status", "");
        r.config_hash = rj.value("config_hash", "");
        r.started_at = rj.value("started_at", "");
        r.duration_ms = rj.value("duration_ms", 0L);
        r.seed = rj.value("seed", std::uint64_t{0});
        r.inputs = rj.value("inputs", std::vector<std::string>{});
        r.outputs = rj.value("outputs", std::vector<std::string>{});
        m.records.push_back(std::move(r));
    }
    return m;
}

// One run at a time per run directory.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& run_dir) : path_(run_dir / ".lock") {
        std::filesystem::create_directories(run_dir);
        int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0)
            throw StageError("run directory is locked; remove " + path_.string() + " if stale");
        ::close(fd);
    }
    ~RunLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
};

// Staged pipeline with persisted artifacts: ingest -> code -> reduce ->
// themes -> personas. Outputs are written atomically, a completed stage
// with an unchanged config hash is skipped, and every randomized stage
// records its seed in the manifest.
class Pipeline {
public:
    Pipeline(PipelineConfig config, std::filesystem::path run_dir, CompletionBackend& backend,
             Gateway::Sleeper sleeper = nullptr)
        : config_(std::move(config)), run_dir_(std::move(run_dir)), backend_(backend),
          sleeper_(std::move(sleeper)) {
        config_.validate_or_throw();
    }

    const PipelineConfig& config() const { return config_; }
    const std::filesystem::path& run_dir() const { return run_dir_; }

    std::filesystem::path manifest_path() const { return run_dir_ / "manifest.json"; }

    RunManifest load_manifest() const {
        if (!std::filesystem::exists(manifest_path())) {
            RunManifest m;
            m.run_id = "run-" + to_hex(fnv1a(run_dir_.string() + iso_timestamp_utc())).substr(0, 12);
            m.config_hash = config_.config_hash();
            return m;
        }
        auto m = run_manifest_from_json(nlohmann::json::parse(read_file(manifest_path())));
        m.config_hash = config_.config_hash();
        return m;
    }

    RunManifest run_stage(const std::string& stage, bool force = false) {
        stage_index(stage); // validates the name
        RunLock lock(run_dir_);
        RunManifest manifest = load_manifest();
        run_stage_locked(stage, force, manifest);
        return manifest;
    }

    RunManifest run_all(bool force = false) {
        RunLock lock(run_dir_);
        RunManifest manifest = load_manifest();
        for (const auto& stage : pipeline_stages())
            run_stage_locked(stage, force, manifest);
        return manifest;
    }

    // Human-readable run summary from the manifest and stage reports.
    std::string report() const {
        RunManifest manifest = load_manifest();
        if (manifest.records.empty())
            return "no stages run\n";
        std::string out = "run " + manifest.run_id + " (config " + manifest.config_hash + ")\n";
        std::vector<std::string> warnings, failures;
        for (const auto& r : manifest.records) {
            out += "  " + r.stage + ": " + r.status;
            if (r.seed != 0)
                out += " (seed " + std::to_string(r.seed) + ")";
            out += " [" + std::to_string(r.duration_ms) + " ms]";
            auto report_path = run_dir_ / r.stage / "report.json";
            if (r.stage == "ingest")
                report_path = run_dir_ / "corpus" / "report.json";
            if (r.stage == "code")
                report_path = run_dir_ / "codes" / "report.json";
            if (r.stage == "reduce")
                report_path = run_dir_ / "codebook" / "report.json";
            if (std::filesystem::exists(report_path)) {
                auto sr = StageReport::from_json(nlohmann::json::parse(read_file(report_path)));
                std::string counts;
                for (const auto& [k, v] : sr.counts) {
                    if (!counts.empty())
                        counts += ", ";
                    counts += k + "=" + std::to_string(v);
                }
                if (!counts.empty())
                    out += " " + counts;
                for (const auto& w : sr.warnings)
                    warnings.push_back(r.stage + ": " + w);
                for (const auto& f : sr.failures)
                    failures.push_back(r.stage + ": " + f);
            }
            out += "\n";
        }
        if (!warnings.empty()) {
            out += "warnings:\n";
            for (const auto& w : warnings)
                out += "  - " + w + "\n";
        }
        if (!failures.empty()) {
            out += "failures:\n";
            for (const auto& f : failures)
                out += "  - " + f + "\n";
        }
        return out;
    }

private:
    PipelineConfig config_;
    std::filesystem::path run_dir_;
    CompletionBackend& backend_;
    Gateway::Sleeper sleeper_;

    std::string rel(const std::filesystem::path& p) const {
        return std::filesystem::relative(p, run_dir_).string();
    }
    void write_artifact(const std::filesystem::path& p, const nlohmann::json& j) const {
        atomic_write(p, j.dump(2) + "\n");
    }

    std::vector<std::string> stage_outputs(const std::string& stage) const {
        std::vector<std::string> out;
        if (stage == "ingest") {
            out = {"corpus/manifest.json", "corpus/report.json"};
        } else if (stage == "code") {
            for (const auto& s : config_.kind_specs)
                out.push_back("codes/" + s.top_key + ".json");
            out.push_back("codes/report.json");
        } else if (stage == "reduce") {
            for (const auto& s : config_.kind_specs) {
                out.push_back("codebook/" + s.top_key + ".json");
                out.push_back("codebook/" + s.top_key + "_merge_log.txt");
            }
            out.push_back("codebook/report.json");
        } else if (stage == "themes") {
            for (const auto& s : config_.kind_specs)
                out.push_back("themes/" + s.top_key + ".json");
            out.push_back("themes/report.json");
        } else if (stage == "personas") {
            for (int i = 1; i <= config_.persona_count; ++i) {
                char n[16];
                std::snprintf(n, sizeof(n), "%03d", i);
                out.push_back("personas/persona-" + std::string(n) + ".json");
                out.push_back("personas/persona-" + std::string(n) + ".txt");
            }
            out.push_back("personas/report.json");
        }
        return out;
    }

    void check_upstream(const std::string& stage) const {
        static const std::map<std::string, std::string> upstream = {
            {"code", "ingest"}, {"reduce", "code"}, {"themes", "reduce"}, {"personas", "themes"}};
        auto it = upstream.find(stage);
        if (it == upstream.end())
            return;
        for (const auto& artifact : stage_outputs(it->second)) {
            if (!std::filesystem::exists(run_dir_ / artifact))
                throw StageError(it->second + " stage required before '" + stage + "' (missing " +
                                 artifact + ")");
        }
    }

    bool is_cached(const std::string& stage, const RunManifest& manifest) const {
        const auto* record = manifest.find(stage);
        if (!record || (record->status != "success" && record->status != "cached"))
            return false;
        if (record->config_hash != config_.config_hash())
            return false;
        for (const auto& artifact : record->outputs)
            if (!std::filesystem::exists(run_dir_ / artifact))
                return false;
        return true;
    }

    void run_stage_locked(const std::string& stage, bool force, RunManifest& manifest) {
        check_upstream(stage);
        StageRecord record;
        record.stage = stage;
        record.config_hash = config_.config_hash();
        record.started_at = iso_timestamp_utc();
        if (!force && is_cached(stage, manifest)) {
            record.status = "cached";
            record.outputs = manifest.find(stage)->outputs;
            record.seed = manifest.find(stage)->seed;
            manifest.upsert(std::move(record));
            save_manifest(manifest);
            return;
        }
        auto started = std::chrono::steady_clock::now();
        if (stage == "ingest")
            record = exec_ingest(std::move(record));
        else if (stage == "code")
            record = exec_code(std::move(record));
        else if (stage == "reduce")
            record = exec_reduce(std::move(record));
        else if (stage == "themes")
            record = exec_themes(std::move(record));
        else
            record = exec_personas(std::move(record), manifest);
        record.duration_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        record.status = "success";
        manifest.upsert(std::move(record));
        save_manifest(manifest);
    }

    void save_manifest(const RunManifest& manifest) const {
        write_artifact(manifest_path(), manifest_to_json(manifest));
    }

    Gateway make_gateway() const {
        return Gateway(backend_, config_.profile, config_.make_estimator(), sleeper_);
    }

    StageRecord exec_ingest(StageRecord record) {
        if (config_.inputs.empty())
            throw StageError("ingest: no input files configured");
        CorpusManifest corpus = build_manifest(config_.inputs, config_.cleaning_rules,
                                               config_.chunk_min_words, config_.chunk_max_words);
        write_artifact(run_dir_ / "corpus" / "manifest.json", manifest_to_json(corpus));
        StageReport sr;
        sr.stage = "ingest";
        sr.counts["interviews"] = static_cast<long>(corpus.interviews.size());
        sr.counts["chunks"] = static_cast<long>(corpus.chunks.size());
        write_artifact(run_dir_ / "corpus" / "report.json", sr.to_json());
        record.inputs = config_.inputs;
        record.outputs = stage_outputs("ingest");
        return record;
    }

    StageRecord exec_code(StageRecord record) {
        auto corpus = manifest_from_json(nlohmann::json::parse(read_file(run_dir_ / "corpus" / "manifest.json")));
        Gateway gateway = make_gateway();
        CodingResult result =
            code_corpus(corpus, config_.kind_specs, gateway, config_.max_codes, config_.max_failure_fraction);
        for (const auto& spec : config_.kind_specs) {
            auto it = result.by_kind.find(spec.kind);
            static const std::vector<Code> none;
            write_artifact(run_dir_ / "codes" / (spec.top_key + ".json"),
                           codes_to_json(it == result.by_kind.end() ? none : it->second));
        }
        write_artifact(run_dir_ / "codes" / "report.json", result.report.to_json());
        record.inputs = {"corpus/manifest.json"};
        record.outputs = stage_outputs("code");
        return record;
    }

    StageRecord exec_reduce(StageRecord record) {
        StageReport sr;
        sr.stage = "reduce";
        for (const auto& spec : config_.kind_specs) {
            auto codes = codes_from_json(
                nlohmann::json::parse(read_file(run_dir_ / "codes" / (spec.top_key + ".json"))));
            Codebook book = reduce(codes, config_.similarity_threshold);
            book.kind = spec.kind; // reduce cannot infer the kind of an empty input
            write_artifact(run_dir_ / "codebook" / (spec.top_key + ".json"), codebook_to_json(book));
            atomic_write(run_dir_ / "codebook" / (spec.top_key + "_merge_log.txt"), merge_log_text(book));
            ReductionStats stats = reduction_stats(book);
            sr.counts["raw_" + spec.top_key] = stats.raw;
            sr.counts["unique_" + spec.top_key] = stats.unique;
            sr.counts["merges_" + spec.top_key] = stats.merges;
            record.inputs.push_back("codes/" + spec.top_key + ".json");
        }
        write_artifact(run_dir_ / "codebook" / "report.json", sr.to_json());
        record.outputs = stage_outputs("reduce");
        return record;
    }

    StageRecord exec_themes(StageRecord record) {
        Gateway gateway = make_gateway();
        TokenEstimator estimator = config_.make_estimator();
        long budget = config_.theme_token_budget > 0
                          ? config_.theme_token_budget
                          : default_theme_budget(config_.profile, estimator);
        StageReport sr;
        sr.stage = "themes";
        sr.counts["token_budget_per_theme"] = budget;
        for (const auto& spec : config_.kind_specs) {
            auto book = codebook_from_json(
                nlohmann::json::parse(read_file(run_dir_ / "codebook" / (spec.top_key + ".json"))));
            if (book.entries.empty())
                throw StageError("themes: codebook for " + spec.top_key + " is empty");
            int requested = config_.theme_counts.at(spec.kind);
            std::string prompt = build_grouping_prompt(book, requested);
            auto attempt = [&](const std::string& p) -> Outcome<ParsedThemes> {
                auto completion = gateway.complete(p, "themes");
                if (!completion.ok())
                    return completion.error();
                return parse_themes(completion.value().text, book, requested);
            };
            auto parsed = attempt(prompt);
            if (!parsed.ok() && parsed.error().kind == ErrorKind::MalformedResponse) {
                sr.warn(spec.top_key + ": malformed grouping response, retrying with json reminder");
                parsed = attempt(prompt + "\n" + json_reminder("groups"));
            }
            if (!parsed.ok())
                throw StageError("themes(" + spec.top_key + "): " + parsed.error().message());
            for (auto& w : parsed.value().warnings)
                sr.warn(spec.top_key + ": " + w);
            EmbeddedThemeSet final_set;
            final_set.kind = spec.kind;
            final_set.requested_count = requested;
            long parts = 0;
            for (const auto& theme : parsed.value().set.themes) {
                auto pieces = split_oversized(theme, budget, estimator);
                if (pieces.size() > 1) {
                    parts += static_cast<long>(pieces.size());
                    sr.warn(spec.top_key + ": theme '" + theme.meta.name + "' split into " +
                            std::to_string(pieces.size()) + " parts");
                }
                for (auto& piece : pieces)
                    final_set.themes.push_back(std::move(piece));
            }
            write_artifact(run_dir_ / "themes" / (spec.top_key + ".json"), theme_set_to_json(final_set));
            sr.counts["themes_" + spec.top_key] = static_cast<long>(final_set.themes.size());
            if (parts > 0)
                sr.counts["parts_" + spec.top_key] = parts;
            record.inputs.push_back("codebook/" + spec.top_key + ".json");
        }
        write_artifact(run_dir_ / "themes" / "report.json", sr.to_json());
        record.outputs = stage_outputs("themes");
        return record;
    }

    StageRecord exec_personas(StageRecord record, RunManifest& manifest) {
        Gateway gateway = make_gateway();
        TokenEstimator estimator = config_.make_estimator();
        std::map<CodeKind, EmbeddedThemeSet> sets;
        for (const auto& spec : config_.kind_specs) {
            sets[spec.kind] = theme_set_from_json(
                nlohmann::json::parse(read_file(run_dir_ / "themes" / (spec.top_key + ".json"))));
            record.inputs.push_back("themes/" + spec.top_key + ".json");
        }

        std::uint64_t base_seed;
        if (config_.seed) {
            base_seed = *config_.seed;
        } else if (auto it = manifest.seeds.find("personas"); it != manifest.seeds.end()) {
            base_seed = it->second; // resumed run keeps its recorded seed
        } else {
            base_seed = std::random_device{}();
        }
        manifest.seeds["personas"] = base_seed;
        record.seed = base_seed;

        StageReport sr;
        sr.stage = "personas";
        long quote_misses = 0;
        for (int i = 1; i <= config_.persona_count; ++i) {
            char n[16];
            std::snprintf(n, sizeof(n), "%03d", i);
            std::string persona_id = "persona-" + std::string(n);
            std::uint64_t seed_i = splitmix64(base_seed + static_cast<std::uint64_t>(i));

            auto sampled = sample_selection(sets, seed_i, config_.profile, estimator, config_.redraw_cap);
            if (!sampled.ok())
                throw StageError("personas: " + sampled.error().message());
            const auto& selection = sampled.value().selection;

            auto attempt = [&](const std::string& p) -> Outcome<Persona> {
                auto completion = gateway.complete(p, "persona");
                if (!completion.ok())
                    return completion.error();
                return parse_persona(completion.value().text, selection);
            };
            auto parsed = attempt(sampled.value().prompt);
            if (!parsed.ok() && parsed.error().kind == ErrorKind::MalformedResponse) {
                sr.warn(persona_id + ": malformed persona response, retrying with reminder");
                parsed = attempt(sampled.value().prompt +
                                 "\nInclude every requested section with its heading, exactly as instructed.");
            }
            if (!parsed.ok()) {
                sr.fail(persona_id + ": " + parsed.error().message());
                continue;
            }
            Persona persona = std::move(parsed.value());
            for (const auto& flag : persona.flags)
                sr.warn(persona_id + ": " + flag);

            QuoteProvenance qp = validate_quote_provenance(persona, selection, sets);
            if (!qp.matched) {
                ++quote_misses;
                char score[16];
                std::snprintf(score, sizeof(score), "%.2f", qp.best_score);
                sr.warn(persona_id + ": goal quote not matched in selected goal themes (score " +
                        std::string(score) + ")");
            }

            nlohmann::json themes_used;
            for (const auto& [kind, pick] : selection.picks) {
                const EmbeddedTheme* a = find_theme(sets.at(kind), pick.first);
                const EmbeddedTheme* b = find_theme(sets.at(kind), pick.second);
                themes_used[kind_key(kind)] = {a ? a->meta.display_name() : pick.first,
                                               b ? b->meta.display_name() : pick.second};
            }
            nlohmann::json artifact = {{"persona", persona_to_json(persona)},
                                       {"selection", selection_to_json(selection)},
                                       {"themes_used", themes_used},
                                       {"quote_provenance",
                                        {{"matched", qp.matched}, {"best_score", qp.best_score}}}};
            write_artifact(run_dir_ / "personas" / (persona_id + ".json"), artifact);

            std::string txt = render_persona(persona, PersonaFormat::PlainText);
            txt += "\nThemes used:\n";
            for (const auto& spec : config_.kind_specs) {
                const auto& names = themes_used[spec.top_key];
                txt += "  " + spec.label + ": " + names[0].get<std::string>() + "; " +
                       names[1].get<std::string>() + "\n";
            }
            atomic_write(run_dir_ / "personas" / (persona_id + ".txt"), txt);
        }
        sr.counts["personas_requested"] = config_.persona_count;
        sr.counts["personas_written"] = config_.persona_count - static_cast<long>(sr.failures.size());
        sr.counts["quote_misses"] = quote_misses;
        write_artifact(run_dir_ / "personas" / "report.json", sr.to_json());
        record.outputs = stage_outputs("personas");
        return record;
    }
};

} // namespace personaforge
