#include "personaforge/config.hpp"
#include "personaforge/http_backend.hpp"
#include "personaforge/mock_backend.hpp"
#include "personaforge/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <string>

namespace pf = personaforge;

namespace {

struct CommonOptions {
    std::string config_path;
    std::string run_dir = "run";
    bool use_mock = false;
    bool force = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("-c,--config", opts.config_path, "pipeline config file (json)")->required();
    cmd->add_option("-d,--run-dir", opts.run_dir, "run directory for artifacts");
    cmd->add_flag("--mock", opts.use_mock, "use the deterministic fixture backend, no network");
    cmd->add_flag("--force", opts.force, "re-run even when a cached stage is up to date");
    cmd->add_option("--seed", opts.seed, "override the persona sampling seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
}

int run(const CommonOptions& opts, const std::string& stage) {
    pf::PipelineConfig config = pf::load_config(opts.config_path);
    if (opts.use_mock)
        config.mock_enabled = true;
    if (opts.seed_set)
        config.seed = opts.seed;

    std::unique_ptr<pf::CompletionBackend> backend;
    if (config.mock_enabled) {
        auto mock = std::make_unique<pf::MockBackend>();
        mock->seed = config.mock_seed;
        if (!config.mock_fixture_file.empty())
            mock->load_fixture_file(config.mock_fixture_file);
        backend = std::move(mock);
    } else {
        backend = std::make_unique<pf::HttpBackend>();
    }

    pf::Pipeline pipeline(config, opts.run_dir, *backend);
    if (stage == "run-all")
        pipeline.run_all(opts.force);
    else
        pipeline.run_stage(stage, opts.force);
    std::cout << pipeline.report();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM-assisted thematic analysis and persona generation pipeline"};
    app.require_subcommand(1);

    CommonOptions opts;
    const std::vector<std::string> stage_commands = {"ingest", "code", "reduce", "themes", "personas"};
    std::string chosen;

    for (const auto& stage : stage_commands) {
        auto* cmd = app.add_subcommand(stage, "run the " + stage + " stage");
        add_common(cmd, opts);
        cmd->callback([&chosen, stage] { chosen = stage; });
    }
    auto* run_all = app.add_subcommand("run-all", "run every stage in order");
    add_common(run_all, opts);
    run_all->callback([&chosen] { chosen = "run-all"; });

    auto* report = app.add_subcommand("report", "summarize a run directory");
    std::string report_config, report_dir = "run";
    report->add_option("-c,--config", report_config, "pipeline config file (json)")->required();
    report->add_option("-d,--run-dir", report_dir, "run directory for artifacts");
    report->callback([&chosen] { chosen = "report"; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (chosen == "report") {
            pf::PipelineConfig config = pf::load_config(report_config);
            pf::MockBackend noop; // report never contacts a backend
            pf::Pipeline pipeline(config, report_dir, noop);
            std::cout << pipeline.report();
            return 0;
        }
        return run(opts, chosen);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
