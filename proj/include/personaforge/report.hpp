#pragma once
#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace personaforge {

// Per-stage bookkeeping persisted next to the stage artifacts: counts,
// non-fatal warnings (provenance misses, over-limit flags), and per-item
// failures.
struct StageReport {
    std::string stage;
    std::map<std::string, long> counts;
    std::vector<std::string> warnings;
    std::vector<std::string> failures;

    void warn(std::string msg) { warnings.push_back(std::move(msg)); }
    void fail(std::string msg) { failures.push_back(std::move(msg)); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["stage"] = stage;
        j["counts"] = counts;
        j["warnings"] = warnings;
        j["failures"] = failures;
        return j;
    }

    static StageReport from_json(const nlohmann::json& j) {
        StageReport r;
        r.stage = j.value("stage", "");
        if (j.contains("counts"))
            r.counts = j.at("counts").get<std::map<std::string, long>>();
        r.warnings = j.value("warnings", std::vector<std::string>{});
        r.failures = j.value("failures", std::vector<std::string>{});
        return r;
    }
};

} // namespace personaforge
