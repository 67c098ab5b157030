#pragma once

#include "scatterlab/scenario.hpp"

namespace scatterlab {

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    std::string detail;
};

struct RunReport {
    std::string scenario_name;
    std::string task;
    std::vector<CheckResult> checks;
    std::vector<std::pair<std::string, std::string>> artifacts;  // relpath, hash
    std::string manifest_path;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Executes the scenario's task, writes artifacts + manifest into out_dir
// (created if needed), and returns the per-check results. Deterministic for
// a fixed (scenario, seed).
RunReport run_scenario(const Scenario& sc, const std::string& out_dir);

// Pass/fail table; returns the process exit code (0 pass, 1 check-fail).
int emit_report(const std::vector<RunReport>& reports, std::ostream& os);

}  // namespace scatterlab
