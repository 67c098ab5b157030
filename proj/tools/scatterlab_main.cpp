#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "scatterlab/runner.hpp"

using namespace scatterlab;

namespace {

int thread_cap_from_env() {
    // the engine is single threaded; the cap is validated and honored
    // trivially (1 <= cap always holds)
    const char* env = std::getenv("SCATTERLAB_THREADS");
    if (!env) return 1;
    try {
        int v = std::stoi(env);
        if (v < 1) throw std::invalid_argument("nonpositive");
        return v;
    } catch (...) {
        throw config_error("SCATTERLAB_THREADS must be a positive integer");
    }
}

int run_paths(const std::vector<std::string>& paths, const std::string& out_root,
              long long seed_override, const std::string& expect_task) {
    std::vector<RunReport> reports;
    for (const auto& path : paths) {
        Scenario sc = load_scenario(path);
        if (!expect_task.empty() && sc.task != expect_task)
            throw config_error("scenario task '" + sc.task +
                               "' does not match the subcommand '" + expect_task + "'");
        if (seed_override >= 0) sc.seed = static_cast<std::uint64_t>(seed_override);
        std::string dir = out_root.empty() ? ("out/" + sc.name) : out_root + "/" + sc.name;
        reports.push_back(run_scenario(sc, dir));
    }
    return emit_report(reports, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scatterlab — desk-scale quantum scattering laboratory"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir;
    long long seed_override = -1;
    bool strict = true;

    std::vector<std::string> all_paths;
    std::vector<CLI::App*> subs;
    for (const std::string& task : scenario_tasks()) {
        CLI::App* sub = app.add_subcommand(task, "run a '" + task + "' scenario");
        sub->add_option("--scenario", scenario_path, "scenario file")->required();
        sub->add_option("--out", out_dir, "output directory root");
        sub->add_option("--seed", seed_override, "seed override (u64)");
        sub->add_flag("--strict", strict, "strict schema (default; kept for compatibility)");
        subs.push_back(sub);
    }
    CLI::App* all = app.add_subcommand("all", "run a list of scenarios");
    all->add_option("--scenario", all_paths, "scenario files")->required();
    all->add_option("--out", out_dir, "output directory root");
    all->add_option("--seed", seed_override, "seed override (u64)");
    all->add_flag("--strict", strict, "strict schema (default; kept for compatibility)");

    try {
        app.parse(argc, argv);
        (void)thread_cap_from_env();
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed())
                return run_paths({scenario_path}, out_dir, seed_override,
                                 scenario_tasks()[i]);
        if (all->parsed()) return run_paths(all_paths, out_dir, seed_override, "");
        std::cout << app.help();
        return 2;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    } catch (const config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
