#pragma once

#include <map>
#include <optional>

#include "scatterlab/common.hpp"

namespace scatterlab {

// Scenario files: sectioned key-value text.
//
//   schema = 1
//   name = free-localtime
//   seed = 42
//   task = localtime
//
//   [grid]
//   dim = 1
//   points = 2048
//   half_extent = 96
//   hbar = 1
//
//   [frame]
//   masses = 1 1
//   dimension = 1
//
//   [potential:1-2]        # one section per pair, named by the pair
//   kind = gaussian
//   strength = -1.2
//   width = 1.4
//   softcore = 0
//   delta = 1
//   epsilon = 1
//   long_fraction = 0
//
//   [run]
//   times = 5:50:10        # from:to:count, or a whitespace list
//   ...task-specific keys
//
// Parsing is strict: unknown keys, duplicate sections, duplicate keys and a
// missing seed are errors.
struct PotentialSpec {
    int i = 0, j = 0;
    std::string kind;
    double strength = 0.0;
    double width = 1.0;
    double softcore = 0.0;
    double delta = 1.0;
    double epsilon = 1.0;
    double long_fraction = 0.0;
};

struct Scenario {
    int schema = 1;
    std::string name;
    std::string task;
    std::uint64_t seed = 0;

    // grid
    int grid_dim = 1;
    int grid_points = 0;
    double grid_half_extent = 0.0;
    double grid_hbar = 1.0;

    // frame
    std::vector<double> masses;
    int frame_dimension = 1;

    std::vector<PotentialSpec> potentials;

    // run parameters: task-specific keys kept as strings, validated per task
    std::map<std::string, std::string> run;

    double run_number(const std::string& key) const;
    double run_number_or(const std::string& key, double fallback) const;
    std::string run_string_or(const std::string& key, const std::string& fallback) const;
    std::vector<double> run_times() const;  // parses "times"
};

// Parses and validates; throws config_error with a field-level message.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

// The list of valid task names (one per acceptance family).
const std::vector<std::string>& scenario_tasks();

}  // namespace scatterlab
