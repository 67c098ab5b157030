#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "scatterlab/runner.hpp"

using namespace scatterlab;

namespace {

const char* kMinimal = R"(
schema = 1
name = mini
task = evolve
seed = 9

[grid]
points = 256
half_extent = 16

[frame]
masses = 1 1

[potential:1-2]
kind = gaussian
strength = -0.5

[run]
t = 1
dt = 0.05
)";

std::string slurp(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("minimal scenario parses with defaults echoed") {
    Scenario sc = parse_scenario(kMinimal);
    CHECK(sc.name == "mini");
    CHECK(sc.task == "evolve");
    CHECK(sc.seed == 9);
    CHECK(sc.grid_dim == 1);       // default
    CHECK(sc.grid_hbar == 1.0);    // default
    CHECK(sc.grid_points == 256);
    CHECK(sc.masses.size() == 2);
    CHECK(sc.potentials.size() == 1);
    CHECK(sc.potentials[0].i == 1);
    CHECK(sc.potentials[0].j == 2);
}

TEST_CASE("strict schema: field-level errors") {
    // negative mass names the field
    std::string neg = kMinimal;
    neg.replace(neg.find("masses = 1 1"), 12, "masses = 1 -1");
    CHECK_THROWS_WITH_AS(parse_scenario(neg), doctest::Contains("masses"),
                         config_error);

    // duplicate section
    std::string dup = std::string(kMinimal) + "\n[grid]\npoints = 128\n";
    CHECK_THROWS_WITH_AS(parse_scenario(dup), doctest::Contains("duplicate section"),
                         config_error);

    // unknown key rejected
    std::string unk = std::string(kMinimal) + "\n[grid2]\nfoo = 1\n";
    CHECK_THROWS_AS(parse_scenario(unk), config_error);
    std::string unk2 = kMinimal;
    unk2.replace(unk2.find("half_extent = 16"), 16, "half_extent = 16\nwibble = 3");
    CHECK_THROWS_WITH_AS(parse_scenario(unk2), doctest::Contains("unknown key"),
                         config_error);

    // missing seed rejected
    std::string noseed = kMinimal;
    noseed.replace(noseed.find("seed = 9"), 8, "# seed gone");
    CHECK_THROWS_WITH_AS(parse_scenario(noseed), doctest::Contains("seed"),
                         config_error);

    // duplicate key rejected
    std::string dupk = kMinimal;
    dupk.replace(dupk.find("points = 256"), 12, "points = 256\npoints = 512");
    CHECK_THROWS_WITH_AS(parse_scenario(dupk), doctest::Contains("duplicate key"),
                         config_error);
}

TEST_CASE("times parsing: range form and list form") {
    Scenario sc = parse_scenario(kMinimal);
    sc.run["times"] = "5:50:10";
    auto t1 = sc.run_times();
    CHECK(t1.size() == 10);
    CHECK(t1.front() == doctest::Approx(5.0));
    CHECK(t1.back() == doctest::Approx(50.0));
    sc.run["times"] = "1 2 4 8";
    auto t2 = sc.run_times();
    CHECK(t2 == std::vector<double>{1, 2, 4, 8});
}

TEST_CASE("run_scenario is deterministic: identical manifests") {
    Scenario sc = parse_scenario(kMinimal);
    auto r1 = run_scenario(sc, "/tmp/sl_det_a");
    auto r2 = run_scenario(sc, "/tmp/sl_det_b");
    CHECK(r1.all_pass());
    std::string m1 = slurp(r1.manifest_path);
    std::string m2 = slurp(r2.manifest_path);
    CHECK(!m1.empty());
    CHECK(m1 == m2);
}

TEST_CASE("emit_report: pass and fail wiring") {
    RunReport rep;
    rep.scenario_name = "x";
    rep.task = "evolve";
    rep.checks.push_back({"ok", true, 1.0, ""});
    std::ostringstream os;
    CHECK(emit_report({rep}, os) == 0);
    rep.checks.push_back({"bad", false, 2.0, ""});
    std::ostringstream os2;
    CHECK(emit_report({rep}, os2) == 1);
    CHECK(os2.str().find("first failing check: x:bad") != std::string::npos);
    std::ostringstream os3;
    CHECK(emit_report({}, os3) == 2);
}
