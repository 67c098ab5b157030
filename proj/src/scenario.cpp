#include "scatterlab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace scatterlab {

const std::vector<std::string>& scenario_tasks() {
    static const std::vector<std::string> tasks = {
        "evolve", "localtime", "propdecay", "waveop", "eikonal",
        "partition", "uncertainty", "xsection", "localmotion"};
    return tasks;
}

namespace {

struct Section {
    std::map<std::string, std::string> kv;
    std::vector<std::string> order;
};

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    auto b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

double to_number(const std::string& field, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (...) {
        throw config_error("scenario field '" + field + "': not a number: '" + v + "'");
    }
}

long to_integer(const std::string& field, const std::string& v) {
    double d = to_number(field, v);
    long l = std::lround(d);
    if (std::abs(d - l) > 1e-12)
        throw config_error("scenario field '" + field + "': not an integer: '" + v + "'");
    return l;
}

}  // namespace

double Scenario::run_number(const std::string& key) const {
    auto it = run.find(key);
    if (it == run.end()) throw config_error("scenario run key missing: " + key);
    return to_number("run." + key, it->second);
}

double Scenario::run_number_or(const std::string& key, double fallback) const {
    auto it = run.find(key);
    return it == run.end() ? fallback : to_number("run." + key, it->second);
}

std::string Scenario::run_string_or(const std::string& key,
                                    const std::string& fallback) const {
    auto it = run.find(key);
    return it == run.end() ? fallback : it->second;
}

std::vector<double> Scenario::run_times() const {
    auto it = run.find("times");
    if (it == run.end()) throw config_error("scenario run key missing: times");
    const std::string& v = it->second;
    std::vector<double> out;
    if (v.find(':') != std::string::npos) {
        // from:to:count
        std::istringstream is(v);
        std::string a, b, c;
        std::getline(is, a, ':');
        std::getline(is, b, ':');
        std::getline(is, c);
        double lo = to_number("run.times", trim(a));
        double hi = to_number("run.times", trim(b));
        long n = to_integer("run.times", trim(c));
        if (n < 2 || !(hi > lo)) throw config_error("run.times: need from < to and count >= 2");
        for (long i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    } else {
        std::istringstream is(v);
        double d;
        while (is >> d) out.push_back(d);
        if (out.empty()) throw config_error("run.times: empty list");
    }
    return out;
}

Scenario parse_scenario(const std::string& text) {
    std::map<std::string, Section> sections;
    std::vector<std::string> section_order;
    std::string current = "";  // top level
    sections[current] = {};

    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        auto hash = t.find('#');
        if (hash != std::string::npos) t = trim(t.substr(0, hash));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw config_error("scenario line " + std::to_string(lineno) +
                                   ": malformed section header");
            std::string name = trim(t.substr(1, t.size() - 2));
            if (name.empty())
                throw config_error("scenario line " + std::to_string(lineno) +
                                   ": empty section name");
            if (sections.count(name))
                throw config_error("scenario: duplicate section [" + name + "]");
            sections[name] = {};
            section_order.push_back(name);
            current = name;
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("scenario line " + std::to_string(lineno) +
                               ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw config_error("scenario line " + std::to_string(lineno) + ": empty key");
        auto& sec = sections[current];
        if (sec.kv.count(key))
            throw config_error("scenario: duplicate key '" + key + "' in section [" +
                               current + "]");
        sec.kv[key] = val;
        sec.order.push_back(key);
    }

    Scenario sc;
    // top level: schema, name, seed, task — all required, nothing else
    auto& top = sections[""];
    for (const auto& k : top.order)
        if (k != "schema" && k != "name" && k != "seed" && k != "task")
            throw config_error("scenario: unknown top-level key '" + k + "'");
    if (!top.kv.count("schema")) throw config_error("scenario: missing schema version");
    sc.schema = static_cast<int>(to_integer("schema", top.kv["schema"]));
    if (sc.schema != 1) throw config_error("scenario: unsupported schema version");
    if (!top.kv.count("name")) throw config_error("scenario: missing name");
    sc.name = top.kv["name"];
    if (!top.kv.count("seed")) throw config_error("scenario: missing seed (mandatory)");
    sc.seed = static_cast<std::uint64_t>(to_integer("seed", top.kv["seed"]));
    if (!top.kv.count("task")) throw config_error("scenario: missing task");
    sc.task = top.kv["task"];
    const auto& tasks = scenario_tasks();
    if (std::find(tasks.begin(), tasks.end(), sc.task) == tasks.end())
        throw config_error("scenario: unknown task '" + sc.task + "'");

    for (const auto& name : section_order) {
        auto& sec = sections[name];
        if (name == "grid") {
            for (const auto& k : sec.order)
                if (k != "dim" && k != "points" && k != "half_extent" && k != "hbar")
                    throw config_error("scenario [grid]: unknown key '" + k + "'");
            if (sec.kv.count("dim")) sc.grid_dim = static_cast<int>(to_integer("grid.dim", sec.kv["dim"]));
            if (!sec.kv.count("points")) throw config_error("scenario [grid]: missing points");
            sc.grid_points = static_cast<int>(to_integer("grid.points", sec.kv["points"]));
            if (!sec.kv.count("half_extent"))
                throw config_error("scenario [grid]: missing half_extent");
            sc.grid_half_extent = to_number("grid.half_extent", sec.kv["half_extent"]);
            if (sec.kv.count("hbar")) sc.grid_hbar = to_number("grid.hbar", sec.kv["hbar"]);
        } else if (name == "frame") {
            for (const auto& k : sec.order)
                if (k != "masses" && k != "dimension")
                    throw config_error("scenario [frame]: unknown key '" + k + "'");
            if (sec.kv.count("masses")) {
                std::istringstream ms(sec.kv["masses"]);
                double m;
                while (ms >> m) {
                    if (!(m > 0.0))
                        throw config_error("scenario [frame].masses: masses must be positive");
                    sc.masses.push_back(m);
                }
                if (sc.masses.empty())
                    throw config_error("scenario [frame].masses: empty list");
            }
            if (sec.kv.count("dimension"))
                sc.frame_dimension =
                    static_cast<int>(to_integer("frame.dimension", sec.kv["dimension"]));
        } else if (name.rfind("potential:", 0) == 0) {
            PotentialSpec ps;
            std::string pair = name.substr(10);
            auto dash = pair.find('-');
            if (dash == std::string::npos)
                throw config_error("scenario [" + name + "]: section must be potential:i-j");
            ps.i = static_cast<int>(to_integer(name, trim(pair.substr(0, dash))));
            ps.j = static_cast<int>(to_integer(name, trim(pair.substr(dash + 1))));
            for (const auto& k : sec.order) {
                if (k == "kind") ps.kind = sec.kv[k];
                else if (k == "strength") ps.strength = to_number(name + "." + k, sec.kv[k]);
                else if (k == "width") ps.width = to_number(name + "." + k, sec.kv[k]);
                else if (k == "softcore") ps.softcore = to_number(name + "." + k, sec.kv[k]);
                else if (k == "delta") ps.delta = to_number(name + "." + k, sec.kv[k]);
                else if (k == "epsilon") ps.epsilon = to_number(name + "." + k, sec.kv[k]);
                else if (k == "long_fraction")
                    ps.long_fraction = to_number(name + "." + k, sec.kv[k]);
                else
                    throw config_error("scenario [" + name + "]: unknown key '" + k + "'");
            }
            if (ps.kind.empty())
                throw config_error("scenario [" + name + "]: missing kind");
            sc.potentials.push_back(ps);
        } else if (name == "run") {
            for (const auto& k : sec.order) sc.run[k] = sec.kv[k];
        } else {
            throw config_error("scenario: unknown section [" + name + "]");
        }
    }
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw config_error("cannot open scenario file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return parse_scenario(os.str());
}

}  // namespace scatterlab
