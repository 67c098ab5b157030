#include "scatterlab/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "scatterlab/manybody.hpp"
#include "scatterlab/observe.hpp"
#include "scatterlab/scattering.hpp"

namespace scatterlab {

namespace fs = std::filesystem;

namespace {

struct RunContext {
    const Scenario& sc;
    fs::path dir;
    RunReport& report;

    void artifact(const std::string& rel) {
        std::ifstream f(dir / rel, std::ios::binary);
        std::ostringstream os;
        os << f.rdbuf();
        report.artifacts.emplace_back(rel, fnv1a64_hex(os.str()));
    }
    void check(const std::string& name, bool pass, double measured,
               const std::string& detail = "") {
        report.checks.push_back({name, pass, measured, detail});
    }
};

Grid grid_from(const Scenario& sc) {
    if (sc.grid_points == 0) throw config_error("scenario: [grid] section required");
    return Grid(sc.grid_dim, sc.grid_points, sc.grid_half_extent, sc.grid_hbar);
}

PairPotential potential_from(const PotentialSpec& ps) {
    PairPotential p;
    p.kind = potential_kind_from_string(ps.kind);
    p.v0 = ps.strength;
    p.width = ps.width;
    p.softcore = ps.softcore;
    p.delta = ps.delta;
    p.eps = ps.epsilon;
    p.long_fraction = ps.long_fraction;
    return p;
}

// the two-body reduced potential V(x) for 1-d runs, from the 1-2 pair
std::function<double(const double*)> reduced_potential(const Scenario& sc) {
    for (const auto& ps : sc.potentials)
        if (ps.i == 1 && ps.j == 2) {
            PairPotential p = potential_from(ps);
            return [p](const double* x) { return p.value(std::abs(x[0])); };
        }
    return nullptr;
}

GridState packet_from(const RunContext& ctx, const Grid& g) {
    double x0 = ctx.sc.run_number_or("packet_x0", 0.0);
    double k0 = ctx.sc.run_number_or("packet_k0", 0.0);
    double width = ctx.sc.run_number_or("packet_width", 2.0);
    GridState psi = sample_state(g, [&](const double* x) {
        double u2 = 0.0;
        for (int a = 0; a < g.dim; ++a) u2 += sq((x[a] - (a == 0 ? x0 : 0.0)) / width);
        return std::exp(cplx(-0.5 * u2, k0 * x[0] / g.hbar));
    });
    psi.scale(1.0 / psi.norm());
    return psi;
}

void write_csv_rows(const fs::path& p, const std::string& header,
                    const std::vector<std::vector<double>>& rows) {
    std::ofstream f(p);
    if (!f) throw config_error("cannot open artifact " + p.string());
    f << header << "\r\n";
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            f << (i ? "," : "") << buf;
        }
        f << "\r\n";
    }
}

void run_evolve(RunContext& ctx) {
    Grid g = grid_from(ctx.sc);
    double dt = ctx.sc.run_number_or("dt", 0.02);
    double t = ctx.sc.run_number("t");
    Propagator prop(g, std::vector<double>(g.dim, ctx.sc.run_number_or("mass", 1.0)),
                    reduced_potential(ctx.sc), dt);
    GridState psi = packet_from(ctx, g);
    GridState out = prop.propagate(psi, std::round(t / dt) * dt);
    write_state_binary(out, (ctx.dir / "state.bin").string());
    write_state_csv(out, (ctx.dir / "state.csv").string());
    ctx.artifact("state.bin");
    ctx.artifact("state.csv");
    double drift = std::abs(out.norm() - 1.0);
    ctx.check("norm-conserved", drift <= 1e-10, drift);
    ctx.check("boundary-mass", prop.max_boundary_mass() <= 1e-4,
              prop.max_boundary_mass());
}

void run_localtime(RunContext& ctx) {
    Grid g = grid_from(ctx.sc);
    double dt = ctx.sc.run_number_or("dt", 0.05);
    auto vf = reduced_potential(ctx.sc);
    Propagator prop(g, std::vector<double>(g.dim, ctx.sc.run_number_or("mass", 1.0)),
                    vf, dt);
    std::string expect = ctx.sc.run_string_or("expect", "free");
    GridState psi(g);
    if (expect == "flat") {
        // discretized eigenstate of the well
        auto bound = lowest_eigenstates_iterative(
            g, prop.axis_masses(),
            [&](const double* x) { return vf ? vf(x) : 0.0; },
            1, 1e-9);
        psi = bound[0].state;
    } else {
        psi = packet_from(ctx, g);
        if (expect == "decreasing" && vf) {
            int k = static_cast<int>(ctx.sc.run_number_or("bound_states", 2));
            auto bound = lowest_eigenstates_iterative(
                g, prop.axis_masses(),
                [&](const double* x) { return vf(x); }, k, 1e-8);
            psi = project_off(psi, bound);
            psi.scale(1.0 / psi.norm());
        }
    }
    auto times = ctx.sc.run_times();
    for (double& t : times) t = std::round(t / dt) * dt;
    DecayTable tab = local_time_defect(prop, psi, times);
    tab.fit(times.front(), times.back());
    write_decay_csv(tab, (ctx.dir / "localtime.csv").string());
    ctx.artifact("localtime.csv");

    if (expect == "free") {
        GridState xpsi = psi;
        apply_position_multiplier(xpsi, [&](const double* x) {
            return std::sqrt([&] {
                double s = 0.0;
                for (int a = 0; a < g.dim; ++a) s += sq(x[a]);
                return s;
            }());
        });
        double xn = xpsi.norm();  // mass metric with unit masses
        double worst = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i)
            worst = std::max(worst,
                             std::abs(tab.values[i] - xn / times[i]) / (xn / times[i]));
        ctx.check("free-defect-exact", worst <= 1e-8, worst);
        ctx.check("slope-minus-one", std::abs(tab.fitted_slope + 1.0) <= 0.05,
                  tab.fitted_slope);
    } else if (expect == "decreasing") {
        bool mono = true;
        for (std::size_t i = 1; i < tab.values.size(); ++i)
            mono = mono && tab.values[i] < tab.values[i - 1];
        ctx.check("defect-decreasing", mono, tab.values.back());
    } else if (expect == "flat") {
        double lo = *std::min_element(tab.values.begin(), tab.values.end());
        double hi = *std::max_element(tab.values.begin(), tab.values.end());
        ctx.check("defect-flat-5pct", hi / lo <= 1.05, hi / lo);
    } else {
        throw config_error("localtime: unknown expect value '" + expect + "'");
    }
}

void run_propdecay(RunContext& ctx) {
    Grid g = grid_from(ctx.sc);
    SymbolSpec spec;
    std::string family = ctx.sc.run_string_or("family", "weight");
    if (family == "weight") spec.family = PropagationFamily::WeightWeight;
    else if (family == "outgoing") spec.family = PropagationFamily::WeightOutgoing;
    else if (family == "incoming-outgoing")
        spec.family = PropagationFamily::IncomingOutgoing;
    else throw config_error("propdecay: unknown family '" + family + "'");
    spec.s = ctx.sc.run_number_or("s", 1.0);
    spec.delta = ctx.sc.run_number_or("delta", 0.0);
    spec.sigma = ctx.sc.run_number_or("sigma", 0.5);
    spec.band_hi = ctx.sc.run_number_or("band_hi", 7.5);
    spec.probes = static_cast<int>(ctx.sc.run_number_or("probes", 16));
    spec.seed = ctx.sc.seed;
    auto times = ctx.sc.run_times();
    DecayTable tab = propagation_decay(g, spec, times);
    tab.fit(times.front(), times.back());
    write_decay_csv(tab, (ctx.dir / "propdecay.csv").string());
    ctx.artifact("propdecay.csv");
    double smax = ctx.sc.run_number("slope_max");
    ctx.check("fitted-slope-max", tab.fitted_slope <= smax, tab.fitted_slope);
    if (ctx.sc.run.count("slope_min")) {
        double smin = ctx.sc.run_number("slope_min");
        ctx.check("fitted-slope-min", tab.fitted_slope >= smin, tab.fitted_slope);
    }
}

void run_waveop(RunContext& ctx) {
    Grid g = grid_from(ctx.sc);
    double dt = ctx.sc.run_number_or("dt", 0.02);
    double horizon = ctx.sc.run_number_or("horizon", 40.0);
    auto vf = reduced_potential(ctx.sc);
    if (!vf) throw config_error("waveop: a [potential:1-2] section is required");
    Propagator full(g, {ctx.sc.run_number_or("mass", 1.0)}, vf, dt);
    GridState gpkt = packet_from(ctx, g);
    std::string kind = ctx.sc.run_string_or("kind", "cook");

    auto tails_csv = [&](const WaveOperatorResult& w, const std::string& name) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i + 1 < w.horizons.size(); ++i)
            rows.push_back({w.horizons[i + 1], w.tails[i]});
        write_csv_rows(ctx.dir / name, "horizon,tail", rows);
        ctx.artifact(name);
    };

    if (kind == "cook") {
        auto w = cook_wave_operator(full, gpkt, horizon, +1);
        tails_csv(w, "cook_tails.csv");
        ctx.check("tail-decreasing", w.tail_decreasing,
                  w.tails.empty() ? 0.0 : w.tails.back());
        double iso = std::abs(w.state.norm() - gpkt.norm());
        ctx.check("isometry-1e-6", iso <= 1e-6, iso);
        DecayTable t;
        for (std::size_t i = 0; i + 1 < w.horizons.size(); ++i) {
            t.times.push_back(w.horizons[i + 1]);
            t.values.push_back(w.tails[i]);
        }
        t.fit(t.times.front(), t.times.back());
        double smax = ctx.sc.run_number_or("tail_slope_max", -0.8);
        ctx.check("tail-power", t.fitted_slope <= smax, t.fitted_slope);
    } else if (kind == "compare") {
        // long-range: modified (with phase) vs unmodified Cook tails
        PairPotential longp;
        bool found = false;
        for (const auto& ps : ctx.sc.potentials)
            if (ps.i == 1 && ps.j == 2) {
                longp = potential_from(ps);
                found = true;
            }
        if (!found) throw config_error("waveop compare: missing potential");
        auto vl = [longp](const Eigen::VectorXd& x) {
            return longp.value_long(x.norm());
        };
        auto solver = std::make_shared<OrbitSolver>(
            vl, 1, ctx.sc.run_number_or("rho", 0.1),
            longp.eps / 3.0, longp.eps / 3.0);
        solver->tail_tolerance = 1e9;
        PhaseParams base;
        base.d = ctx.sc.run_number_or("d", 0.5);
        base.t_max = ctx.sc.run_number_or("t_max", 120.0);
        int coarse = static_cast<int>(ctx.sc.run_number_or("cache_coarse", 128));
        PhaseParams pp = search_r0(solver, base, g,
                                   ctx.sc.run_number_or("r0_min", 16.0),
                                   ctx.sc.run_number_or("r0_max", 64.0), coarse,
                                   ctx.sc.run_number_or("jjstar_threshold", 0.25));
        PhaseFunction phase(solver, pp);
        phase.build_cache(g, coarse);
        phase.write_cache((ctx.dir / "phase_cache.bin").string());
        ctx.artifact("phase_cache.bin");

        auto wc = cook_wave_operator(full, gpkt, horizon, +1);
        auto wm = modified_wave_operator(full, phase, gpkt, horizon, +1);
        tails_csv(wc, "cook_tails.csv");
        tails_csv(wm, "modified_tails.csv");
        double ratio = wc.tails.back() / std::max(wm.tails.back(), 1e-300);
        double target = ctx.sc.run_number_or("ratio_min", 10.0);
        ctx.check("modified-superiority", ratio >= target, ratio);
        double iso = std::abs(wm.state.norm() - gpkt.norm());
        ctx.check("modified-isometry-1e-4", iso <= 1e-4, iso);
    } else {
        throw config_error("waveop: unknown kind '" + kind + "'");
    }
}

void run_eikonal(RunContext& ctx) {
    PairPotential longp;
    bool found = false;
    for (const auto& ps : ctx.sc.potentials)
        if (ps.i == 1 && ps.j == 2) {
            longp = potential_from(ps);
            found = true;
        }
    if (!found) throw config_error("eikonal: missing [potential:1-2]");
    auto vl = [longp](const Eigen::VectorXd& x) { return longp.value_long(x.norm()); };
    auto solver = std::make_shared<OrbitSolver>(vl, 1,
                                                ctx.sc.run_number_or("rho", 0.1),
                                                longp.eps / 3.0, longp.eps / 3.0);
    solver->tail_tolerance = ctx.sc.run_number_or("tail_tolerance", 1e-2);
    PhaseParams pp;
    pp.d = ctx.sc.run_number_or("d", 0.5);
    pp.r0 = ctx.sc.run_number_or("r0", 24.0);
    pp.t_max = ctx.sc.run_number_or("t_max", 300.0);
    PhaseFunction phase(solver, pp);

    int samples = static_cast<int>(ctx.sc.run_number_or("samples", 1000));
    Rng rng(ctx.sc.seed);
    std::uniform_real_distribution<double> ux(ctx.sc.run_number_or("x_lo", 24.0),
                                              ctx.sc.run_number_or("x_hi", 60.0));
    std::uniform_real_distribution<double> uk(ctx.sc.run_number_or("k_lo", 0.7),
                                              ctx.sc.run_number_or("k_hi", 1.8));
    double worst = 0.0;
    std::vector<std::vector<double>> rows;
    for (int s = 0; s < samples; ++s) {
        double x = ux(rng), k = uk(rng);
        int sign = (s % 2) ? -1 : +1;
        Eigen::VectorXd xv(1), kv(1);
        xv << x;
        kv << sign * k;
        double res = phase.eikonal_residual(xv, kv, sign);
        worst = std::max(worst, std::abs(res));
        if (rows.size() < 64) rows.push_back({x, sign * k, res});
    }
    write_csv_rows(ctx.dir / "eikonal_residuals.csv", "x,xi,residual", rows);
    ctx.artifact("eikonal_residuals.csv");
    ctx.check("residual-1e-4", worst <= 1e-4, worst);

    // orbit solver vs a high-order oracle on a few samples; the comparison
    // uses a finer mesh than the phase integrations need
    solver->mesh_h0 = 0.01;
    double worst_orbit = 0.0;
    for (int s = 0; s < 4; ++s) {
        double y = ux(rng) * 0.5, k = uk(rng);
        Eigen::VectorXd yv(1), kv(1), q, p;
        yv << y;
        kv << k;
        solver->orbit(16.0, 0.0, yv, kv, q, p);
        // RK4 oracle, fine fixed step
        Eigen::VectorXd qq = yv, pp2 = kv;
        double tau = 0.0, h = 5e-4;
        while (tau < 16.0 - 1e-12) {
            double step = std::min(h, 16.0 - tau);
            auto f = [&](double tt, const Eigen::VectorXd& q1, const Eigen::VectorXd& p1,
                         Eigen::VectorXd& dq, Eigen::VectorXd& dp) {
                dq = p1;
                dp = -solver->grad_v_rho(tt, q1);
            };
            Eigen::VectorXd k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
            f(tau, qq, pp2, k1q, k1p);
            f(tau + 0.5 * step, qq + 0.5 * step * k1q, pp2 + 0.5 * step * k1p, k2q, k2p);
            f(tau + 0.5 * step, qq + 0.5 * step * k2q, pp2 + 0.5 * step * k2p, k3q, k3p);
            f(tau + step, qq + step * k3q, pp2 + step * k3p, k4q, k4p);
            qq += (step / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q);
            pp2 += (step / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p);
            tau += step;
        }
        worst_orbit = std::max(worst_orbit, (q - qq).norm() + (p - pp2).norm());
    }
    ctx.check("orbit-vs-ode-1e-8", worst_orbit <= 1e-8, worst_orbit);
}

void run_partition(RunContext& ctx) {
    int n = static_cast<int>(ctx.sc.run_number_or("n", 3));
    double gamma = ctx.sc.run_number_or("gamma", 1.05);
    auto c = select_constants(n, gamma);
    std::vector<double> masses = ctx.sc.masses;
    if (masses.empty()) masses.assign(n, 1.0);
    auto frame = jacobi_frame(masses, ctx.sc.frame_dimension);
    PartitionOfUnity pu(frame, c);
    ShellSampler sampler{frame, c, Rng(ctx.sc.seed)};
    int samples = static_cast<int>(ctx.sc.run_number_or("samples", 10000));

    double worst_sum = 0.0;
    Rng rng2(ctx.sc.seed + 1);
    for (int s = 0; s < samples; ++s) {
        auto pos = sampler.sample();
        auto vals = pu.all_values(pos);
        double total = 0.0;
        for (double v : vals) total += v;
        worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    }
    ctx.check("sum-to-one-1e-10", worst_sum <= 1e-10, worst_sum);

    ShellSampler sampler2{frame, c, Rng(ctx.sc.seed + 2)};
    auto rep = support_check(pu, sampler2, samples);
    write_support_csv(rep, (ctx.dir / "support_violations.csv").string());
    ctx.artifact("support_violations.csv");
    ctx.check("support-violations-zero", rep.violations == 0,
              static_cast<double>(rep.violations));
    ctx.check("gradient-finite", std::isfinite(rep.gradient_sup), rep.gradient_sup);

    // constants echo
    std::vector<std::vector<double>> rows;
    for (int j = 1; j <= n - 1; ++j) rows.push_back({double(j), c.theta[j]});
    write_csv_rows(ctx.dir / "constants_theta.csv", "j,theta_j", rows);
    ctx.artifact("constants_theta.csv");
}

void run_uncertainty(RunContext& ctx) {
    Grid g = grid_from(ctx.sc);
    int count = static_cast<int>(ctx.sc.run_number_or("count", 100));
    Rng rng(ctx.sc.seed);
    std::string mode = ctx.sc.run_string_or("mode", "position");
    std::vector<std::vector<double>> rows;
    double floor = 1e300;
    if (mode == "position") {
        for (int i = 0; i < count; ++i) {
            GridState s = random_band_state(g, rng, 0.0, 0.45 * g.xi_max());
            auto rep = uncertainty_product(s);
            rows.push_back({double(i), rep.dq, rep.dp, rep.product()});
            floor = std::min(floor, rep.product());
        }
        write_csv_rows(ctx.dir / "uncertainty.csv", "index,dq,dp,product", rows);
        ctx.artifact("uncertainty.csv");
        ctx.check("floor-hbar-over-2", floor >= 0.5 * g.hbar - 1e-10, floor);
    } else if (mode == "timeenergy") {
        double t = ctx.sc.run_number_or("t", 3.0);
        for (int i = 0; i < count; ++i) {
            GridState s = random_band_state(g, rng, 0.6, 0.45 * g.xi_max());
            auto rep = time_energy_uncertainty(s, t);
            rows.push_back({double(i), rep.dT, rep.dE, rep.product()});
            floor = std::min(floor, rep.product());
        }
        write_csv_rows(ctx.dir / "time_energy.csv", "index,dT,dE,product", rows);
        ctx.artifact("time_energy.csv");
        ctx.check("floor-hbar-over-2-1e-6", floor >= 0.5 * g.hbar - 1e-6, floor);
    } else {
        throw config_error("uncertainty: unknown mode '" + mode + "'");
    }
}

void run_xsection(RunContext& ctx) {
    double z = ctx.sc.run_number_or("z", 1.0);
    double e = ctx.sc.run_number_or("e", 1.0);
    double kappa = ctx.sc.run_number_or("kappa", 1e-3);
    double energy = ctx.sc.run_number_or("energy", 1.0);
    auto fourier = screened_coulomb_fourier(z, e, kappa);
    std::vector<std::vector<double>> rows;
    double worst = 0.0;
    for (int i = 1; i <= 64; ++i) {
        double th = kPi * i / 64.0;
        double born = born_cross_section(fourier, energy, th);
        double ruth = rutherford_cross_section(z, e, energy, th);
        rows.push_back({th, born, ruth});
        worst = std::max(worst, std::abs(born - ruth) / ruth);
    }
    write_csv_rows(ctx.dir / "xsection.csv", "theta,born,rutherford", rows);
    ctx.artifact("xsection.csv");
    ctx.check("rutherford-1pct", worst <= 0.01, worst);

    double f = relativistic_correction(1.0, 0.1 * 299792458.0, 299792458.0);
    ctx.check("relativistic-factor-exact", std::abs(f - 0.99) <= 1e-12, f);
    double c = 299792458.0, m0 = 9.1093837015e-31;
    double worst_taylor = 0.0;
    for (double beta : {0.02, 0.05, 0.1}) {
        double v = beta * c;
        double ep = relativistic_energy(m0, v, c);
        double taylor = 0.5 * m0 * v * v + 3.0 * m0 * sq(sq(v)) / (8.0 * c * c);
        worst_taylor = std::max(worst_taylor,
                                std::abs(ep - taylor) / (m0 * c * c * std::pow(beta, 6)));
    }
    ctx.check("energy-taylor-v4", worst_taylor <= 2.0, worst_taylor);
}

void run_localmotion(RunContext& ctx) {
    FiniteModel m;
    m.h_system = Eigen::MatrixXd::Zero(2, 2);
    m.h_system(1, 1) = ctx.sc.run_number_or("level_system", 1.0);
    m.h_environment = Eigen::MatrixXd::Zero(2, 2);
    m.h_environment(1, 1) = ctx.sc.run_number_or("level_environment", 2.0);
    Eigen::MatrixXd sx(2, 2);
    sx << 0, 1, 1, 0;
    Eigen::MatrixXd sxsx = Eigen::MatrixXd::Zero(4, 4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s)
                    sxsx(a * 2 + r, b * 2 + s) = sx(a, b) * sx(r, s);

    std::vector<std::vector<double>> rows;
    std::vector<double> eps = {0.1, 0.05, 0.025};
    std::vector<double> ws;
    for (double e : eps) {
        m.interaction = e * sxsx;
        auto rep = local_motion_witness(m);
        rows.push_back({e, rep.witness, rep.commutator});
        ws.push_back(rep.witness);
    }
    write_csv_rows(ctx.dir / "witness.csv", "eps,witness,commutator", rows);
    ctx.artifact("witness.csv");

    ctx.check("witness-positive", ws[0] > 1e-6, ws[0]);
    m.interaction = 0.37 * Eigen::MatrixXd::Identity(4, 4);
    auto rep0 = local_motion_witness(m);
    ctx.check("constant-interaction-zero", rep0.witness <= 1e-12, rep0.witness);
    double r1 = ws[0] / ws[1], r2 = ws[1] / ws[2];
    bool linear = std::abs(r1 - 2.0) <= 0.05 && std::abs(r2 - 2.0) <= 0.05;
    ctx.check("order-eps-scaling", linear, r1);
}

}  // namespace

RunReport run_scenario(const Scenario& sc, const std::string& out_dir) {
    RunReport report;
    report.scenario_name = sc.name;
    report.task = sc.task;
    fs::create_directories(out_dir);
    RunContext ctx{sc, fs::path(out_dir), report};

    if (sc.task == "evolve") run_evolve(ctx);
    else if (sc.task == "localtime") run_localtime(ctx);
    else if (sc.task == "propdecay") run_propdecay(ctx);
    else if (sc.task == "waveop") run_waveop(ctx);
    else if (sc.task == "eikonal") run_eikonal(ctx);
    else if (sc.task == "partition") run_partition(ctx);
    else if (sc.task == "uncertainty") run_uncertainty(ctx);
    else if (sc.task == "xsection") run_xsection(ctx);
    else if (sc.task == "localmotion") run_localmotion(ctx);
    else throw config_error("run_scenario: unknown task " + sc.task);

    // manifest written atomically last
    std::sort(report.artifacts.begin(), report.artifacts.end());
    std::ostringstream mf;
    mf << "# scatterlab manifest\n";
    mf << "# scenario " << sc.name << " schema " << sc.schema << " seed " << sc.seed
       << "\n";
    for (const auto& [rel, hash] : report.artifacts) mf << hash << "  " << rel << "\n";
    fs::path tmp = fs::path(out_dir) / "manifest.txt.tmp";
    fs::path fin = fs::path(out_dir) / "manifest.txt";
    {
        std::ofstream f(tmp, std::ios::binary);
        f << mf.str();
    }
    fs::rename(tmp, fin);
    report.manifest_path = fin.string();
    return report;
}

int emit_report(const std::vector<RunReport>& reports, std::ostream& os) {
    if (reports.empty()) {
        os << "no scenarios were run\n";
        return 2;
    }
    bool all = true;
    std::string first_fail;
    for (const auto& rep : reports) {
        os << "scenario " << rep.scenario_name << " [" << rep.task << "]\n";
        for (const auto& c : rep.checks) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6g", c.measured);
            os << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << buf
               << (c.detail.empty() ? "" : ", " + c.detail) << ")\n";
            if (!c.pass && first_fail.empty())
                first_fail = rep.scenario_name + ":" + c.name;
            all = all && c.pass;
        }
    }
    if (!all) {
        os << "first failing check: " << first_fail << "\n";
        return 1;
    }
    return 0;
}

}  // namespace scatterlab
