#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scatterlab/observe.hpp"

using namespace scatterlab;

namespace {

GridState hermite_state(const Grid& g, int n) {
    // oscillator eigenstates for hbar = m = omega = 1
    return sample_state(g, [&](const double* x) {
        double h = n == 0 ? 1.0 : (n == 1 ? 2.0 * x[0] : 4.0 * x[0] * x[0] - 2.0);
        double norm = n == 0 ? std::pow(kPi, -0.25)
                             : (n == 1 ? std::pow(kPi, -0.25) / std::sqrt(2.0)
                                       : std::pow(kPi, -0.25) / std::sqrt(8.0));
        return cplx(norm * h * std::exp(-0.5 * x[0] * x[0]));
    });
}

}  // namespace

TEST_CASE("uncertainty product: Gaussian saturates hbar/2, Hermite-1 gives 3/2") {
    Grid g(1, 1024, 24.0);
    auto rep0 = uncertainty_product(hermite_state(g, 0));
    CHECK(std::abs(rep0.product() - 0.5) <= 1e-10);
    auto rep1 = uncertainty_product(hermite_state(g, 1));
    CHECK(std::abs(rep1.product() - 1.5) <= 1e-8);

    GridState un = hermite_state(g, 0);
    un.scale(2.0);
    CHECK_THROWS_AS(uncertainty_product(un), domain_error);
}

TEST_CASE("uncertainty floor holds for seeded random states") {
    Grid g(1, 512, 24.0);
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        GridState s = random_band_state(g, rng, 0.0, 2.5);
        auto rep = uncertainty_product(s);
        CHECK(rep.product() >= 0.5 - 1e-10);
    }
}

TEST_CASE("time-energy operators: |T| = |t| and the uncertainty floor") {
    Grid g(3, 32, 16.0);
    Rng rng(7);
    double t = 3.7;
    for (int trial = 0; trial < 50; ++trial) {
        GridState s = random_band_state(g, rng, 0.6, 1.8);
        auto rep = time_energy_uncertainty(s, t);
        CHECK(rep.t_norm == doctest::Approx(std::abs(t)).epsilon(1e-10));
        CHECK(rep.product() >= 0.5 - 1e-6);
    }
    // state with Fourier mass at the origin is rejected
    GridState bad = sample_state(g, [](const double* x) {
        return std::exp(-0.25 * (sq(x[0]) + sq(x[1]) + sq(x[2])));
    });
    bad.scale(1.0 / bad.norm());
    CHECK_THROWS_AS(time_energy_uncertainty(bad, t), domain_error);
}

TEST_CASE("free scattering state: |E| approaches p^2/2m") {
    Grid g(3, 64, 48.0);
    Rng rng(11);
    GridState s = random_band_state(g, rng, 0.7, 1.6);
    double d1 = energy_operator_defect(free_propagate(s, 8.0, 1.0), 8.0, 1.0);
    double d2 = energy_operator_defect(free_propagate(s, 16.0, 1.0), 16.0, 1.0);
    CHECK(d2 < d1);
}

TEST_CASE("Born cross section: Rutherford values and limits") {
    // Z = e = E = 1, theta = pi/2: 1/(16 sin^4(pi/4)) = 1/4
    CHECK(rutherford_cross_section(1, 1, 1, kPi / 2) == doctest::Approx(0.25).epsilon(1e-14));
    auto coul = screened_coulomb_fourier(1.0, 1.0, 0.0);
    CHECK(born_cross_section(coul, 1.0, kPi / 2) ==
          doctest::Approx(0.25).epsilon(1e-12));

    // screening kappa -> 0 converges to Rutherford within 1% at kappa = 1e-3
    auto scr = screened_coulomb_fourier(1.0, 1.0, 1e-3);
    for (double th : {0.3, kPi / 2, kPi}) {
        double a = born_cross_section(scr, 1.0, th);
        double b = rutherford_cross_section(1, 1, 1, th);
        CHECK(std::abs(a - b) <= 0.01 * b);
    }

    // theta = pi minimizes the cross section at fixed energy
    double prev = 1e300;
    for (double th = 0.4; th <= kPi + 1e-12; th += 0.2744) {
        double v = born_cross_section(scr, 1.0, std::min(th, kPi));
        CHECK(v < prev);
        prev = v;
    }
    // unscreened forward divergence: theta = 0 rejected, and the cross
    // section grows without bound as theta -> 0
    CHECK_THROWS_AS(born_cross_section(coul, 1.0, 0.0), domain_error);
    CHECK(born_cross_section(coul, 1.0, 1e-5) >
          1e15 * born_cross_section(coul, 1.0, kPi / 2));
}

TEST_CASE("relativistic factors") {
    CHECK(relativistic_correction(2.0, 0.0, 1.0) == 2.0);
    CHECK(relativistic_correction(1.0, 0.1, 1.0) == doctest::Approx(0.99).epsilon(1e-15));
    CHECK_THROWS_AS(relativistic_correction(1.0, 1.5, 1.0), domain_error);

    CHECK(relativistic_mass(2.0, 0.0, 1.0) == 2.0);
    CHECK(relativistic_mass(1.0, 0.6, 1.0) == doctest::Approx(1.25).epsilon(1e-14));

    // E'(v << c) = m v^2/2 + 3 m v^4 / (8 c^2) + O(v^6/c^4)
    double c = 137.0, m0 = 1.3;
    for (double beta : {0.02, 0.05, 0.1, 0.2}) {
        double v = beta * c;
        double e = relativistic_energy(m0, v, c);
        double taylor = 0.5 * m0 * v * v + 3.0 * m0 * sq(sq(v)) / (8.0 * c * c);
        CHECK(std::abs(e - taylor) <= 2.0 * m0 * c * c * std::pow(beta, 6));
    }
}

TEST_CASE("clock periods and the Planck-mass least period") {
    double h = 6.62607015e-34, c = 299792458.0, G = 6.67430e-11;
    double m0 = 2.0e-27;
    CHECK(clock_period(m0, 0.0, c, h) ==
          doctest::Approx(2.0 * h / (m0 * c * c)).epsilon(1e-14));
    // ratio p(v)/p(0) = m/m0 exactly (shared gamma factor)
    for (double beta : {0.1, 0.5, 0.9}) {
        double ratio = clock_period(m0, beta * c, c, h) / clock_period(m0, 0.0, c, h);
        CHECK(ratio == doctest::Approx(relativistic_mass(m0, beta * c, c) / m0)
                           .epsilon(1e-14));
    }
    // Planck mass gives twice the Planck time
    double mp = std::sqrt(h * c / G);
    double tp = std::sqrt(G * h / std::pow(c, 5));
    CHECK(std::abs(clock_period(mp, 0.0, c, h) - 2.0 * tp) <= 1e-12 * 2.0 * tp);
}

TEST_CASE("relativistic kinetic multiplier: values and nonrelativistic limit") {
    Grid g(1, 256, 32.0);
    auto vals = relativistic_kinetic_values(g, {1.0}, 1.0);
    CHECK(vals[0] == 0.0);  // xi = 0
    // single mode xi, m = c = 1: sqrt(xi^2 + 1) - 1
    int k = 10;
    double xi = g.xi(k);
    CHECK(vals[k] == doctest::Approx(std::sqrt(xi * xi + 1.0) - 1.0).epsilon(1e-14));
    // nonrelativistic limit defect <= 1% for xi <= 0.1 m c
    double c = 20.0;
    auto rel = relativistic_kinetic_values(g, {1.0}, c);
    int idx[1];
    for (std::size_t i = 0; i < rel.size(); ++i) {
        g.unflatten(i, idx);
        double x2 = sq(g.xi(idx[0]));
        if (std::sqrt(x2) <= 0.1 * c && x2 > 0) {
            double nr = 0.5 * x2;
            CHECK(std::abs(rel[i] - nr) <= 0.01 * nr);
        }
    }
}

TEST_CASE("effective hamiltonian: G = 0 pure kinetic; energy conserved; Kepler") {
    // G = 0, I_b = 0: propagating a free packet matches the analytic free flow
    {
        Grid g(2, 256, 12.0);
        std::vector<double> masses = {20.0, 20.0};
        Propagator free_eff = effective_hamiltonian_propagator(g, masses, 40.0, 0.0,
                                                               nullptr, 0.3, 0.05, false);
        GridState psi = sample_state(g, [&](const double* x) {
            return std::exp(cplx(-0.5 * (sq(x[0] - 2) + sq(x[1])) / 1.44, 1.0 * x[0]));
        });
        psi.scale(1.0 / psi.norm());
        GridState a = free_eff.propagate(psi, 1.0);
        GridState b = free_propagate_axes(psi, 1.0, {10.0, 10.0});
        a -= b;
        CHECK(a.norm() <= 1e-9);
    }

    // gravitational circular orbit in the near-classical regime: heavy
    // reduced mass, and a radially squeezed packet (sigma_perp = sqrt(3)
    // sigma_par) cancels the leading <1/r^2> packet-width bias
    Grid g(2, 1024, 18.0);
    std::vector<double> masses = {200.0, 200.0};  // mu = 100
    double c = 300.0, G = 0.0054, r0 = 6.0, mu = 100.0, a0 = 0.1;
    double omega = std::sqrt(G * masses[0] * masses[1] /
                             (mu * std::pow(r0, 3.0) ));
    double pphi = mu * omega * r0;
    double s_par = 0.7, s_perp = 0.7 * std::sqrt(3.0);
    Propagator prop = effective_hamiltonian_propagator(g, masses, c, G, nullptr,
                                                       a0, 0.025, true);
    GridState orb = sample_state(g, [&](const double* x) {
        return std::exp(cplx(-0.5 * sq((x[0] - r0) / s_par) - 0.5 * sq(x[1] / s_perp),
                             pphi * x[1]));
    });
    orb.scale(1.0 / orb.norm());

    double e0 = effective_energy(prop, orb, masses, c, G, nullptr, a0, true);
    double period = 2.0 * kPi / omega;
    std::vector<double> angles, times;
    GridState cur = orb;
    // early window: the squeeze ratio that cancels the packet-width bias
    // drifts under dispersion, so fit before it degrades
    int steps = 6;
    double sub = std::round(0.15 * period / steps / 0.025) * 0.025;
    double tcur = 0.0;
    for (int s2 = 1; s2 <= steps; ++s2) {
        cur = prop.propagate(cur, sub);
        tcur += sub;
        auto rows = ehrenfest_track(prop, cur, {0.0});
        angles.push_back(std::atan2(rows[0].x_mean[1], rows[0].x_mean[0]));
        times.push_back(tcur);
    }
    double e1 = effective_energy(prop, cur, masses, c, G, nullptr, a0, true);
    CHECK(std::abs(e1 - e0) <= 1e-6 * std::abs(e0));

    double unwrapped = angles[0];
    double prev = angles[0];
    double ratio_sum = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        double d = angles[i] - prev;
        while (d > kPi) d -= 2 * kPi;
        while (d < -kPi) d += 2 * kPi;
        unwrapped += (i ? d : 0.0);
        prev = angles[i];
        ratio_sum += std::abs(unwrapped) / times[i];
    }
    double omega_fit = ratio_sum / angles.size();
    CHECK(std::abs(omega_fit - omega) <= 0.01 * omega);
}

TEST_CASE("local motion witness: 4x4 oracle, constant interaction, O(eps) scaling") {
    FiniteModel m;
    m.h_system = Eigen::MatrixXd::Zero(2, 2);
    m.h_system(1, 1) = 1.0;
    m.h_environment = Eigen::MatrixXd::Zero(2, 2);
    m.h_environment(1, 1) = 2.0;

    Eigen::MatrixXd sx(2, 2);
    sx << 0, 1, 1, 0;
    Eigen::MatrixXd sxsx = Eigen::MatrixXd::Zero(4, 4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s)
                    sxsx(a * 2 + r, b * 2 + s) = sx(a, b) * sx(r, s);

    // constant interaction: witness vanishes
    m.interaction = 0.37 * Eigen::MatrixXd::Identity(4, 4);
    auto rep0 = local_motion_witness(m);
    CHECK(rep0.witness <= 1e-12);
    CHECK(rep0.commutator <= 1e-12);

    // eps = 0.1: the exact 4x4 ground state mixes |00> with |11>; the
    // mixing angle satisfies tan(2a) = 2 eps / 3, witness = |sin a|
    double eps = 0.1;
    m.interaction = eps * sxsx;
    auto rep = local_motion_witness(m);
    double alpha = 0.5 * std::atan2(2.0 * eps, 3.0);
    CHECK(rep.witness == doctest::Approx(std::abs(std::sin(alpha))).epsilon(1e-10));
    CHECK(rep.witness > 1e-6);

    // O(eps) scaling and witness = 0 iff commutator = 0
    double w1 = rep.witness;
    m.interaction = 0.05 * sxsx;
    double w2 = local_motion_witness(m).witness;
    m.interaction = 0.025 * sxsx;
    double w3 = local_motion_witness(m).witness;
    CHECK(w1 / w2 == doctest::Approx(2.0).epsilon(0.05));
    CHECK(w2 / w3 == doctest::Approx(2.0).epsilon(0.05));
    for (double e2 : {0.1, 0.05}) {
        m.interaction = e2 * sxsx;
        auto r = local_motion_witness(m);
        CHECK(((r.witness <= 1e-12) == (r.commutator <= 1e-12)));
    }

    // degenerate ground space is flagged
    FiniteModel dg;
    dg.h_system = Eigen::MatrixXd::Zero(2, 2);
    dg.h_environment = Eigen::MatrixXd::Zero(2, 2);
    dg.interaction = Eigen::MatrixXd::Zero(4, 4);
    auto drep = local_motion_witness(dg);
    CHECK(drep.degenerate);
    CHECK(drep.ground_multiplicity == 4);
}
