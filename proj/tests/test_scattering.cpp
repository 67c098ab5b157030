#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scatterlab/scattering.hpp"

using namespace scatterlab;

namespace {

double soft_coulomb_1d(double x, double gamma = 0.3, double a = 0.6) {
    return gamma / std::sqrt(x * x + a * a);
}

std::shared_ptr<OrbitSolver> make_solver(double gamma = 0.3, double rho = 0.1) {
    auto vl = [gamma](const Eigen::VectorXd& x) {
        return soft_coulomb_1d(x(0), gamma);
    };
    // delta = 0.9; delta0 = delta1 = delta/3
    return std::make_shared<OrbitSolver>(vl, 1, rho, 0.3, 0.3);
}

Eigen::VectorXd vec1(double v) {
    Eigen::VectorXd x(1);
    x << v;
    return x;
}

// high-order adaptive oracle: classic RK4 with fine fixed step on Hamilton's
// equations for the same time-dependent cutoff Hamiltonian
void rk4_orbit(const OrbitSolver& s, double t, double t0, Eigen::VectorXd q0,
               Eigen::VectorXd p0, Eigen::VectorXd& q_out, Eigen::VectorXd& p_out,
               double h = 5e-4) {
    double tau = t0;
    Eigen::VectorXd q = q0, p = p0;
    double dir = t >= t0 ? 1.0 : -1.0;
    while (dir * (t - tau) > 1e-12) {
        double hh = std::min(h, dir * (t - tau));
        double step = dir * hh;
        auto f = [&](double tt, const Eigen::VectorXd& qq, const Eigen::VectorXd& pp,
                     Eigen::VectorXd& dq, Eigen::VectorXd& dp) {
            dq = pp;
            dp = -s.grad_v_rho(tt, qq);
        };
        Eigen::VectorXd k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
        f(tau, q, p, k1q, k1p);
        f(tau + 0.5 * step, q + 0.5 * step * k1q, p + 0.5 * step * k1p, k2q, k2p);
        f(tau + 0.5 * step, q + 0.5 * step * k2q, p + 0.5 * step * k2p, k3q, k3p);
        f(tau + step, q + step * k3q, p + step * k3p, k4q, k4p);
        q += (step / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q);
        p += (step / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p);
        tau += step;
    }
    q_out = q;
    p_out = p;
}

GridState band_packet(const Grid& g, double x0, double k0, double width) {
    return sample_state(g, [&](const double* x) {
        double u = (x[0] - x0) / width;
        return std::pow(kPi * width * width, -0.25) *
               std::exp(cplx(-0.5 * u * u, k0 * x[0] / g.hbar));
    });
}

}  // namespace

TEST_CASE("classical orbits: free motion is exact") {
    auto vl = [](const Eigen::VectorXd&) { return 0.0; };
    OrbitSolver s(vl, 1, 0.05, 0.3, 0.3);
    Eigen::VectorXd q, p;
    s.orbit(7.0, 2.0, vec1(1.5), vec1(-0.8), q, p);
    CHECK(q(0) == doctest::Approx(1.5 + 5.0 * -0.8).epsilon(1e-12));
    CHECK(p(0) == doctest::Approx(-0.8).epsilon(1e-14));
    CHECK_THROWS_AS(s.orbit(3.0, -1.0, vec1(0), vec1(1), q, p), domain_error);
}

TEST_CASE("classical orbits agree with the RK4 oracle to 1e-8") {
    auto s = make_solver();
    Eigen::VectorXd q, p, qo, po;
    struct Case {
        double t, s0, y, xi;
    };
    for (const Case& c : {Case{12.0, 0.0, 6.0, 1.1}, Case{20.0, 5.0, -8.0, -0.9},
                          Case{9.0, 1.0, 10.0, 0.7}}) {
        s->orbit(c.t, c.s0, vec1(c.y), vec1(c.xi), q, p);
        rk4_orbit(*s, c.t, c.s0, vec1(c.y), vec1(c.xi), qo, po);
        CHECK(std::abs(q(0) - qo(0)) <= 1e-8 * (1.0 + std::abs(qo(0))));
        CHECK(std::abs(p(0) - po(0)) <= 1e-8 * (1.0 + std::abs(po(0))));
    }
}

TEST_CASE("orbit momentum stays near xi (contraction bound)") {
    auto s = make_solver();
    Rng rng(7);
    std::uniform_real_distribution<double> uy(-12.0, 12.0), uk(0.6, 1.6);
    for (int trial = 0; trial < 10; ++trial) {
        double y = uy(rng), k = uk(rng) * (trial % 2 ? 1 : -1);
        Eigen::VectorXd q, p;
        s->orbit(30.0, 0.0, vec1(y), vec1(k), q, p);
        CHECK(std::abs(p(0) - k) <= 0.5 * std::abs(k));  // margin C0 rho^d0 < 1/2
    }
}

TEST_CASE("orbit flow composition") {
    auto s = make_solver();
    Eigen::VectorXd q1, p1, q2, p2, qd, pd;
    // q(t,u, q(u,s,y,xi), p(u,s,y,xi)) = q(t,s,y,xi)
    double t = 18.0, u = 7.0, s0 = 0.0;
    s->orbit(u, s0, vec1(5.0), vec1(1.2), q1, p1);
    s->orbit(t, u, q1, p1, q2, p2);
    s->orbit(t, s0, vec1(5.0), vec1(1.2), qd, pd);
    CHECK(std::abs(q2(0) - qd(0)) <= 1e-8 * (1.0 + std::abs(qd(0))));
    CHECK(std::abs(p2(0) - pd(0)) <= 1e-8);
}

TEST_CASE("orbit inverse: free case and round trip") {
    auto free_vl = [](const Eigen::VectorXd&) { return 0.0; };
    OrbitSolver fs(free_vl, 1, 0.05, 0.3, 0.3);
    Eigen::VectorXd eta = fs.orbit_inverse(10.0, 0.0, vec1(3.0), vec1(0.9));
    CHECK(eta(0) == doctest::Approx(0.9).epsilon(1e-12));

    auto s = make_solver();
    Eigen::VectorXd q, p;
    eta = s->orbit_inverse(25.0, 0.0, vec1(8.0), vec1(1.1));
    s->orbit(25.0, 0.0, vec1(8.0), eta, q, p);
    CHECK(std::abs(p(0) - 1.1) <= 1e-10);
    // consistency with y(s,t,x,xi) = q(t,s,x,eta(t,s,x,xi))
    // (here: the time-t position of the orbit through (x, eta) at time s=0)
    Eigen::VectorXd y = q;
    // re-derive via the defining property: p at t must be xi
    CHECK(std::abs(y(0) - (8.0 + [&] {
              Eigen::VectorXd qq, pp;
              s->orbit(25.0, 0.0, vec1(8.0), eta, qq, pp);
              return qq(0) - 8.0;
          }())) <= 1e-12);
}

TEST_CASE("eikonal phase: free potential gives x.xi exactly") {
    auto free_vl = [](const Eigen::VectorXd&) { return 0.0; };
    auto s = std::make_shared<OrbitSolver>(free_vl, 1, 0.25, 0.3, 0.3);
    for (double x : {-6.0, 3.0, 11.0})
        for (double k : {-1.2, 0.8}) {
            auto lim = s->eikonal_phase(vec1(x), vec1(k), k > 0 ? 1 : -1, 60.0);
            CHECK(std::abs(lim.value - x * k) <= 1e-10 * (1.0 + std::abs(x * k)));
        }
}

TEST_CASE("eikonal phase matches the 1-d WKB quadrature oracle") {
    // For m=1 and x, xi > 0 the outgoing eikonal solution with the
    // time-limit normalization satisfies
    //   phi_+(x,xi) - phi_+(x0,xi) = int_x0^x sqrt(xi^2 - 2 V_L(u)) du
    // on the region where the orbit cutoffs are inactive.
    auto s = make_solver(0.3, 0.1);
    s->tail_tolerance = 1e-2;
    double k = 1.3;
    double x0 = 24.0, x1 = 34.0;
    auto l0 = s->eikonal_phase(vec1(x0), vec1(k), +1, 400.0);
    auto l1 = s->eikonal_phase(vec1(x1), vec1(k), +1, 400.0);
    // oracle by fine trapezoid quadrature
    int nq = 40000;
    double acc = 0.0;
    for (int i = 0; i < nq; ++i) {
        double u = x0 + (x1 - x0) * (i + 0.5) / nq;
        acc += std::sqrt(k * k - 2.0 * soft_coulomb_1d(u, 0.3)) * (x1 - x0) / nq;
    }
    CHECK(std::abs((l1.value - l0.value) - acc) <= 2e-5 * std::abs(acc));
}

TEST_CASE("phase estimates |phi - x.xi| <= C <x>^{1-delta} |xi|^{-1} on the cone") {
    auto s = make_solver();
    double worst_ratio = 0.0;
    s->tail_tolerance = 1e-2;
    for (double x : {24.0, 32.0, 48.0, 64.0})
        for (double k : {0.8, 1.2, 1.8}) {
            auto lim = s->eikonal_phase(vec1(x), vec1(k), +1, 400.0);
            double corr = std::abs(lim.value - x * k);
            double bound = std::pow(jbracket(x), 0.1) / k;  // delta = 0.9
            worst_ratio = std::max(worst_ratio, corr / bound);
        }
    // the fitted constant stays bounded (value itself is reported, not pinned)
    CHECK(worst_ratio < 5.0);
}

TEST_CASE("eikonal residual below 1e-4 on cone samples") {
    auto s = make_solver();
    s->tail_tolerance = 1e-2;
    PhaseParams pp;
    pp.d = 0.5;
    pp.r0 = 24.0;
    pp.t_max = 300.0;
    PhaseFunction phase(s, pp);
    Rng rng(11);
    std::uniform_real_distribution<double> ux(24.0, 60.0), uk(0.7, 1.8);
    for (int trial = 0; trial < 12; ++trial) {
        double x = ux(rng), k = uk(rng);
        int sign = trial % 2 ? 1 : -1;
        // Gamma_+ samples have cos(x,xi)=+1; Gamma_- ones cos=-1
        double res = phase.eikonal_residual(vec1(x), vec1(sign * k), sign);
        CHECK(std::abs(res) <= 1e-4);
    }
}

TEST_CASE("glued phase: trivial regions and cone interiors") {
    auto s = make_solver();
    s->tail_tolerance = 1e-2;
    PhaseParams pp;
    pp.d = 0.5;
    pp.r0 = 16.0;
    PhaseFunction phase(s, pp);
    // |x| <= R0/2 or |xi| <= d/2: exactly x.xi
    CHECK(phase.glued(vec1(5.0), vec1(1.0)) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(phase.glued(vec1(20.0), vec1(0.2)) == doctest::Approx(4.0).epsilon(1e-14));
    // cone interior: equals the respective one-sided phase
    double g = phase.glued(vec1(40.0), vec1(1.2));
    double pplus = phase.phi_pm(vec1(40.0), vec1(1.2), +1);
    CHECK(g == doctest::Approx(pplus).epsilon(1e-10));
    double gm = phase.glued(vec1(40.0), vec1(-1.2));
    double pminus = phase.phi_pm(vec1(40.0), vec1(-1.2), -1);
    CHECK(gm == doctest::Approx(pminus).epsilon(1e-10));
}

TEST_CASE("identification operator: V_L = 0 gives the identity") {
    auto free_vl = [](const Eigen::VectorXd&) { return 0.0; };
    auto s = std::make_shared<OrbitSolver>(free_vl, 1, 0.25, 0.3, 0.3);
    PhaseParams pp;
    pp.d = 0.4;
    pp.r0 = 8.0;
    pp.t_max = 40.0;
    PhaseFunction phase(s, pp);
    Grid g(1, 512, 48.0);
    phase.build_cache(g);
    Rng rng(3);
    GridState psi = random_band_state(g, rng, 0.5, 2.0);
    GridState jp = identification_apply(phase, psi);
    jp -= psi;
    CHECK(jp.norm() <= 1e-10);
    auto inv = identification_inverse(phase, psi);
    inv.state -= psi;
    CHECK(inv.state.norm() <= 1e-8);
}

TEST_CASE("identification operator: bounded, near-unitary, invertible") {
    auto s = make_solver();
    Grid g(1, 1024, 96.0);
    PhaseParams base;
    base.d = 0.5;
    base.t_max = 120.0;
    PhaseParams pp = search_r0(s, base, g, 8.0, 64.0);
    PhaseFunction phase(s, pp);
    phase.build_cache(g);

    Rng rng(5);
    double worst_c = 0.0;
    for (int p = 0; p < 4; ++p) {
        GridState psi = random_band_state(g, rng, 0.6, 2.0);
        GridState jp = identification_apply(phase, psi);
        worst_c = std::max(worst_c, jp.norm() / psi.norm());
    }
    CHECK(worst_c <= 2.0);  // boundedness with a modest constant

    double m = measure_i_minus_jjstar(phase, 4, rng, 0.6, 2.0);
    CHECK(m < 0.5);

    GridState psi = random_band_state(g, rng, 0.6, 2.0);
    auto inv = identification_inverse(phase, psi, 1e-10);
    CHECK(inv.residual <= 1e-8);
    // two-sided inverse agreement: J (J^{-1} psi) = psi implies
    // J^{-1} (J psi) = psi as well when JJ* is invertible
    GridState round = identification_inverse(phase, identification_apply(phase, psi)).state;
    round -= psi;
    CHECK(round.norm() <= 1e-7);
}

TEST_CASE("phase cache round trip") {
    auto s = make_solver();
    PhaseParams pp;
    pp.d = 0.5;
    pp.r0 = 16.0;
    pp.t_max = 60.0;
    PhaseFunction phase(s, pp);
    Grid g(1, 256, 48.0);
    phase.build_cache(g);
    phase.write_cache("/tmp/sl_phase.bin");
    PhaseFunction back = PhaseFunction::read_cache("/tmp/sl_phase.bin", s);
    for (int j = 0; j < 256; j += 37)
        for (int k = 0; k < 256; k += 41)
            CHECK(back.cached_phase(j, k) == phase.cached_phase(j, k));
}

TEST_CASE("cook wave operator: V = 0 is the identity; isometry holds") {
    Grid g(1, 1024, 96.0);
    Propagator free_prop(g, {1.0}, nullptr, 0.05);
    GridState psi = band_packet(g, -20.0, 1.2, 3.0);
    auto w = cook_wave_operator(free_prop, psi, 16.0, +1);
    GridState d = w.state;
    d -= psi;
    CHECK(d.norm() <= 1e-10);

    auto vwell = [](const double* x) { return -1.2 * std::exp(-sq(x[0] / 1.4)); };
    Propagator full(g, {1.0}, vwell, 0.02);
    // outgoing packet: e^{-itH0} g separates from the scatterer as t grows
    GridState gpkt = band_packet(g, 6.0, 1.3, 3.0);
    auto wfull = cook_wave_operator(full, gpkt, 40.0, +1);
    CHECK(std::abs(wfull.state.norm() - gpkt.norm()) <= 1e-6);
    CHECK(wfull.tail_decreasing);
    // fitted tail power at least as steep as the declared short-range decay
    DecayTable tl;
    tl.times = {wfull.horizons[0], wfull.horizons[1], wfull.horizons[2]};
    tl.values = wfull.tails;
    tl.fit(tl.times.front(), tl.times.back());
    CHECK(tl.fitted_slope <= -1.0 + 0.2);  // delta = 1 declared for the well
}

TEST_CASE("intertwining defect: V = 0 vanishes; well converges by T = 40") {
    Grid g(1, 1024, 96.0);
    Propagator free_prop(g, {1.0}, nullptr, 0.05);
    GridState psi = band_packet(g, -20.0, 1.2, 3.0);
    double d0 = intertwining_defect(free_prop, [](double) { return 0.0; }, 1.0, psi,
                                    16.0, +1, 0.4, 1.2);
    CHECK(d0 <= 1e-10);

    auto vfun = [](double x) { return -1.2 * std::exp(-sq(x / 1.4)); };
    Propagator full(g, {1.0}, [&](const double* x) { return vfun(x[0]); }, 0.02);
    GridState gpkt = band_packet(g, 6.0, 1.3, 3.0);
    double d40 = intertwining_defect(full, vfun, 1.0, gpkt, 40.0, +1, 0.5, 1.3);
    double d20 = intertwining_defect(full, vfun, 1.0, gpkt, 20.0, +1, 0.5, 1.3);
    CHECK(d40 <= 1e-3);
    CHECK(d40 <= d20 + 1e-12);
}

TEST_CASE("completeness defect: V = 0 vanishes; short-range well small at T = 40") {
    Grid g(1, 1024, 96.0);
    Propagator free_prop(g, {1.0}, nullptr, 0.05);
    GridState psi = band_packet(g, -20.0, 1.2, 3.0);
    CHECK(completeness_defect(free_prop, nullptr, psi, 16.0) <= 1e-10);

    auto vfun = [](double x) { return -1.2 * std::exp(-sq(x / 1.4)); };
    Propagator full(g, {1.0}, [&](const double* x) { return vfun(x[0]); }, 0.02);
    auto bound = lowest_eigenstates(g, 1.0, vfun, 2);
    // packet crosses the well early so the half-horizon state is already free
    GridState f = band_packet(g, -8.0, 1.6, 2.5);
    f = project_off(f, bound);
    f.scale(1.0 / f.norm());
    CHECK(completeness_defect(full, nullptr, f, 40.0) <= 1e-2);

    // bound-state input has no free asymptote
    double db = completeness_defect(full, nullptr, bound[0].state, 40.0);
    CHECK(db >= 0.75);
}
