#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scatterlab/manybody.hpp"
#include "scatterlab/spectral.hpp"

using namespace scatterlab;

TEST_CASE("smooth cutoffs: endpoint values, monotonicity, complement") {
    SmoothCutoff less{0.2, 1.0, false};
    CHECK(less(1.0) == 1.0);       // lambda = tau -> 1
    CHECK(less(1.2) == 0.0);       // lambda = tau + sigma -> 0
    double mid = less(1.1);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
    CHECK(less(1.05) > less(1.15));  // monotone decreasing

    SmoothCutoff greater{0.2, 1.0, true};
    CHECK(greater(1.0) == 1.0);
    CHECK(greater(0.8) == 0.0);
    // complementary identity phi(l > tau) + phi(l < tau - sigma) = 1 exactly
    SmoothCutoff shifted{0.2, 0.8, false};
    for (double l : {0.5, 0.75, 0.8, 0.9, 0.95, 1.0, 1.3})
        CHECK(greater(l) + shifted(l) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("the worked constant tuple satisfies every inequality") {
    PartitionConstants c;
    c.n_particles = 3;
    c.gamma = 1.05;
    c.theta = {0.0, 1.0, 0.05};
    c.rho = {0.0, 0.0, 0.4, 0.02};
    c.sigma = 9e-4;
    CHECK(c.violated() == "");
    // direct arithmetic: r0 = 8, gamma(1+gamma) = 2.1525,
    // 2 g1 g2/(2-g1) ~ 4.80 < 8
    double g1 = 1.05 * 1.05, g2 = 2.05 / 1.05;
    CHECK(g1 == doctest::Approx(1.1025));
    CHECK(2.0 * g1 * g2 / (2.0 - g1) == doctest::Approx(4.7967).epsilon(1e-3));

    // breaking one inequality is detected
    PartitionConstants bad = c;
    bad.sigma = 2e-3;  // above (1 - 1/gamma) rho_N = 9.52e-4
    CHECK(bad.violated() != "");
}

TEST_CASE("select_constants: feasible, deterministic, decreasing thetas") {
    for (int n : {3, 4}) {
        auto c = select_constants(n, 1.05);
        CHECK(c.violated() == "");
        auto c2 = select_constants(n, 1.05);
        CHECK(c.sigma == c2.sigma);  // deterministic
        for (int j = 2; j <= n - 1; ++j) CHECK(c.theta[j] < c.theta[j - 1]);
        // re-verify the big-ratio bound by direct arithmetic
        double r0 = 1e300;
        for (int j = 2; j <= n - 1; ++j) r0 = std::min(r0, c.rho[j] / c.theta[j]);
        CHECK(std::max(c.gamma * (1 + c.gamma),
                       2 * c.gamma1p * c.gamma2p / (2 - c.gamma1p)) < r0);
    }
    // gamma = 2 makes gamma'_1 >= 2: infeasible
    CHECK_THROWS_AS(select_constants(3, 2.0), config_error);
    CHECK_THROWS_WITH_AS(select_constants(3, 2.0),
                         doctest::Contains("gamma'_1"), config_error);
}

TEST_CASE("partition of unity sums to one on the shell (N = 3 and 4)") {
    for (int n : {3, 4}) {
        auto c = select_constants(n, 1.05);
        auto frame = jacobi_frame(std::vector<double>(n, 1.0), n == 3 ? 2 : 1);
        PartitionOfUnity pu(frame, c);
        ShellSampler sampler{frame, c, Rng(17)};
        for (int s = 0; s < 1500; ++s) {
            auto pos = sampler.sample();
            auto vals = pu.all_values(pos);
            double total = 0.0;
            for (double v : vals) {
                CHECK(v >= -1e-15);
                CHECK(v <= 1.0 + 1e-12);
                total += v;
            }
            CHECK(std::abs(total - 1.0) <= 1e-10);
        }
    }
}

TEST_CASE("deep-region membership and vanishing outside the inflated region") {
    // N = 3, d = 1, equal masses; b = {{1,2},{3}}: place the pair tight and
    // the third particle far: J_b = 1 there
    auto c = select_constants(3, 1.05);
    auto frame = jacobi_frame({1.0, 1.0, 1.0}, 1);
    PartitionOfUnity pu(frame, c);
    int target = -1;
    auto b = ClusterDecomposition::parse("{1,2}|{3}", 3);
    for (std::size_t m = 0; m < pu.members().size(); ++m)
        if (pu.members()[m] == b) target = static_cast<int>(m);
    REQUIRE(target >= 0);

    // internal separation eps, third particle carries the shell radius
    Eigen::MatrixXd pos(3, 1);
    double eps = 1e-4;
    pos << -eps / 2, eps / 2, 0.0;
    // shift particle 3 and recenter so the mass norm is on the shell
    pos(2, 0) = 1.0;
    Eigen::RowVectorXd com(1);
    com << (pos(0, 0) + pos(1, 0) + pos(2, 0)) / 3.0;
    for (int i = 0; i < 3; ++i) pos.row(i) -= com;
    double n2 = 0.0;
    for (int i = 0; i < 3; ++i) n2 += pos.row(i).squaredNorm();
    pos *= std::sqrt(1.0 / n2);
    auto vals = pu.all_values(pos);
    CHECK(vals[target] == doctest::Approx(1.0).epsilon(1e-12));
    double total = 0.0;
    for (double v : vals) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

    // a configuration with every pair widely separated belongs to the finest
    // decomposition instead
    int finest = -1;
    for (std::size_t m = 0; m < pu.members().size(); ++m)
        if (pu.members()[m].size() == 3) finest = static_cast<int>(m);
    Eigen::MatrixXd spread(3, 1);
    spread << -0.5, 0.1, 0.55;
    Eigen::RowVectorXd c2(1);
    c2 << (spread(0, 0) + spread(1, 0) + spread(2, 0)) / 3.0;
    for (int i = 0; i < 3; ++i) spread.row(i) -= c2;
    double sn = 0.0;
    for (int i = 0; i < 3; ++i) sn += spread.row(i).squaredNorm();
    spread *= std::sqrt(1.0 / sn);
    auto vals2 = pu.all_values(spread);
    CHECK(vals2[finest] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(vals2[target] <= 1e-12);
}

TEST_CASE("off-shell configurations are a hard error") {
    auto c = select_constants(3, 1.05);
    auto frame = jacobi_frame({1.0, 1.0, 1.0}, 1);
    PartitionOfUnity pu(frame, c);
    Eigen::MatrixXd pos(3, 1);
    pos << -2.0, 0.5, 1.5;  // norm far above the shell
    CHECK_THROWS_AS(pu.all_values(pos), domain_error);
}

TEST_CASE("support property: no violations on sampled shells") {
    for (int n : {3, 4}) {
        auto c = select_constants(n, 1.05);
        auto frame = jacobi_frame(std::vector<double>(n, 1.0), n == 3 ? 2 : 1);
        PartitionOfUnity pu(frame, c);
        ShellSampler sampler{frame, c, Rng(29)};
        auto rep = support_check(pu, sampler, 2000);
        CHECK(rep.pass());
        CHECK(rep.violations == 0);
        CHECK(rep.worst_margin > 1.0);
        CHECK(rep.gradient_sup > 0.0);
        CHECK(std::isfinite(rep.gradient_sup));
    }
}

TEST_CASE("region disjointness within a size class") {
    // samples where two same-size varphi factors are simultaneously active
    // must not occur on the shell
    auto c = select_constants(3, 1.05);
    auto frame = jacobi_frame({1.0, 1.0, 1.0}, 2);
    PartitionOfUnity pu(frame, c);
    ShellSampler sampler{frame, c, Rng(31)};
    for (int s = 0; s < 1500; ++s) {
        auto pos = sampler.sample();
        int active = 0;
        for (std::size_t m = 0; m < pu.members().size(); ++m)
            if (pu.members()[m].size() == 2 && pu.varphi(static_cast<int>(m), pos) > 0.0)
                ++active;
        CHECK(active <= 1);
    }
}

TEST_CASE("cluster indicator weight: matched, mismatched, bound cluster") {
    // 3 particles on a line; configuration grid is 2-d (two Jacobi axes)
    auto frame = jacobi_frame({1.0, 1.0, 1.0}, 1);
    auto matched = clustered_frame(frame, ClusterDecomposition::parse("{1,2}|{3}", 3));
    auto mismatched = clustered_frame(frame, ClusterDecomposition::parse("{1,3}|{2}", 3));

    Grid g(2, 256, 120.0);
    // product state: tight pair (x1 ~ 0) and a separating third particle
    // (x2 drifting): free evolution keeps the pair near x1 = 0 while x2 grows
    // the internal packet width minimizes free spreading at sqrt(t/mu) ~ 9
    double p2 = 1.5;
    GridState psi = sample_state(g, [&](const double* x) {
        return std::exp(cplx(-0.5 * sq(x[0] / 9.0) - 0.5 * sq((x[1] + 20.0) / 3.0),
                             p2 * x[1]));
    });
    psi.scale(1.0 / psi.norm());
    double t = 40.0;
    // axis masses: mu_1 = 1/2, mu_2 = 2/3
    GridState evolved = free_propagate_axes(psi, t, {0.5, 2.0 / 3.0});

    double w_match = cluster_indicator_weight(evolved, matched, 0.5, 0.5, 1.0, t);
    double w_mismatch = cluster_indicator_weight(evolved, mismatched, 0.5, 0.5, 1.0, t);
    CHECK(w_match >= 0.95);
    CHECK(w_mismatch <= 0.1);

    // a cluster that stays together: zero mean momentum and a dispersal
    // rate 1/(mu sigma0) well below the sigma threshold
    GridState bound = sample_state(g, [&](const double* x) {
        return std::exp(-0.5 * sq(x[0] / 12.0) - 0.5 * sq(x[1] / 12.0));
    });
    bound.scale(1.0 / bound.norm());
    GridState bev = free_propagate_axes(bound, t, {0.5, 2.0 / 3.0});
    CHECK(cluster_indicator_weight(bev, matched, 0.5, 0.5, 1.0, t) <= 0.2);
    CHECK_THROWS_AS(cluster_indicator_weight(bev, matched, 0.5, 0.5, 1.0, 0.0),
                    domain_error);
}
