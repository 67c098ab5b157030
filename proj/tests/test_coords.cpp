#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scatterlab/coords.hpp"

using namespace scatterlab;

namespace {

Eigen::MatrixXd random_config(Rng& rng, int rows, int cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
    return m;
}

ClusterDecomposition random_decomposition(Rng& rng, int n) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<std::vector<int>> cs(n);
    for (int p = 1; p <= n; ++p) cs[pick(rng)].push_back(p);
    cs.erase(std::remove_if(cs.begin(), cs.end(),
                            [](const std::vector<int>& c) { return c.empty(); }),
             cs.end());
    return {n, std::move(cs)};
}

}  // namespace

TEST_CASE("jacobi_frame reduced masses match direct arithmetic") {
    // 1/mu_i = 1/m_{i+1} + 1/(m_1+...+m_i)
    auto f2 = jacobi_frame({1.0, 1.0}, 1);
    CHECK(f2.reduced_masses[0] == doctest::Approx(0.5).epsilon(1e-14));

    auto f12 = jacobi_frame({1.0, 2.0}, 1);
    CHECK(f12.reduced_masses[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    auto f3 = jacobi_frame({1.0, 1.0, 1.0}, 3);
    CHECK(f3.reduced_masses[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(f3.reduced_masses[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    Rng rng(7);
    std::uniform_real_distribution<double> u(0.1, 9.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> ms;
        int n = 2 + static_cast<int>(rng() % 5);
        for (int i = 0; i < n; ++i) ms.push_back(u(rng));
        auto f = jacobi_frame(ms, 3);
        double cum = ms[0];
        for (int i = 0; i + 1 < n; ++i) {
            double mu = 1.0 / (1.0 / ms[i + 1] + 1.0 / cum);
            CHECK(std::abs(f.reduced_masses[i] - mu) <= 1e-12 * mu);
            cum += ms[i + 1];
        }
    }
}

TEST_CASE("jacobi vector definitions") {
    // x_1 = X_2 - X_1 for two bodies; x_2 = X_3 - (X_1+X_2)/2 for equal masses.
    auto f = jacobi_frame({1.0, 1.0, 1.0}, 1);
    Eigen::MatrixXd pos(3, 1);
    pos << 0.3, 1.1, -0.4;
    Eigen::MatrixXd x = f.jacobi_of(pos);
    CHECK(x(0, 0) == doctest::Approx(1.1 - 0.3).epsilon(1e-14));
    CHECK(x(1, 0) == doctest::Approx(-0.4 - 0.7).epsilon(1e-14));
}

TEST_CASE("to_jacobi / from_jacobi invert each other") {
    Rng rng(11);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 2 + static_cast<int>(rng() % 4);
        int d = 1 + static_cast<int>(rng() % 3);
        std::vector<double> ms;
        for (int i = 0; i < n; ++i) ms.push_back(u(rng));
        auto f = jacobi_frame(ms, d);
        Eigen::MatrixXd x = random_config(rng, n - 1, d);
        Eigen::MatrixXd pos = f.particles_of(x);
        // COM is zero
        Eigen::RowVectorXd com = Eigen::RowVectorXd::Zero(d);
        for (int j = 0; j < n; ++j) com += ms[j] * pos.row(j);
        CHECK(com.norm() <= 1e-12);
        Eigen::MatrixXd back = f.jacobi_of(pos);
        CHECK((back - x).norm() <= 1e-12 * (1.0 + x.norm()));
    }
}

TEST_CASE("non-positive mass is a domain error") {
    CHECK_THROWS_AS(jacobi_frame({1.0, 0.0}, 3), domain_error);
    CHECK_THROWS_AS(jacobi_frame({1.0, -2.0}, 3), domain_error);
}

TEST_CASE("mass inner product: values, symmetry, Cauchy-Schwarz") {
    auto f = jacobi_frame({1.0, 1.0}, 3);
    Eigen::MatrixXd x(1, 3);
    x << 1.0, 0.0, 0.0;
    CHECK(mass_inner_product(f, x, x) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(mass_inner_product(f, x, Eigen::MatrixXd::Zero(1, 3)) == 0.0);

    Rng rng(3);
    auto g = jacobi_frame({0.7, 2.0, 1.3, 0.5}, 2);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::MatrixXd a = random_config(rng, 3, 2), b = random_config(rng, 3, 2);
        double ab = mass_inner_product(g, a, b);
        CHECK(ab == doctest::Approx(mass_inner_product(g, b, a)).epsilon(1e-12));
        CHECK(sq(ab) <= mass_norm2(g, a) * mass_norm2(g, b) * (1 + 1e-12));
    }
    CHECK_THROWS_AS(mass_inner_product(f, Eigen::MatrixXd::Zero(2, 3),
                                       Eigen::MatrixXd::Zero(2, 3)),
                    domain_error);
}

TEST_CASE("ordering change is an isometry of the mass metric") {
    Rng rng(19);
    std::uniform_real_distribution<double> u(0.2, 4.0);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 3 + static_cast<int>(rng() % 3);
        std::vector<double> ms;
        for (int i = 0; i < n; ++i) ms.push_back(u(rng));
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 1);
        std::shuffle(order.begin(), order.end(), rng);
        auto f = jacobi_frame(ms, 3);
        auto fp = jacobi_frame(ms, 3, order);
        Eigen::MatrixXd x = random_config(rng, n - 1, 3);
        Eigen::MatrixXd y = random_config(rng, n - 1, 3);
        // map through particle space into the permuted frame
        Eigen::MatrixXd ux = fp.jacobi_of(f.particles_of(x));
        Eigen::MatrixXd uy = fp.jacobi_of(f.particles_of(y));
        double lhs = mass_inner_product(fp, ux, uy);
        double rhs = mass_inner_product(f, x, y);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
    }
}

TEST_CASE("refines: examples and partial-order properties") {
    auto b = ClusterDecomposition::parse("{1}|{2}|{3}", 3);
    auto a = ClusterDecomposition::parse("{1,2}|{3}", 3);
    CHECK(refines(b, a));
    CHECK(refines(a, a));
    auto c = ClusterDecomposition::parse("{1,2}|{3}", 3);
    auto d = ClusterDecomposition::parse("{1}|{2,3}", 3);
    CHECK_FALSE(refines(c, d));
    CHECK_THROWS_AS(refines(b, ClusterDecomposition::coarsest(4)), domain_error);

    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + static_cast<int>(rng() % 5);  // N <= 6
        auto p = random_decomposition(rng, n);
        auto q = random_decomposition(rng, n);
        auto r = random_decomposition(rng, n);
        CHECK(refines(p, p));  // reflexive
        if (refines(p, q) && refines(q, p)) CHECK(p == q);          // antisymmetric
        if (refines(p, q) && refines(q, r)) CHECK(refines(p, r));   // transitive
    }
}

TEST_CASE("intercluster pairs enumeration") {
    auto b = ClusterDecomposition::parse("{1,2}|{3}", 3);
    auto pairs = intercluster_pairs(b);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == std::pair<int, int>(1, 3));
    CHECK(pairs[1] == std::pair<int, int>(2, 3));

    CHECK(intercluster_pairs(ClusterDecomposition::coarsest(4)).empty());
    CHECK(intercluster_pairs(ClusterDecomposition::finest(4)).size() == 6);

    // intercluster + intracluster = all pairs, disjointly
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng() % 5);
        auto d = random_decomposition(rng, n);
        auto inter = intercluster_pairs(d);
        int intra = 0;
        for (const auto& c : d.clusters)
            intra += static_cast<int>(c.size() * (c.size() - 1) / 2);
        CHECK(static_cast<int>(inter.size()) + intra == n * (n - 1) / 2);
    }
}

TEST_CASE("clustered frame: two-body trivial split") {
    auto f = jacobi_frame({1.0, 1.0}, 1);
    auto cf = clustered_frame(f, ClusterDecomposition::finest(2));
    CHECK(cf.dim_inter() == 1);
    CHECK(cf.dim_internal() == 0);
}

TEST_CASE("clustered frame: N=3 equal masses, b={{1,2},{3}}") {
    auto f = jacobi_frame({1.0, 1.0, 1.0}, 1);
    auto b = ClusterDecomposition::parse("{1,2}|{3}", 3);
    auto cf = clustered_frame(f, b);
    CHECK(cf.internal_frames[0].reduced_masses[0] == doctest::Approx(0.5));
    CHECK(cf.intercluster_frame.reduced_masses[0] == doctest::Approx(2.0 / 3.0));

    Eigen::MatrixXd pos(3, 1);
    pos << 0.2, 0.8, -1.0;
    auto ns = cluster_split_norms(cf, pos);
    // x^b = X_2 - X_1 with mu = 1/2; x_b = X_3 - (X_1+X_2)/2 with M = 2/3
    CHECK(ns.norm2_internal == doctest::Approx(0.5 * sq(0.6)).epsilon(1e-12));
    CHECK(ns.norm2_inter == doctest::Approx((2.0 / 3.0) * sq(-1.0 - 0.5)).epsilon(1e-12));
}

TEST_CASE("norm split |x|^2 = |x_b|^2 + |x^b|^2 on random configurations") {
    Rng rng(31);
    std::uniform_real_distribution<double> u(0.2, 4.0);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 2 + static_cast<int>(rng() % 4);
        int d = 1 + static_cast<int>(rng() % 3);
        std::vector<double> ms;
        for (int i = 0; i < n; ++i) ms.push_back(u(rng));
        auto f = jacobi_frame(ms, d);
        auto b = random_decomposition(rng, n);
        auto cf = clustered_frame(f, b);
        Eigen::MatrixXd pos = random_config(rng, n, d);
        auto ns = cluster_split_norms(cf, pos);
        CHECK(std::abs(ns.norm2_total - ns.norm2_inter - ns.norm2_internal) <=
              1e-10 * (1.0 + ns.norm2_total));
        // mass-metric norm agrees with the Jacobi-coordinate form
        Eigen::MatrixXd pos0 = pos;
        Eigen::RowVectorXd com = Eigen::RowVectorXd::Zero(d);
        for (int j = 0; j < n; ++j) com += ms[j] * pos.row(j);
        com /= f.total_mass();
        for (int j = 0; j < n; ++j) pos0.row(j) -= com;
        double viaj = mass_norm2(f, f.jacobi_of(pos0));
        CHECK(std::abs(viaj - ns.norm2_total) <= 1e-10 * (1.0 + viaj));
    }
}

TEST_CASE("z vectors consistent with cluster centers of mass") {
    auto f = jacobi_frame({1.0, 2.0, 3.0, 4.0}, 2);
    auto b = ClusterDecomposition::parse("{1,3}|{2}|{4}", 4);
    auto cf = clustered_frame(f, b);
    REQUIRE(cf.z_pairs.size() == 3);  // C(3,2)
    Rng rng(41);
    Eigen::MatrixXd pos = random_config(rng, 4, 2);
    auto ns = cluster_split_norms(cf, pos);
    // z for pair ({1,3},{2}): com difference is independent of COM shift
    Eigen::RowVectorXd c0 = (1.0 * pos.row(0) + 3.0 * pos.row(2)) / 4.0;
    Eigen::RowVectorXd c1 = pos.row(1);
    CHECK((ns.z_vectors[0].transpose() - (c0 - c1)).norm() <= 1e-12);
    double mred = (4.0 * 2.0) / 6.0;
    CHECK(ns.z_norm2[0] == doctest::Approx(mred * (c0 - c1).squaredNorm()).epsilon(1e-12));
}

TEST_CASE("decomposition serialization round trip") {
    auto b = ClusterDecomposition::parse("{3}|{1,2}", 3);
    CHECK(b.to_string() == "{1,2}|{3}");  // canonicalized
    auto c = ClusterDecomposition::parse(b.to_string(), 3);
    CHECK(b == c);
    CHECK_THROWS_AS(ClusterDecomposition::parse("{1,2}", 3), domain_error);
    CHECK_THROWS_AS(ClusterDecomposition::parse("{1,1}|{2,3}", 3), domain_error);
}
