#include "scatterlab/observe.hpp"

#include <Eigen/Dense>

namespace scatterlab {

MomentReport uncertainty_product(const GridState& psi,
                                 const std::vector<double>& axis_masses) {
    const Grid& g = psi.grid;
    if (std::abs(psi.norm() - 1.0) > 1e-10)
        throw domain_error("uncertainty_product: state must be normalized");
    std::vector<double> mu = axis_masses;
    if (mu.empty()) mu.assign(g.dim, 1.0);
    if (static_cast<int>(mu.size()) != g.dim)
        throw domain_error("uncertainty_product: one mass per axis");

    GridState hat = dft(psi);
    MomentReport rep;
    rep.q_mean.assign(g.dim, 0.0);
    rep.p_mean.assign(g.dim, 0.0);
    int idx[3];
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        g.unflatten(i, idx);
        double w = std::norm(psi.values[i]) * psi.cell();
        double wh = std::norm(hat.values[i]) * hat.cell();
        for (int a = 0; a < g.dim; ++a) {
            rep.q_mean[a] += w * g.x(idx[a]);
            rep.p_mean[a] += wh * g.xi(idx[a]);
        }
    }
    double vq = 0.0, vp = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        g.unflatten(i, idx);
        double w = std::norm(psi.values[i]) * psi.cell();
        double wh = std::norm(hat.values[i]) * hat.cell();
        for (int a = 0; a < g.dim; ++a) {
            vq += mu[a] * w * sq(g.x(idx[a]) - rep.q_mean[a]);
            vp += wh * sq(g.xi(idx[a]) - rep.p_mean[a]) / mu[a];
        }
    }
    rep.dq = std::sqrt(vq);
    rep.dp = std::sqrt(vp);
    return rep;
}

namespace {

GridState momentum_modulus_multiply(const GridState& psi) {
    GridState hat = dft(psi);
    const Grid& g = psi.grid;
    int idx[3];
    for (std::size_t i = 0; i < hat.values.size(); ++i) {
        g.unflatten(i, idx);
        double k2 = 0.0;
        for (int a = 0; a < g.dim; ++a) k2 += sq(g.xi(idx[a]));
        hat.values[i] *= std::sqrt(k2);
    }
    return idft(hat);
}

}  // namespace

TimeEnergyReport time_energy_uncertainty(const GridState& psi, double t,
                                         double xi_floor, double floor_mass_tol) {
    const Grid& g = psi.grid;
    if (g.dim != 3) throw domain_error("time_energy_uncertainty: needs d = 3");
    if (t == 0.0) throw domain_error("time_energy_uncertainty: t must be nonzero");
    if (std::abs(psi.norm() - 1.0) > 1e-10)
        throw domain_error("time_energy_uncertainty: state must be normalized");

    GridState hat = dft(psi);
    // admissibility: Fourier mass near xi = 0
    double floor_mass = 0.0;
    int idx[3];
    for (std::size_t i = 0; i < hat.values.size(); ++i) {
        g.unflatten(i, idx);
        double k2 = sq(g.xi(idx[0])) + sq(g.xi(idx[1])) + sq(g.xi(idx[2]));
        if (k2 < sq(xi_floor)) floor_mass += std::norm(hat.values[i]) * hat.cell();
    }
    if (floor_mass > floor_mass_tol)
        throw domain_error("time_energy_uncertainty: Fourier mass near xi = 0 above threshold");

    // t_j psi via momentum multipliers; e_j psi = (|p| x_j + x_j |p|) psi / (4t)
    std::vector<GridState> tjs, ejs;
    for (int j = 0; j < 3; ++j) {
        GridState th = hat;
        for (std::size_t i = 0; i < th.values.size(); ++i) {
            g.unflatten(i, idx);
            double k2 = sq(g.xi(idx[0])) + sq(g.xi(idx[1])) + sq(g.xi(idx[2]));
            th.values[i] *= k2 > 0.0 ? t * g.xi(idx[j]) / std::sqrt(k2) : 0.0;
        }
        tjs.push_back(idft(th));

        GridState xj = psi;
        apply_position_multiplier(xj, [&](const double* x) { return x[j]; });
        GridState a = momentum_modulus_multiply(xj);   // |p| x_j psi
        GridState b = momentum_modulus_multiply(psi);  // |p| psi
        apply_position_multiplier(b, [&](const double* x) { return x[j]; });
        a += b;
        a.scale(1.0 / (4.0 * t));
        ejs.push_back(std::move(a));
    }

    TimeEnergyReport rep;
    double t2 = 0.0, vT = 0.0, vE = 0.0;
    for (int j = 0; j < 3; ++j) {
        cplx tm = tjs[j].inner(psi);
        cplx em = ejs[j].inner(psi);
        t2 += tjs[j].norm2();
        GridState dt_ = tjs[j];
        for (std::size_t i = 0; i < dt_.values.size(); ++i)
            dt_.values[i] -= tm * psi.values[i];
        GridState de_ = ejs[j];
        for (std::size_t i = 0; i < de_.values.size(); ++i)
            de_.values[i] -= em * psi.values[i];
        vT += dt_.norm2();
        vE += de_.norm2();
    }
    rep.t_norm = std::sqrt(t2);
    rep.dT = std::sqrt(vT);
    rep.dE = std::sqrt(vE);
    return rep;
}

double energy_operator_defect(const GridState& psi_t, double t, double mass) {
    const Grid& g = psi_t.grid;
    if (g.dim != 3) throw domain_error("energy_operator_defect: needs d = 3");
    // |E| psi = sqrt(sum e_j^2) is awkward directly; compare componentwise:
    // sum_j || (e_j - (p_j p / (2m|p|) dot ... )||: use the scalar check
    // || |E| psi ||^2 = sum_j ||e_j psi||^2 against || (p^2/2m) psi ||^2 and
    // the cross term, which equals the defect of |E| toward p^2/2m.
    GridState hat = dft(psi_t);
    int idx[3];
    // build e_j psi
    double e2 = 0.0;
    cplx cross = 0.0;
    GridState kin = hat;
    for (std::size_t i = 0; i < kin.values.size(); ++i) {
        g.unflatten(i, idx);
        double k2 = sq(g.xi(idx[0])) + sq(g.xi(idx[1])) + sq(g.xi(idx[2]));
        kin.values[i] *= k2 / (2.0 * mass);
    }
    GridState kin_pos = idft(kin);
    for (int j = 0; j < 3; ++j) {
        GridState xj = psi_t;
        apply_position_multiplier(xj, [&](const double* x) { return x[j]; });
        GridState a = momentum_modulus_multiply(xj);
        GridState b = momentum_modulus_multiply(psi_t);
        apply_position_multiplier(b, [&](const double* x) { return x[j]; });
        a += b;
        a.scale(1.0 / (4.0 * t));
        e2 += a.norm2();
        // cross with (p_j/|p|) (p^2/2m) psi
        GridState ch = hat;
        for (std::size_t i = 0; i < ch.values.size(); ++i) {
            g.unflatten(i, idx);
            double k2 = sq(g.xi(idx[0])) + sq(g.xi(idx[1])) + sq(g.xi(idx[2]));
            ch.values[i] *= k2 > 0 ? (g.xi(idx[j]) / std::sqrt(k2)) * k2 / (2.0 * mass) : 0.0;
        }
        GridState cpos = idft(ch);
        cross += a.inner(cpos);
    }
    double kin2 = kin_pos.norm2();
    double d2 = e2 - 2.0 * cross.real() + kin2;
    return std::sqrt(std::max(0.0, d2));
}

double born_cross_section(const std::function<double(double)>& potential_fourier,
                          double energy, double theta, double mass) {
    if (!(energy > 0.0)) throw domain_error("born_cross_section: E > 0 required");
    if (!(theta > 0.0 && theta <= kPi))
        throw domain_error("born_cross_section: theta in (0, pi]");
    double k = std::sqrt(2.0 * mass * energy);
    double q = 2.0 * k * std::sin(0.5 * theta);
    double vt = potential_fourier(q);
    if (!std::isfinite(vt))
        throw range_error("born_cross_section: potential transform diverges at this angle");
    double f = -(mass / (2.0 * kPi)) * vt;
    return f * f;
}

std::function<double(double)> screened_coulomb_fourier(double z, double e_charge,
                                                       double kappa) {
    double strength = z * e_charge * e_charge;
    return [strength, kappa](double q) {
        double den = q * q + kappa * kappa;
        if (den == 0.0) return std::numeric_limits<double>::infinity();
        return 4.0 * kPi * strength / den;
    };
}

double rutherford_cross_section(double z, double e_charge, double energy, double theta) {
    double s = std::sin(0.5 * theta);
    return sq(z * sq(e_charge)) / (16.0 * sq(energy) * sq(sq(s)));
}

double relativistic_correction(double cross_section, double v, double c) {
    if (!(v >= 0.0 && v < c)) throw domain_error("relativistic_correction: 0 <= v < c");
    return cross_section * (1.0 - sq(v / c));
}

double relativistic_mass(double m0, double v, double c) {
    if (!(m0 > 0.0)) throw domain_error("relativistic_mass: m0 > 0");
    if (!(v >= 0.0 && v < c)) throw domain_error("relativistic_mass: 0 <= v < c");
    return m0 / std::sqrt(1.0 - sq(v / c));
}

double relativistic_energy(double m0, double v, double c) {
    double m = relativistic_mass(m0, v, c);
    double p = m * v;
    return c * std::sqrt(p * p + sq(m0 * c)) - m0 * c * c;
}

double clock_period(double m0, double v, double c, double planck_h) {
    // p(v) = h m / lambda with lambda = m0^2 c^2 / 2; p(0) = 2h/(m0 c^2)
    double m = relativistic_mass(m0, v, c);
    return 2.0 * planck_h * m / (sq(m0) * sq(c));
}

std::vector<double> relativistic_kinetic_values(const Grid& grid,
                                                const std::vector<double>& axis_masses,
                                                double c) {
    if (static_cast<int>(axis_masses.size()) != grid.dim)
        throw domain_error("relativistic_kinetic_values: one mass per axis");
    std::vector<double> out(grid.size());
    int idx[3];
    for (std::size_t i = 0; i < out.size(); ++i) {
        grid.unflatten(i, idx);
        double e = 0.0;
        for (int a = 0; a < grid.dim; ++a) {
            double m = axis_masses[a];
            e += c * std::sqrt(sq(grid.xi(idx[a])) + sq(m * c)) - m * c * c;
        }
        out[i] = e;
    }
    return out;
}

GridState apply_relativistic_kinetic(const GridState& psi,
                                     const std::vector<double>& axis_masses, double c) {
    auto vals = relativistic_kinetic_values(psi.grid, axis_masses, c);
    GridState hat = dft(psi);
    for (std::size_t i = 0; i < hat.values.size(); ++i) hat.values[i] *= vals[i];
    return idft(hat);
}

namespace {

// gravitational pair sum for cluster centers on the intercluster grid; for
// two clusters the single relative coordinate carries the full pair
double gravity_term(const double* x, int dim, const std::vector<double>& masses,
                    double G, double softcore) {
    if (masses.size() != 2)
        throw domain_error("effective hamiltonian: two-cluster grids only");
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += sq(x[a]);
    return -G * masses[0] * masses[1] / std::sqrt(r2 + sq(softcore));
}

}  // namespace

Propagator effective_hamiltonian_propagator(
    const Grid& grid, const std::vector<double>& cluster_masses, double c, double G,
    const std::function<double(const double*)>& intercluster_potential,
    double softcore, double dt, bool relativistic) {
    if (cluster_masses.size() != 2)
        throw domain_error("effective_hamiltonian_propagator: two clusters supported");
    double mu = cluster_masses[0] * cluster_masses[1] /
                (cluster_masses[0] + cluster_masses[1]);
    auto pot = [=, &grid](const double* x) {
        double v = intercluster_potential ? intercluster_potential(x) : 0.0;
        return v + gravity_term(x, grid.dim, cluster_masses, G, softcore);
    };
    std::function<double(const double*)> potc = pot;
    std::vector<double> mus(grid.dim, mu);
    if (!relativistic) return Propagator(grid, mus, potc, dt);
    return Propagator(grid, relativistic_kinetic_values(grid, mus, c), mus, potc, dt);
}

double effective_energy(const Propagator& prop, const GridState& psi,
                        const std::vector<double>& cluster_masses, double c, double G,
                        const std::function<double(const double*)>& intercluster_potential,
                        double softcore, bool relativistic) {
    const Grid& g = prop.grid();
    double mu = cluster_masses[0] * cluster_masses[1] /
                (cluster_masses[0] + cluster_masses[1]);
    double kin;
    if (relativistic) {
        GridState k = apply_relativistic_kinetic(psi, std::vector<double>(g.dim, mu), c);
        kin = k.inner(psi).real();
    } else {
        kin = kinetic_expectation(psi, std::vector<double>(g.dim, mu));
    }
    double pot = 0.0;
    int idx[3];
    double xv[3];
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        g.unflatten(i, idx);
        for (int a = 0; a < g.dim; ++a) xv[a] = g.x(idx[a]);
        double v = intercluster_potential ? intercluster_potential(xv) : 0.0;
        v += gravity_term(xv, g.dim, cluster_masses, G, softcore);
        pot += v * std::norm(psi.values[i]);
    }
    pot *= psi.cell();
    return kin + pot;
}

WitnessReport local_motion_witness(const FiniteModel& model, double degeneracy_tol) {
    const auto& hl = model.h_system;
    const auto& he = model.h_environment;
    const long nl = hl.rows(), ne = he.rows();
    if (hl.cols() != nl || he.cols() != ne)
        throw domain_error("local_motion_witness: square blocks required");
    if (nl > 16 || ne > 16)
        throw domain_error("local_motion_witness: dims <= 16 for the dense solve");
    if (!hl.isApprox(hl.transpose(), 1e-12) || !he.isApprox(he.transpose(), 1e-12))
        throw domain_error("local_motion_witness: blocks must be symmetric");
    const long n = nl * ne;
    if (model.interaction.rows() != n || model.interaction.cols() != n)
        throw domain_error("local_motion_witness: interaction has wrong shape");
    if (!model.interaction.isApprox(model.interaction.transpose(), 1e-12))
        throw domain_error("local_motion_witness: interaction must be symmetric");

    Eigen::MatrixXd h = model.interaction;
    for (long a = 0; a < nl; ++a)
        for (long b = 0; b < nl; ++b)
            for (long r = 0; r < ne; ++r)
                for (long srow = 0; srow < ne; ++srow) {
                    long row = a * ne + r, col = b * ne + srow;
                    if (r == srow) h(row, col) += hl(a, b);
                    if (a == b) h(row, col) += he(r, srow);
                }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    WitnessReport rep;
    double e0 = es.eigenvalues()(0);
    int mult = 1;
    while (mult < n && es.eigenvalues()(mult) - e0 < degeneracy_tol) ++mult;
    rep.ground_multiplicity = mult;
    rep.degenerate = mult > 1;

    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (int q = 0; q < mult; ++q)
        p += es.eigenvectors().col(q) * es.eigenvectors().col(q).transpose();

    // P_L: spectral projection of H_L x 1 onto the H_L eigenvalue carrying
    // the largest ground-state overlap
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> el(hl);
    double best = -1.0;
    Eigen::MatrixXd pl_best;
    long q0 = 0;
    while (q0 < nl) {
        long q1 = q0 + 1;
        while (q1 < nl && el.eigenvalues()(q1) - el.eigenvalues()(q0) < degeneracy_tol)
            ++q1;
        Eigen::MatrixXd proj_small = Eigen::MatrixXd::Zero(nl, nl);
        for (long q = q0; q < q1; ++q)
            proj_small += el.eigenvectors().col(q) * el.eigenvectors().col(q).transpose();
        Eigen::MatrixXd pl = Eigen::MatrixXd::Zero(n, n);
        for (long a = 0; a < nl; ++a)
            for (long b = 0; b < nl; ++b)
                for (long r = 0; r < ne; ++r)
                    pl(a * ne + r, b * ne + r) = proj_small(a, b);
        double overlap = (pl * p).trace();
        if (overlap > best) {
            best = overlap;
            pl_best = pl;
        }
        q0 = q1;
    }

    Eigen::MatrixXd defect = (Eigen::MatrixXd::Identity(n, n) - pl_best) * p;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(defect);
    rep.witness = svd.singularValues()(0);
    Eigen::MatrixXd comm = pl_best * p - p * pl_best;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd2(comm);
    rep.commutator = svd2.singularValues()(0);
    return rep;
}

}  // namespace scatterlab
