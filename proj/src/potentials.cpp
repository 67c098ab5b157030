#include "scatterlab/potentials.hpp"

#include <cmath>
#include <limits>

namespace scatterlab {

PotentialKind potential_kind_from_string(const std::string& name) {
    if (name == "gaussian") return PotentialKind::Gaussian;
    if (name == "yukawa") return PotentialKind::Yukawa;
    if (name == "screened-coulomb") return PotentialKind::ScreenedCoulomb;
    if (name == "soft-coulomb") return PotentialKind::SoftCoulomb;
    if (name == "inverse-power") return PotentialKind::InversePower;
    throw config_error("unknown potential kind: " + name);
}

std::string to_string(PotentialKind k) {
    switch (k) {
        case PotentialKind::Gaussian: return "gaussian";
        case PotentialKind::Yukawa: return "yukawa";
        case PotentialKind::ScreenedCoulomb: return "screened-coulomb";
        case PotentialKind::SoftCoulomb: return "soft-coulomb";
        case PotentialKind::InversePower: return "inverse-power";
    }
    return "?";
}

double PairPotential::value(double r) const {
    r = std::abs(r);
    double a2 = softcore * softcore;
    switch (kind) {
        case PotentialKind::Gaussian:
            return v0 * std::exp(-sq(r / width));
        case PotentialKind::Yukawa:
        case PotentialKind::ScreenedCoulomb:
            return v0 * std::exp(-r / width) / std::sqrt(r * r + a2);
        case PotentialKind::SoftCoulomb:
            return v0 / std::sqrt(r * r + a2);
        case PotentialKind::InversePower:
            return v0 * std::pow(r * r + a2, -0.5 * power);
    }
    return 0.0;
}

double PairPotential::value_long(double r) const { return long_fraction * value(r); }
double PairPotential::value_short(double r) const { return (1.0 - long_fraction) * value(r); }

double PairPotential::dlong_dr(double r) const {
    const double h = 1e-5 * (1.0 + std::abs(r));
    return (value_long(r + h) - value_long(r - h)) / (2.0 * h);
}

PairPotential gaussian_well(double depth, double width) {
    PairPotential p;
    p.kind = PotentialKind::Gaussian;
    p.v0 = -std::abs(depth);
    p.width = width;
    p.delta = 2.0;
    p.eps = 1.0;
    p.long_fraction = 0.0;
    return p;
}

PairPotential soft_coulomb(double strength, double softcore) {
    PairPotential p;
    p.kind = PotentialKind::SoftCoulomb;
    p.v0 = strength;
    p.softcore = softcore;
    p.delta = 0.9;
    p.eps = 0.9;
    p.long_fraction = 1.0;  // pure long range
    return p;
}

PairPotential screened_coulomb(double strength, double kappa, double softcore) {
    PairPotential p;
    p.kind = PotentialKind::ScreenedCoulomb;
    p.v0 = strength;
    p.width = 1.0 / kappa;
    p.softcore = softcore;
    p.delta = 2.0;
    p.eps = 1.0;
    p.long_fraction = 0.0;
    return p;
}

void PotentialAssembly::add(int i, int j, PairPotential p) {
    if (i == j || i < 1 || j < 1 || i > frame.particles() || j > frame.particles())
        throw domain_error("PotentialAssembly::add: invalid pair");
    if (i > j) std::swap(i, j);
    pairs[{i, j}] = p;
}

double evaluate_total_particles(const PotentialAssembly& a,
                                const Eigen::MatrixXd& pos) {
    double s = 0.0;
    for (const auto& [pr, pot] : a.pairs) {
        double r = pair_vector(pos, pr.first, pr.second).norm();
        if (!std::isfinite(r)) throw domain_error("evaluate_total: non-finite configuration");
        s += pot.value(r);
    }
    return s;
}

double evaluate_total(const PotentialAssembly& a, const Eigen::MatrixXd& jacobi_config) {
    return evaluate_total_particles(a, a.frame.particles_of(jacobi_config));
}

double ClusterSplitPotential::vb(const Eigen::MatrixXd& jacobi_config) const {
    Eigen::MatrixXd pos = assembly.frame.particles_of(jacobi_config);
    double s = 0.0;
    for (const auto& [pr, pot] : assembly.pairs)
        if (decomposition.cluster_of(pr.first) == decomposition.cluster_of(pr.second))
            s += pot.value(pair_vector(pos, pr.first, pr.second).norm());
    return s;
}

double ClusterSplitPotential::ib(const Eigen::MatrixXd& jacobi_config) const {
    Eigen::MatrixXd pos = assembly.frame.particles_of(jacobi_config);
    double s = 0.0;
    for (const auto& [pr, pot] : assembly.pairs)
        if (decomposition.cluster_of(pr.first) != decomposition.cluster_of(pr.second))
            s += pot.value(pair_vector(pos, pr.first, pr.second).norm());
    return s;
}

ClusterSplitPotential cluster_split(const PotentialAssembly& a,
                                    const ClusterDecomposition& b) {
    if (b.particle_count != a.frame.particles())
        throw domain_error("cluster_split: particle counts differ");
    return {a, b};
}

DecayReport decay_check(const PairPotential& p, const std::vector<double>& radii,
                        double slack) {
    if (radii.size() < 8) throw domain_error("decay_check: need at least 8 radii");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1]))
            throw domain_error("decay_check: radii must increase");

    DecayReport rep;
    std::vector<double> vs, vl;
    for (double r : radii) {
        vs.push_back(std::abs(p.value_short(r)));
        vl.push_back(std::abs(p.dlong_dr(r)));
    }
    const double floor_eps = 1e-300;
    auto fit_or_floor = [&](const std::vector<double>& v, double& expo, double& cst) {
        bool all_floor = true;
        for (double x : v) all_floor = all_floor && (x < 1e-14);
        if (all_floor) {
            expo = -std::numeric_limits<double>::infinity();
            cst = 0.0;
            return;
        }
        std::vector<double> vv = v;
        for (double& x : vv) x = std::max(x, floor_eps);
        SlopeFit fit = fit_loglog_slope(radii, vv, radii.front(), radii.back());
        expo = fit.slope;
        cst = std::exp(fit.intercept);
    };
    fit_or_floor(vs, rep.short_exponent, rep.short_constant);
    fit_or_floor(vl, rep.long_grad_exponent, rep.long_constant);
    rep.short_pass = rep.short_exponent <= -(1.0 + p.delta) + slack;
    rep.long_pass = rep.long_grad_exponent <= -(1.0 + p.eps) + slack;
    rep.pass = rep.short_pass && rep.long_pass;
    if (!rep.pass) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "fitted exponents (short %.3f vs %.3f, grad-long %.3f vs %.3f)",
                      rep.short_exponent, -(1.0 + p.delta), rep.long_grad_exponent,
                      -(1.0 + p.eps));
        rep.diagnostic = buf;
    }
    return rep;
}

}  // namespace scatterlab
