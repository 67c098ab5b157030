#pragma once

#include <map>
#include <optional>

#include "scatterlab/coords.hpp"

namespace scatterlab {

enum class PotentialKind {
    Gaussian,        // v0 * exp(-(r/w)^2)
    Yukawa,          // v0 * exp(-kappa r)/sqrt(r^2 + a^2)
    ScreenedCoulomb, // same form, conventional alias
    SoftCoulomb,     // v0 / sqrt(r^2 + a^2)
    InversePower,    // v0 / (r^2 + a^2)^{p/2}
};

PotentialKind potential_kind_from_string(const std::string& name);
std::string to_string(PotentialKind k);

// A pair potential with its short-/long-range split and declared decay
// exponents. Short part bounded by C<r>^{-1-delta}; gradient of the long
// part by C<r>^{-1-eps}. Singular kinds carry a soft core a > 0 so grid
// sampling never sees infinity.
struct PairPotential {
    PotentialKind kind = PotentialKind::Gaussian;
    double v0 = 0.0;       // strength
    double width = 1.0;    // gaussian width or screening 1/kappa, kind-dependent
    double softcore = 0.0; // a
    double power = 1.0;    // inverse-power exponent p
    double delta = 1.0;    // declared short-range exponent
    double eps = 1.0;      // declared long-range exponent
    double long_fraction = 0.0;  // 0: all short; 1: all long

    double value(double r) const;        // total V(r)
    double value_short(double r) const;  // V_S
    double value_long(double r) const;   // V_L
    double dlong_dr(double r) const;     // d V_L / dr (central difference)
};

PairPotential gaussian_well(double depth, double width);
PairPotential soft_coulomb(double strength, double softcore);
PairPotential screened_coulomb(double strength, double kappa, double softcore);

// Pair potentials attached to a Jacobi frame: V = sum_{i<j} V_ij(X_i - X_j).
struct PotentialAssembly {
    JacobiFrame frame;
    std::map<std::pair<int, int>, PairPotential> pairs;  // keys (i, j), i < j

    void add(int i, int j, PairPotential p);
};

// Total potential at a Jacobi configuration (rows = Jacobi vectors).
double evaluate_total(const PotentialAssembly& a, const Eigen::MatrixXd& jacobi_config);
double evaluate_total_particles(const PotentialAssembly& a,
                                const Eigen::MatrixXd& particle_positions);

// V = V_b + I_b: V_b collects pairs inside clusters of b (a function of x^b
// only), I_b the intercluster pairs.
struct ClusterSplitPotential {
    PotentialAssembly assembly;
    ClusterDecomposition decomposition;
    double vb(const Eigen::MatrixXd& jacobi_config) const;
    double ib(const Eigen::MatrixXd& jacobi_config) const;
};

ClusterSplitPotential cluster_split(const PotentialAssembly& a,
                                    const ClusterDecomposition& b);

// log-log decay fit of |V_S| and |V_L'| over sampled radii; pass iff the
// fitted exponents are at least as steep as the declared -(1+delta) resp.
// -(1+eps) within `slack`.
struct DecayReport {
    double short_exponent = 0.0;
    double long_grad_exponent = 0.0;
    double short_constant = 0.0;
    double long_constant = 0.0;
    bool short_pass = false;
    bool long_pass = false;
    bool pass = false;
    std::string diagnostic;
};

DecayReport decay_check(const PairPotential& p, const std::vector<double>& radii,
                        double slack = 0.15);

}  // namespace scatterlab
