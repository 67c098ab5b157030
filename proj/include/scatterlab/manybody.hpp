#pragma once

#include "scatterlab/coords.hpp"
#include "scatterlab/grid.hpp"

namespace scatterlab {

// Constant system for the cluster partition of unity: indexed families
// theta_j (j = 1..N-1) and rho_j (j = 2..N) with
//   1 >= theta_1 > rho_j > theta_j > rho_N > 0,
//   theta_{j-1} >= theta_j + rho_j,
//   max{gamma(1+gamma), 2 g1 g2/(2 - g1)} < r0 = min_j rho_j/theta_j,
//   g1 = gamma (1 + theta_{N-1}), g2 = (1 + gamma)/(1 + theta_{N-1}),
// and the mollifier width sigma below the Lemma bound.
struct PartitionConstants {
    int n_particles = 0;
    double gamma = 0.0;
    std::vector<double> theta;  // theta[j] holds theta_j, j = 1..N-1 (index 0 unused)
    std::vector<double> rho;    // rho[j] holds rho_j, j = 2..N
    double sigma = 0.0;
    double gamma1p = 0.0, gamma2p = 0.0, r0 = 0.0;

    // verifies every inequality; returns a diagnostic naming the first
    // violated one (empty string when feasible)
    std::string violated() const;
};

// Deterministic feasible tuple for (N, gamma); throws config_error naming the
// violated inequality when gamma is infeasible.
PartitionConstants select_constants(int n, double gamma);

// phi_sigma(lambda < tau) and phi_sigma(lambda > tau) built from the standard
// normalized bump integral: 1 on the flat side, 0 past width sigma.
struct SmoothCutoff {
    double sigma = 1.0;
    double tau = 0.0;
    bool greater = false;  // direction: false = (lambda < tau), true = (lambda > tau)
    double operator()(double lambda) const;
};

double cutoff_eval(const SmoothCutoff& c, double lambda);

// The shell 1 <= |x|^2 <= 1 + theta_{N-1} in the mass metric, sampled from
// particle-space Gaussians (seeded, rejection-free radial rescale).
struct ShellSampler {
    JacobiFrame frame;
    PartitionConstants constants;
    Rng rng;
    Eigen::MatrixXd sample();  // particle positions, COM zero, on the shell
};

// J_b(x) per the product-of-cutoffs construction; x given as particle
// positions on the shell (hard error off shell).
class PartitionOfUnity {
  public:
    PartitionOfUnity(JacobiFrame frame, PartitionConstants constants);

    const std::vector<ClusterDecomposition>& members() const { return members_; }
    const PartitionConstants& constants() const { return constants_; }

    // varphi_b and J_b at a configuration (particle positions);
    // indices follow members(). Off-shell configurations are a domain error.
    double varphi(int member, const Eigen::MatrixXd& positions) const;
    double member_value(int member, const Eigen::MatrixXd& positions) const;
    std::vector<double> all_values(const Eigen::MatrixXd& positions) const;

    double shell_low() const { return 1.0; }
    double shell_high() const;

  private:
    JacobiFrame frame_;
    PartitionConstants constants_;
    std::vector<ClusterDecomposition> members_;          // 2 <= |b| <= N
    std::vector<ClusteredFrame> frames_;
    std::vector<std::vector<int>> coarser_;              // strictly coarser members
    void check_shell(double norm2) const;
};

// Support property report: for samples with J_b > 0 and pairs not in any
// cluster of b, |x_alpha|^2 > rho_{|b|} |x|^2 / 2 must hold (pair vectors
// weighted as intercluster Jacobi vectors). Also reports a finite-difference
// bound on sup |grad_{x_b} J_b|.
struct SupportCheckReport {
    int samples = 0;
    int violations = 0;
    double worst_margin = 1e300;           // min of lhs/rhs over checks
    double gradient_sup = 0.0;
    std::vector<std::string> witnesses;    // first few violating samples
    bool pass() const { return violations == 0; }
};

SupportCheckReport support_check(PartitionOfUnity& pu, ShellSampler& sampler,
                                 int samples);
void write_support_csv(const SupportCheckReport& rep, const std::string& path);

// Scattering-space indicator weight of Definition-style localization:
// || prod_{alpha not<= b} F(|x_alpha| >= sigma t) F(|x^b| <= delta t^r) psi ||^2
// / ||psi||^2 with sharp grid masks. The grid is the full Jacobi
// configuration grid (d * (N-1) axes); pair norms use the intercluster
// reduced-mass weights.
double cluster_indicator_weight(const GridState& psi, const ClusteredFrame& cf,
                                double sigma, double delta, double r, double t);

}  // namespace scatterlab
