#pragma once

#include <Eigen/Dense>

#include "scatterlab/dynamics.hpp"

namespace scatterlab {

// Position/momentum moments of a normalized state, with the variances taken
// in the (possibly mass-weighted) metric: Dq^2 = sum_a mu_a ||(x_a - q_a)psi||^2,
// Dp^2 = sum_a mu_a^{-1} ||(p_a - p_a_mean)psi||^2.
struct MomentReport {
    std::vector<double> q_mean, p_mean;
    double dq = 0.0, dp = 0.0;
    double product() const { return dq * dp; }
};

MomentReport uncertainty_product(const GridState& psi,
                                 const std::vector<double>& axis_masses = {});

// 3-d time and energy operators for t != 0:
//   t_j = t p_j |p|^{-1},  e_j = (1/(4t)) (|p| x_j + x_j |p|),
// on states with Fourier mass away from xi = 0 (admissibility threshold on
// the mass within |xi| < xi_floor).
struct TimeEnergyReport {
    double dT = 0.0, dE = 0.0;
    double t_norm = 0.0;   // ||T| psi| norm: sqrt(sum_j ||t_j psi||^2) = |t|
    double product() const { return dT * dE; }
};

TimeEnergyReport time_energy_uncertainty(const GridState& psi, double t,
                                         double xi_floor = 0.35,
                                         double floor_mass_tol = 1e-6);

// asymptotic defect || (|E| - p^2/(2m)) psi(t) || for a free scattering state
double energy_operator_defect(const GridState& psi_t, double t, double mass);

// Born cross section |f|^2 from the pair potential's 3-d Fourier transform
// at momentum transfer q = 2 sqrt(2 m E) sin(theta/2) (Gaussian units,
// hbar = m = 1 unless stated).
double born_cross_section(const std::function<double(double)>& potential_fourier,
                          double energy, double theta, double mass = 1.0);

// analytic 3-d Fourier transforms (conventions: Vtilde(q) = int V(r) e^{-iqr} d^3r)
std::function<double(double)> screened_coulomb_fourier(double z, double e_charge,
                                                       double kappa);

// Rutherford differential cross section Z^2 e^4 / (16 E^2 sin^4(theta/2)).
double rutherford_cross_section(double z, double e_charge, double energy, double theta);

// observed-energy machinery (c configurable)
double relativistic_correction(double cross_section, double v, double c);
double relativistic_energy(double m0, double v, double c);  // c sqrt(p^2+m^2c^2) - mc^2
double relativistic_mass(double m0, double v, double c);
double clock_period(double m0, double v, double c, double planck_h);

// relativistic kinetic multiplier sum_j (c sqrt(xi_j^2 + m_j^2 c^2) - m_j c^2)
// as a per-axis table usable by the split-step propagator
std::vector<double> relativistic_kinetic_values(const Grid& grid,
                                                const std::vector<double>& axis_masses,
                                                double c);
// apply it to a state (diagnostic)
GridState apply_relativistic_kinetic(const GridState& psi,
                                     const std::vector<double>& axis_masses, double c);

// Propagator with the relativistic intercluster kinetic energy, the
// intercluster potential at frozen internal coordinates, and the Newtonian
// gravitational pair terms; r_ij soft-cored by `softcore`.
Propagator effective_hamiltonian_propagator(
    const Grid& grid, const std::vector<double>& cluster_masses, double c, double G,
    const std::function<double(const double*)>& intercluster_potential,
    double softcore, double dt, bool relativistic = true);

double effective_energy(const Propagator& prop, const GridState& psi,
                        const std::vector<double>& cluster_masses, double c, double G,
                        const std::function<double(const double*)>& intercluster_potential,
                        double softcore, bool relativistic = true);

// Finite tensor-product model H = H_L x 1 + 1 x H_E + I_int. The witness is
// ||(1 - P_L) P|| with P the ground-state projection of H (degenerate ground
// spaces flagged and included whole) and P_L the spectral projection of
// H_L x 1 onto the H_L eigenvalue with the largest ground-state overlap.
struct FiniteModel {
    Eigen::MatrixXd h_system;       // H_L
    Eigen::MatrixXd h_environment;  // H_E
    Eigen::MatrixXd interaction;    // on the tensor product, symmetric
};

struct WitnessReport {
    double witness = 0.0;       // ||(1 - P_L) P||
    double commutator = 0.0;    // ||[P_L, P]||
    bool degenerate = false;
    int ground_multiplicity = 1;
};

WitnessReport local_motion_witness(const FiniteModel& model, double degeneracy_tol = 1e-10);

}  // namespace scatterlab
