#pragma once

#include "scatterlab/spectral.hpp"

namespace scatterlab {

// Strang split-step propagator for H = sum_a p_a^2/(2 mu_a) + V(x).
// Each factor is an exact unit-modulus multiplier, so the norm is conserved
// to rounding; the splitting error is O(dt^2) per unit time.
class Propagator {
  public:
    Propagator(const Grid& grid, std::vector<double> axis_masses,
               std::function<double(const double*)> potential, double dt);

    // custom kinetic multiplier T(xi) sampled on the momentum lattice
    // (relativistic kinetic forms); axis_masses kept as metadata for the
    // velocity-operator measurements
    Propagator(const Grid& grid, std::vector<double> kinetic_table,
               std::vector<double> axis_masses,
               std::function<double(const double*)> potential, double dt);

    const Grid& grid() const { return grid_; }
    double dt() const { return dt_; }
    const std::vector<double>& axis_masses() const { return axis_masses_; }

    // exp(-i t H / hbar) psi0, t an integral multiple of dt (either sign)
    GridState propagate(const GridState& psi0, double t) const;

    // largest boundary-mass fraction seen by this propagator (diagnostic)
    double max_boundary_mass() const { return max_boundary_mass_; }
    double boundary_warn_threshold = 1e-6;
    mutable std::vector<std::string> warnings;

  private:
    Grid grid_;
    std::vector<double> axis_masses_;
    std::vector<double> potential_values_;  // sampled V on the grid
    std::vector<double> kinetic_values_;    // sampled T(xi) on the lattice
    double dt_;
    mutable double max_boundary_mass_ = 0.0;

    void step(std::vector<cplx>& v, double dt, int nsteps) const;
};

// Table of a nonnegative observable against time with a log-log slope fit.
struct DecayTable {
    std::vector<double> times;
    std::vector<double> values;
    double fitted_slope = 0.0;
    double fit_tmin = 0.0, fit_tmax = 0.0;

    void fit(double tmin, double tmax);
};

void write_decay_csv(const DecayTable& t, const std::string& path);

// || (x/t - v) psi(t) || in the mass-weighted metric, sampled at the given
// times (all nonzero). For free evolution this equals ||x psi0|| / t exactly.
DecayTable local_time_defect(const Propagator& prop, const GridState& psi0,
                             const std::vector<double>& times);

// <x>(t) and <p>(t) along the evolution.
struct EhrenfestRow {
    double t;
    std::vector<double> x_mean;
    std::vector<double> p_mean;
};
std::vector<EhrenfestRow> ehrenfest_track(const Propagator& prop, const GridState& psi0,
                                          const std::vector<double>& times);

// Propagation-estimate families (free evolution):
//   WeightWeight    : || <x>^{-s} q(D) e^{-itH0} <x>^{-s} phi ||      (decay t^-s)
//   WeightOutgoing  : || <x>^{-s} e^{-itH0} P_+ <x>^{delta} phi ||    (t^{-s+delta})
//   IncomingOutgoing: || <x>^{delta} P_- e^{-itH0} P_+ <x>^{delta} phi || (t^-s, any s)
enum class PropagationFamily { WeightWeight, WeightOutgoing, IncomingOutgoing };

struct SymbolSpec {
    PropagationFamily family = PropagationFamily::WeightWeight;
    double s = 1.0;       // weight exponent
    double delta = 0.0;   // auxiliary weight exponent
    double theta = 0.0;   // cone center, in (-1, 1)
    double rho = 0.5;     // cone margin, theta +- rho within (-1, 1)
    double sigma = 0.3;   // dead zone |x| < sigma, |xi| < sigma
    double band_hi = 2.0; // probe momentum band upper edge
    int probes = 16;
    std::uint64_t seed = 2024;
};

DecayTable propagation_decay(const Grid& grid, const SymbolSpec& spec,
                             const std::vector<double>& times);

// psi-do applications used by the decay families (exposed for tests);
// 1-d and 2-d grids only (O(n^2m) direct quadrature).
GridState apply_outgoing_symbol(const GridState& f, double theta, double rho,
                                double sigma);  // right symbol p_+(xi, y)
GridState apply_incoming_symbol(const GridState& f, double theta, double rho,
                                double sigma);  // left symbol p_-(x, xi)

// Lowest k eigenpairs of the discretized H on a 1-d grid (dense, n <= 4096).
struct EigenPair {
    double energy;
    GridState state;
};
std::vector<EigenPair> lowest_eigenstates(const Grid& grid, double mass,
                                          const std::function<double(double)>& v,
                                          int k);

// Iterative variant for large grids: imaginary-time block iteration with
// Rayleigh-Ritz extraction; any dimension, FFT-based applies.
std::vector<EigenPair> lowest_eigenstates_iterative(
    const Grid& grid, const std::vector<double>& axis_masses,
    const std::function<double(const double*)>& v, int k, double tol = 1e-9,
    int max_sweeps = 4000);

// Remove the projection onto the given states (Gram-Schmidt style).
GridState project_off(const GridState& psi, const std::vector<EigenPair>& bound);

}  // namespace scatterlab
