#pragma once

#include "scatterlab/grid.hpp"
#include "scatterlab/sphere.hpp"

namespace scatterlab {

// exp(-it H0/hbar) with H0 = |p|^2/(2*mass), applied as an exact Fourier
// multiplier. The per-axis-mass variant serves Jacobi grids where axis a
// carries reduced mass mu_a.
GridState free_propagate(const GridState& state, double t, double mass = 1.0);
GridState free_propagate_axes(const GridState& state, double t,
                              const std::vector<double>& axis_masses);

// <H0 psi, psi> for the same kinetic form.
double kinetic_expectation(const GridState& state, const std::vector<double>& axis_masses);

// || <x>^{-s} psi ||
double weighted_norm(const GridState& state, double s);

// F(lambda) psi on a set of directions: the trace of the Fourier transform
// onto the energy sphere |xi| = sqrt(2 lambda), scaled by (2 lambda)^{(m-2)/4}.
struct SphereTrace {
    double lambda = 0.0;
    DirectionSet directions;
    std::vector<cplx> values;
    double norm2() const;  // squared L^2(S^{m-1}) norm under the set's weights
};

// Truncated-Dirichlet (band-limited) interpolation of a momentum-space state
// at an off-lattice point; `stencil` nearest nodes per axis are used.
cplx momentum_interpolate(const GridState& hat, const double* xi, int stencil = 12);

SphereTrace spectral_trace(const GridState& state, double lambda,
                           const DirectionSet& dirs, int stencil = 12);
SphereTrace spectral_trace_hat(const GridState& hat, double lambda,
                               const DirectionSet& dirs, int stencil = 12);

// d/dlambda (E_0(lambda) f, g) via sphere quadrature of F(lambda)f conj(F(lambda)g).
cplx spectral_density(const GridState& f, const GridState& g, double lambda,
                      const DirectionSet& dirs, int stencil = 12);

// Boundary values R_0(mu +- i0) of the free resolvent. The smooth far zone
// is handled by the plain multiplier (1-chi)(lambda)/(lambda-mu); the shell
// zone by a principal-value (pole-subtracted) quadrature over the spectral
// family plus the Poisson-kernel term +- i pi dE0/dlambda(mu).
struct ResolventOptions {
    double window = 0.25;     // shell half-width in energy
    int lambda_nodes = 48;    // quadrature nodes across the shell window
    int trace_dirs = 26;      // direction count for shell traces (m = 1, 2)
    int product_theta = 20;   // m = 3 shell work: Gauss x uniform product grid
    int product_phi = 40;
    int expansion_lmax = 28;  // plane-wave expansion order for point evaluation
    int stencil = 12;
};

GridState free_resolvent_boundary(const GridState& state, double mu, int sign,
                                  const ResolventOptions& opts = {});

// R_0(mu +- i eps) for eps > 0, by the same polar split (quadrature route)
// or by the exact lattice multiplier (independent route).
GridState resolvent_epsilon_polar(const GridState& state, double mu, double eps,
                                  int sign, const ResolventOptions& opts = {});
GridState resolvent_epsilon_multiplier(const GridState& state, double mu,
                                       double eps, int sign);

// Far-field extraction of F(mu) psi(+-omega) from the spatial asymptotics of
// the resolvent: pref(m, sign, mu) * r^{(m-1)/2} e^{-+ i sqrt(2 mu) r}
// (R_0(mu +- i0) psi)(r omega), tabulated over increasing radii.
struct FarFieldRow {
    double radius;
    cplx extracted;
};
struct FarFieldResult {
    std::vector<FarFieldRow> table;
    cplx estimate;  // last row
};
FarFieldResult far_field_extract(const GridState& state, double mu,
                                 const std::array<double, 3>& omega,
                                 const std::vector<double>& radii, int sign,
                                 const ResolventOptions& opts = {});

}  // namespace scatterlab
