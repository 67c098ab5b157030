#pragma once

#include <array>
#include <functional>

#include "scatterlab/common.hpp"

namespace scatterlab {

// Uniform periodic grid on [-L, L)^m with the dual momentum lattice
// xi_k = 2*pi*hbar*k / (n*dx), k in [-n/2, n/2). The per-axis point count is
// required to be a power of two; dx * dxi * n = 2*pi*hbar holds exactly.
struct Grid {
    int dim = 1;
    int points = 0;          // per axis, power of two
    double half_extent = 0;  // L
    double hbar = 1.0;

    Grid() = default;
    Grid(int m, int n, double L, double hb = 1.0);

    double dx() const { return 2.0 * half_extent / points; }
    double dxi() const { return 2.0 * kPi * hbar / (points * dx()); }
    double xi_max() const { return kPi * hbar / dx(); }
    std::size_t size() const;

    double x(int j) const { return -half_extent + j * dx(); }
    double xi(int k) const {
        int kk = (k < points / 2) ? k : k - points;
        return kk * dxi();
    }
    // decode a flat row-major index into per-axis indices
    void unflatten(std::size_t idx, int* out) const;

    bool operator==(const Grid& o) const {
        return dim == o.dim && points == o.points &&
               half_extent == o.half_extent && hbar == o.hbar;
    }
};

// Sampled complex wavefunction. `momentum` marks momentum-space data; the
// quadrature cell volume (and hence the norm) follows the active lattice.
struct GridState {
    Grid grid;
    bool momentum = false;
    std::vector<cplx> values;

    GridState() = default;
    explicit GridState(const Grid& g, bool mom = false)
        : grid(g), momentum(mom), values(g.size(), cplx(0.0)) {}

    double cell() const;
    double norm2() const;
    double norm() const { return std::sqrt(norm2()); }
    cplx inner(const GridState& other) const;  // (f,g) = integral f conj(g)
    GridState& scale(cplx a);
    GridState& operator+=(const GridState& o);
    GridState& operator-=(const GridState& o);
    // mass fraction within `cells` grid cells of the boundary (per axis)
    double boundary_mass(int cells = 4) const;
};

GridState dft(const GridState& state);   // unitary, position -> momentum
GridState idft(const GridState& state);  // inverse

// psi(x) = f(x_vec) sampled on the grid (position space).
GridState sample_state(const Grid& g, const std::function<cplx(const double*)>& f);
// multiply pointwise by a function of x (position) or xi (momentum).
void apply_position_multiplier(GridState& s, const std::function<cplx(const double*)>& f);
void apply_momentum_multiplier(GridState& s, const std::function<cplx(const double*)>& f);

// Seeded band-limited random state: Gaussian momentum amplitudes windowed by
// a smooth band [xi_lo, xi_hi] in |xi|, transformed to position space and
// normalized. Used as probe states throughout.
GridState random_band_state(const Grid& g, Rng& rng, double xi_lo, double xi_hi);

// Smooth transition: 0 for u <= 0, 1 for u >= 1 (C^inf bump integral).
double smoothstep_inf(double u);

// Binary dump: little-endian header (dim, points as int64; L, hbar as f64)
// followed by interleaved re/im f64 in row-major order. CSV: index columns,
// re, im.
void write_state_binary(const GridState& s, const std::string& path);
GridState read_state_binary(const std::string& path);
void write_state_csv(const GridState& s, const std::string& path);

}  // namespace scatterlab
