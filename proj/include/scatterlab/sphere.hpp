#pragma once

#include <array>

#include "scatterlab/common.hpp"

namespace scatterlab {

// Quadrature nodes on S^{m-1}. Weights carry the surface measure: they sum
// to 2 (counting measure on S^0), 2*pi (S^1), 4*pi (S^2).
struct DirectionSet {
    int dim = 3;
    std::vector<std::array<double, 3>> dirs;
    std::vector<double> weights;
    std::size_t size() const { return dirs.size(); }
};

// m=1: the two points {+1,-1}. m=2: `count` uniform angles. m=3: the
// smallest Lebedev-style octahedral table with at least `count` nodes
// (6, 14, 26 or 38).
DirectionSet sphere_directions(int m, int count);

// m=3 product rule: Gauss-Legendre in cos(theta) x uniform in phi,
// exact for spherical polynomials of degree <= min(2*ntheta-1, nphi-1).
DirectionSet sphere_product_grid(int ntheta, int nphi);

// Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Legendre polynomials P_0..P_lmax at x, by recurrence.
void legendre_all(int lmax, double x, double* out);

}  // namespace scatterlab
