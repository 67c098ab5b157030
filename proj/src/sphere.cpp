#include "scatterlab/sphere.hpp"

#include <cmath>

namespace scatterlab {

namespace {

void push(DirectionSet& ds, double x, double y, double z, double w) {
    ds.dirs.push_back({x, y, z});
    ds.weights.push_back(w);
}

// Octahedral point groups of the Lebedev tables.
void add_vertices(DirectionSet& ds, double w) {
    for (int a = 0; a < 3; ++a)
        for (int s = -1; s <= 1; s += 2) {
            double v[3] = {0, 0, 0};
            v[a] = s;
            push(ds, v[0], v[1], v[2], w);
        }
}

void add_edge_midpoints(DirectionSet& ds, double w) {
    const double c = 1.0 / std::sqrt(2.0);
    for (int a = 0; a < 3; ++a) {
        int b = (a + 1) % 3;
        for (int sa = -1; sa <= 1; sa += 2)
            for (int sb = -1; sb <= 1; sb += 2) {
                double v[3] = {0, 0, 0};
                v[a] = sa * c;
                v[b] = sb * c;
                push(ds, v[0], v[1], v[2], w);
            }
    }
}

void add_corners(DirectionSet& ds, double w) {
    const double c = 1.0 / std::sqrt(3.0);
    for (int sx = -1; sx <= 1; sx += 2)
        for (int sy = -1; sy <= 1; sy += 2)
            for (int sz = -1; sz <= 1; sz += 2) push(ds, sx * c, sy * c, sz * c, w);
}

// (p, q, 0) with all permutations and signs: 24 points.
void add_pq0(DirectionSet& ds, double p, double q, double w) {
    for (int a = 0; a < 3; ++a) {
        int b = (a + 1) % 3;
        for (int sa = -1; sa <= 1; sa += 2)
            for (int sb = -1; sb <= 1; sb += 2) {
                double v[3] = {0, 0, 0};
                v[a] = sa * p;
                v[b] = sb * q;
                push(ds, v[0], v[1], v[2], w);
                v[a] = sa * q;
                v[b] = sb * p;
                push(ds, v[0], v[1], v[2], w);
            }
    }
}

DirectionSet lebedev(int count) {
    DirectionSet ds;
    ds.dim = 3;
    const double fourpi = 4.0 * kPi;
    if (count <= 6) {
        add_vertices(ds, fourpi / 6.0);
    } else if (count <= 14) {
        add_vertices(ds, fourpi * (1.0 / 15.0));
        add_corners(ds, fourpi * (3.0 / 40.0));
    } else if (count <= 26) {
        add_vertices(ds, fourpi * (1.0 / 21.0));
        add_edge_midpoints(ds, fourpi * (4.0 / 105.0));
        add_corners(ds, fourpi * (27.0 / 840.0));
    } else {
        add_vertices(ds, fourpi * (1.0 / 105.0));
        add_corners(ds, fourpi * (9.0 / 280.0));
        const double p = 0.4597008433809831;
        const double q = std::sqrt(1.0 - p * p);
        add_pq0(ds, p, q, fourpi * (1.0 / 35.0));
    }
    return ds;
}

}  // namespace

DirectionSet sphere_directions(int m, int count) {
    DirectionSet ds;
    ds.dim = m;
    if (m == 1) {
        push(ds, 1, 0, 0, 1.0);
        push(ds, -1, 0, 0, 1.0);
    } else if (m == 2) {
        int n = std::max(count, 4);
        for (int k = 0; k < n; ++k) {
            double th = 2.0 * kPi * k / n;
            push(ds, std::cos(th), std::sin(th), 0.0, 2.0 * kPi / n);
        }
    } else if (m == 3) {
        ds = lebedev(count);
    } else {
        throw domain_error("sphere_directions: dim must be 1, 2 or 3");
    }
    return ds;
}

DirectionSet sphere_product_grid(int ntheta, int nphi) {
    std::vector<double> cn, cw;
    gauss_legendre(ntheta, cn, cw);
    DirectionSet ds;
    ds.dim = 3;
    for (int i = 0; i < ntheta; ++i) {
        double ct = cn[i], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        for (int j = 0; j < nphi; ++j) {
            double ph = 2.0 * kPi * j / nphi;
            push(ds, st * std::cos(ph), st * std::sin(ph), ct,
                 cw[i] * 2.0 * kPi / nphi);
        }
    }
    return ds;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton from the Chebyshev-like initial guess
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

void legendre_all(int lmax, double x, double* out) {
    out[0] = 1.0;
    if (lmax >= 1) out[1] = x;
    for (int l = 2; l <= lmax; ++l)
        out[l] = ((2 * l - 1) * x * out[l - 1] - (l - 1) * out[l - 2]) / l;
}

}  // namespace scatterlab
