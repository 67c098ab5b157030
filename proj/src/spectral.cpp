#include "scatterlab/spectral.hpp"

#include <cmath>

namespace scatterlab {

namespace {

double lambda_of(const Grid& g, const int* idx) {
    double k2 = 0.0;
    for (int a = 0; a < g.dim; ++a) k2 += sq(g.xi(idx[a]));
    return 0.5 * k2;
}

// smooth shell window: 1 for |lambda-mu| <= w/2, 0 beyond w
double shell_window(double lambda, double mu, double w) {
    double u = (std::abs(lambda - mu) - 0.5 * w) / (0.5 * w);
    return 1.0 - smoothstep_inf(u);
}

void require_hbar1(const Grid& g, const char* who) {
    if (std::abs(g.hbar - 1.0) > 1e-14)
        throw domain_error(std::string(who) + ": grid must use hbar = 1");
}

}  // namespace

GridState free_propagate(const GridState& state, double t, double mass) {
    std::vector<double> ms(state.grid.dim, mass);
    return free_propagate_axes(state, t, ms);
}

GridState free_propagate_axes(const GridState& state, double t,
                              const std::vector<double>& axis_masses) {
    const Grid& g = state.grid;
    if (static_cast<int>(axis_masses.size()) != g.dim)
        throw domain_error("free_propagate_axes: need one mass per axis");
    for (double m : axis_masses)
        if (!(m > 0.0)) throw domain_error("free_propagate_axes: masses must be positive");
    GridState hat = dft(state);
    int idx[3];
    for (std::size_t i = 0; i < hat.values.size(); ++i) {
        g.unflatten(i, idx);
        double e = 0.0;
        for (int a = 0; a < g.dim; ++a) e += sq(g.xi(idx[a])) / (2.0 * axis_masses[a]);
        hat.values[i] *= std::polar(1.0, -t * e / g.hbar);
    }
    return idft(hat);
}

double kinetic_expectation(const GridState& state, const std::vector<double>& axis_masses) {
    const Grid& g = state.grid;
    GridState hat = state.momentum ? state : dft(state);
    double s = 0.0;
    int idx[3];
    for (std::size_t i = 0; i < hat.values.size(); ++i) {
        g.unflatten(i, idx);
        double e = 0.0;
        for (int a = 0; a < g.dim; ++a) e += sq(g.xi(idx[a])) / (2.0 * axis_masses[a]);
        s += e * std::norm(hat.values[i]);
    }
    return s * hat.cell();
}

double weighted_norm(const GridState& state, double s) {
    const Grid& g = state.grid;
    double acc = 0.0;
    int idx[3];
    for (std::size_t i = 0; i < state.values.size(); ++i) {
        g.unflatten(i, idx);
        double x2 = 0.0;
        for (int a = 0; a < g.dim; ++a) x2 += sq(g.x(idx[a]));
        acc += std::pow(1.0 + x2, -s) * std::norm(state.values[i]);
    }
    return std::sqrt(acc * state.cell());
}

double SphereTrace::norm2() const {
    double s = 0.0;
    for (std::size_t q = 0; q < values.size(); ++q)
        s += directions.weights[q] * std::norm(values[q]);
    return s;
}

cplx momentum_interpolate(const GridState& hat, const double* xi, int stencil) {
    if (!hat.momentum) throw domain_error("momentum_interpolate: need momentum-space state");
    const Grid& g = hat.grid;
    const int n = g.points;
    const int half = stencil / 2;

    // The continuum-normalized transform psi_hat(xi) is a trigonometric
    // polynomial in xi with frequencies x_j in [-L, L) — a symmetric band —
    // and it is n-periodic in kappa = xi/dxi. Its lattice samples therefore
    // interpolate exactly with the even-n Dirichlet kernel; truncate to the
    // `stencil` nearest nodes per axis.
    double kappa[3];
    int base[3];
    for (int a = 0; a < g.dim; ++a) {
        kappa[a] = xi[a] / g.dxi();
        if (std::abs(xi[a]) >= g.xi_max())
            throw range_error("momentum_interpolate: point outside momentum lattice");
        base[a] = static_cast<int>(std::floor(kappa[a])) - (half - 1);
    }
    // Local Lagrange weights on the `stencil` nearest nodes. Plain truncated
    // Dirichlet has O(1/stencil) sidelobes; the polynomial weights reproduce
    // degree < stencil exactly, which is what smooth transforms need.
    std::vector<double> w[3];
    for (int a = 0; a < g.dim; ++a) {
        w[a].resize(stencil);
        for (int t = 0; t < stencil; ++t) {
            double p = 1.0;
            for (int u = 0; u < stencil; ++u)
                if (u != t) p *= (kappa[a] - (base[a] + u)) / double(t - u);
            w[a][t] = p;
        }
    }

    cplx acc = 0.0;
    int cnt[3] = {0, 0, 0};
    const int dims = g.dim;
    while (true) {
        double wprod = 1.0;
        std::size_t flat = 0;
        for (int a = 0; a < dims; ++a) {
            int k = ((base[a] + cnt[a]) % n + n) % n;
            wprod *= w[a][cnt[a]];
            flat = flat * n + static_cast<std::size_t>(k);
        }
        acc += wprod * hat.values[flat];
        int a = dims - 1;
        for (; a >= 0; --a) {
            if (++cnt[a] < stencil) break;
            cnt[a] = 0;
        }
        if (a < 0) break;
    }
    return acc;
}

SphereTrace spectral_trace_hat(const GridState& hat, double lambda,
                               const DirectionSet& dirs, int stencil) {
    const Grid& g = hat.grid;
    if (!(lambda > 0.0)) throw domain_error("spectral_trace: lambda must be positive");
    if (dirs.dim != g.dim) throw domain_error("spectral_trace: direction dim mismatch");
    double k = std::sqrt(2.0 * lambda);
    if (k >= g.xi_max()) throw range_error("spectral_trace: sqrt(2 lambda) outside momentum lattice");
    SphereTrace tr;
    tr.lambda = lambda;
    tr.directions = dirs;
    tr.values.resize(dirs.size());
    double pref = std::pow(2.0 * lambda, 0.25 * (g.dim - 2));
    for (std::size_t q = 0; q < dirs.size(); ++q) {
        double xi[3] = {0, 0, 0};
        for (int a = 0; a < g.dim; ++a) xi[a] = k * dirs.dirs[q][a];
        tr.values[q] = pref * momentum_interpolate(hat, xi, stencil);
    }
    return tr;
}

SphereTrace spectral_trace(const GridState& state, double lambda,
                           const DirectionSet& dirs, int stencil) {
    return spectral_trace_hat(state.momentum ? state : dft(state), lambda, dirs, stencil);
}

cplx spectral_density(const GridState& f, const GridState& g, double lambda,
                      const DirectionSet& dirs, int stencil) {
    SphereTrace tf = spectral_trace(f, lambda, dirs, stencil);
    SphereTrace tg = spectral_trace(g, lambda, dirs, stencil);
    cplx s = 0.0;
    for (std::size_t q = 0; q < dirs.size(); ++q)
        s += dirs.weights[q] * tf.values[q] * std::conj(tg.values[q]);
    return s;
}

namespace {

// dE0/dlambda(lambda) psi = F(lambda)* F(lambda) psi on the whole grid,
// by direct summation over the trace directions.
GridState field_from_trace(const Grid& g, const SphereTrace& tr) {
    GridState out(g);
    double k = std::sqrt(2.0 * tr.lambda);
    double pref = std::pow(2.0 * tr.lambda, 0.25 * (g.dim - 2)) /
                  std::pow(2.0 * kPi * g.hbar, 0.5 * g.dim);
    int idx[3];
    double xv[3];
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        g.unflatten(i, idx);
        for (int a = 0; a < g.dim; ++a) xv[a] = g.x(idx[a]);
        cplx acc = 0.0;
        for (std::size_t q = 0; q < tr.directions.size(); ++q) {
            double xw = 0.0;
            for (int a = 0; a < g.dim; ++a) xw += xv[a] * tr.directions.dirs[q][a];
            acc += tr.directions.weights[q] * tr.values[q] *
                   std::polar(1.0, k * xw / g.hbar);
        }
        out.values[i] = pref * acc;
    }
    return out;
}

DirectionSet shell_directions(const Grid& g, const ResolventOptions& o) {
    if (g.dim == 3) return sphere_product_grid(o.product_theta, o.product_phi);
    return sphere_directions(g.dim, o.trace_dirs);
}

struct ShellData {
    std::vector<double> nodes, wts;  // Gauss-Legendre on [mu-w, mu+w]
    std::vector<SphereTrace> traces;
    SphereTrace trace_mu;
};

ShellData shell_traces(const GridState& hat, double mu, const ResolventOptions& o) {
    const Grid& g = hat.grid;
    double w = o.window;
    if (!(mu - w > 0.0))
        throw range_error("resolvent: shell window extends below zero energy");
    if (0.5 * sq(std::sqrt(2.0 * (mu + w))) >= sq(g.xi_max()) / 2.0 * 0.999)
        ;  // upper check handled by spectral_trace itself
    ShellData sd;
    std::vector<double> gn, gw;
    gauss_legendre(o.lambda_nodes, gn, gw);
    DirectionSet dirs = shell_directions(g, o);
    for (int q = 0; q < o.lambda_nodes; ++q) {
        sd.nodes.push_back(mu + w * gn[q]);
        sd.wts.push_back(w * gw[q]);
        sd.traces.push_back(spectral_trace_hat(hat, sd.nodes.back(), dirs, o.stencil));
    }
    sd.trace_mu = spectral_trace_hat(hat, mu, dirs, o.stencil);
    return sd;
}

GridState resolvent_core(const GridState& state, double mu, cplx shift, int sign,
                         const ResolventOptions& o, bool boundary) {
    const Grid& g = state.grid;
    require_hbar1(g, "free_resolvent_boundary");
    if (!(mu > 0.0)) throw domain_error("resolvent: mu must be positive");
    if (sign != 1 && sign != -1) throw domain_error("resolvent: sign must be +-1");
    GridState hat = dft(state);

    // far zone: smooth multiplier
    GridState far = hat;
    int idx[3];
    for (std::size_t i = 0; i < far.values.size(); ++i) {
        g.unflatten(i, idx);
        double lam = lambda_of(g, idx);
        double a = 1.0 - shell_window(lam, mu, o.window);
        cplx den = boundary ? cplx(lam - mu, 0.0) : (lam - mu - shift);
        far.values[i] = (a == 0.0) ? cplx(0.0) : far.values[i] * a / den;
    }
    GridState out = idft(far);

    // shell zone: pole-subtracted quadrature over the spectral family
    ShellData sd = shell_traces(hat, mu, o);
    GridState field_mu = field_from_trace(g, sd.trace_mu);
    const double w = o.window;
    for (int q = 0; q < static_cast<int>(sd.nodes.size()); ++q) {
        double lam = sd.nodes[q];
        double chi = shell_window(lam, mu, w);
        GridState fq = field_from_trace(g, sd.traces[q]);
        cplx den = boundary ? cplx(lam - mu, 0.0) : (lam - mu - shift);
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            cplx num = chi * fq.values[i] - field_mu.values[i];
            out.values[i] += sd.wts[q] * num / den;
        }
    }
    cplx tail;
    if (boundary) {
        tail = cplx(0.0, sign * kPi);  // PV over the symmetric window vanishes
    } else {
        tail = std::log(cplx(w, 0.0) - shift) - std::log(cplx(-w, 0.0) - shift);
    }
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] += tail * field_mu.values[i];
    return out;
}

}  // namespace

GridState free_resolvent_boundary(const GridState& state, double mu, int sign,
                                  const ResolventOptions& opts) {
    return resolvent_core(state, mu, cplx(0.0), sign, opts, true);
}

GridState resolvent_epsilon_polar(const GridState& state, double mu, double eps,
                                  int sign, const ResolventOptions& opts) {
    if (!(eps > 0.0)) throw domain_error("resolvent_epsilon: eps must be positive");
    return resolvent_core(state, mu, cplx(0.0, sign * eps), sign, opts, false);
}

GridState resolvent_epsilon_multiplier(const GridState& state, double mu,
                                       double eps, int sign) {
    const Grid& g = state.grid;
    require_hbar1(g, "resolvent_epsilon_multiplier");
    if (!(eps > 0.0)) throw domain_error("resolvent_epsilon: eps must be positive");
    GridState hat = dft(state);
    int idx[3];
    for (std::size_t i = 0; i < hat.values.size(); ++i) {
        g.unflatten(i, idx);
        double lam = lambda_of(g, idx);
        hat.values[i] /= (lam - mu - cplx(0.0, sign * eps));
    }
    return idft(hat);
}

namespace {

// integral over S^{m-1} of e^{i k x0.omega} T(omega) domega via the
// plane-wave (Jacobi-Anger / Rayleigh) expansion; exact for smooth traces.
cplx oscillatory_sphere_integral(const SphereTrace& tr, double k,
                                 const double* x0, int m, int lmax) {
    double r0 = 0.0;
    for (int a = 0; a < m; ++a) r0 += sq(x0[a]);
    r0 = std::sqrt(r0);
    if (r0 < 1e-14) {
        cplx s = 0.0;
        for (std::size_t q = 0; q < tr.directions.size(); ++q)
            s += tr.directions.weights[q] * tr.values[q];
        return s;
    }
    double xhat[3] = {x0[0] / r0, 0, 0};
    for (int a = 1; a < m; ++a) xhat[a] = x0[a] / r0;
    const double z = k * r0;

    if (m == 3) {
        // coefficients c_l = sum_q w_q P_l(xhat.omega_q) T_q
        std::vector<cplx> cl(lmax + 1, cplx(0.0));
        std::vector<double> pl(lmax + 1);
        for (std::size_t q = 0; q < tr.directions.size(); ++q) {
            double c = 0.0;
            for (int a = 0; a < 3; ++a) c += xhat[a] * tr.directions.dirs[q][a];
            c = std::min(1.0, std::max(-1.0, c));
            legendre_all(lmax, c, pl.data());
            for (int l = 0; l <= lmax; ++l)
                cl[l] += tr.directions.weights[q] * pl[l] * tr.values[q];
        }
        cplx s = 0.0;
        for (int l = 0; l <= lmax; ++l) {
            cplx il = std::polar(1.0, 0.5 * kPi * l);
            s += il * double(2 * l + 1) * std::sph_bessel(unsigned(l), z) * cl[l];
        }
        return s;
    }
    // m == 2
    double th0 = std::atan2(xhat[1], xhat[0]);
    cplx s = 0.0;
    for (int l = -lmax; l <= lmax; ++l) {
        cplx coeff = 0.0;
        for (std::size_t q = 0; q < tr.directions.size(); ++q) {
            double thq = std::atan2(tr.directions.dirs[q][1], tr.directions.dirs[q][0]);
            coeff += tr.directions.weights[q] * tr.values[q] *
                     std::polar(1.0, l * (thq - th0));
        }
        int la = std::abs(l);
        double J = std::cyl_bessel_j(double(la), z);
        if (l < 0 && (la & 1)) J = -J;
        s += std::polar(1.0, 0.5 * kPi * l) * J * coeff;
    }
    return s;
}

cplx shell_field_at(const Grid& g, const SphereTrace& tr, const double* x0, int lmax) {
    double k = std::sqrt(2.0 * tr.lambda);
    double pref = std::pow(2.0 * tr.lambda, 0.25 * (g.dim - 2)) /
                  std::pow(2.0 * kPi * g.hbar, 0.5 * g.dim);
    return pref * oscillatory_sphere_integral(tr, k / g.hbar, x0, g.dim, lmax);
}

}  // namespace

FarFieldResult far_field_extract(const GridState& state, double mu,
                                 const std::array<double, 3>& omega,
                                 const std::vector<double>& radii, int sign,
                                 const ResolventOptions& opts) {
    const Grid& g = state.grid;
    require_hbar1(g, "far_field_extract");
    if (g.dim < 2) throw domain_error("far_field_extract: needs m >= 2");
    if (sign != 1 && sign != -1) throw domain_error("far_field_extract: sign must be +-1");
    if (radii.empty()) throw domain_error("far_field_extract: empty radius list");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (i && !(radii[i] > radii[i - 1]))
            throw domain_error("far_field_extract: radii must increase");
        if (radii[i] >= g.half_extent)
            throw range_error("far_field_extract: radius beyond trusted region");
    }
    double on = std::sqrt(sq(omega[0]) + sq(omega[1]) + sq(omega[2]));
    if (std::abs(on - 1.0) > 1e-10) throw domain_error("far_field_extract: omega not unit");

    GridState hat = dft(state);
    ShellData sd = shell_traces(hat, mu, opts);

    const double w = opts.window;
    const double kmu = std::sqrt(2.0 * mu);
    const cplx pref = std::pow(2.0 * kPi, -0.5) *
                      std::polar(1.0, sign * (g.dim - 3) * kPi / 4.0) *
                      std::pow(2.0 * mu, 0.25);

    FarFieldResult out;
    int idx[3];
    for (double r : radii) {
        double x0[3] = {r * omega[0], r * omega[1], r * omega[2]};
        // far zone by direct lattice summation (smooth integrand, rapid decay)
        cplx far = 0.0;
        for (std::size_t i = 0; i < hat.values.size(); ++i) {
            g.unflatten(i, idx);
            double lam = lambda_of(g, idx);
            double a = 1.0 - shell_window(lam, mu, w);
            if (a == 0.0) continue;
            double ph = 0.0;
            for (int ax = 0; ax < g.dim; ++ax) ph += g.xi(idx[ax]) * x0[ax];
            far += hat.values[i] * a / (lam - mu) * std::polar(1.0, ph / g.hbar);
        }
        far *= hat.cell() / std::pow(2.0 * kPi * g.hbar, 0.5 * g.dim);

        cplx fmu = shell_field_at(g, sd.trace_mu, x0, opts.expansion_lmax);
        cplx shell = cplx(0.0, sign * kPi) * fmu;
        for (std::size_t q = 0; q < sd.nodes.size(); ++q) {
            double lam = sd.nodes[q];
            double chi = shell_window(lam, mu, w);
            cplx fq = shell_field_at(g, sd.traces[q], x0, opts.expansion_lmax);
            shell += sd.wts[q] * (chi * fq - fmu) / (lam - mu);
        }

        cplx res = far + shell;
        cplx extracted = pref * std::pow(r, 0.5 * (g.dim - 1)) *
                         std::polar(1.0, -sign * kmu * r) * res;
        out.table.push_back({r, extracted});
    }
    out.estimate = out.table.back().extracted;
    return out;
}

}  // namespace scatterlab
