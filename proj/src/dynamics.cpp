#include "scatterlab/dynamics.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <cstdio>
#include <fstream>

namespace scatterlab {

Propagator::Propagator(const Grid& grid, std::vector<double> axis_masses,
                       std::function<double(const double*)> potential, double dt)
    : grid_(grid), axis_masses_(std::move(axis_masses)), dt_(dt) {
    if (static_cast<int>(axis_masses_.size()) != grid_.dim)
        throw domain_error("Propagator: need one mass per axis");
    if (!(dt > 0.0)) throw domain_error("Propagator: dt must be positive");
    potential_values_.resize(grid_.size());
    kinetic_values_.resize(grid_.size());
    int idx[3];
    double xv[3];
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        grid_.unflatten(i, idx);
        for (int a = 0; a < grid_.dim; ++a) xv[a] = grid_.x(idx[a]);
        potential_values_[i] = potential ? potential(xv) : 0.0;
        double e = 0.0;
        for (int a = 0; a < grid_.dim; ++a)
            e += sq(grid_.xi(idx[a])) / (2.0 * axis_masses_[a]);
        kinetic_values_[i] = e;
    }
}

Propagator::Propagator(const Grid& grid, std::vector<double> kinetic_table,
                       std::vector<double> axis_masses,
                       std::function<double(const double*)> potential, double dt)
    : grid_(grid), axis_masses_(std::move(axis_masses)), dt_(dt) {
    if (kinetic_table.size() != grid_.size())
        throw domain_error("Propagator: kinetic table size mismatch");
    if (!(dt > 0.0)) throw domain_error("Propagator: dt must be positive");
    kinetic_values_ = std::move(kinetic_table);
    potential_values_.resize(grid_.size());
    int idx[3];
    double xv[3];
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        grid_.unflatten(i, idx);
        for (int a = 0; a < grid_.dim; ++a) xv[a] = grid_.x(idx[a]);
        potential_values_[i] = potential ? potential(xv) : 0.0;
    }
}

void Propagator::step(std::vector<cplx>& v, double dt, int nsteps) const {
    if (nsteps == 0) return;
    const double hb = grid_.hbar;
    const std::size_t n = v.size();
    std::vector<cplx> vhalf(n), kfull(n);
    for (std::size_t i = 0; i < n; ++i) {
        vhalf[i] = std::polar(1.0, -0.5 * dt * potential_values_[i] / hb);
        kfull[i] = std::polar(1.0, -dt * kinetic_values_[i] / hb);
    }
    int nn[3] = {grid_.points, grid_.points, grid_.points};
    fftw_plan fwd = fftw_plan_dft(grid_.dim, nn, reinterpret_cast<fftw_complex*>(v.data()),
                                  reinterpret_cast<fftw_complex*>(v.data()),
                                  FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft(grid_.dim, nn, reinterpret_cast<fftw_complex*>(v.data()),
                                  reinterpret_cast<fftw_complex*>(v.data()),
                                  FFTW_BACKWARD, FFTW_ESTIMATE);
    const double invn = 1.0 / static_cast<double>(n);
    for (int s = 0; s < nsteps; ++s) {
        for (std::size_t i = 0; i < n; ++i) v[i] *= vhalf[i];
        fftw_execute(fwd);
        for (std::size_t i = 0; i < n; ++i) v[i] *= kfull[i] * invn;
        fftw_execute(bwd);
        for (std::size_t i = 0; i < n; ++i) v[i] *= vhalf[i];
    }
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
}

GridState Propagator::propagate(const GridState& psi0, double t) const {
    if (!(psi0.grid == grid_)) throw domain_error("propagate: grid mismatch");
    if (psi0.momentum) throw domain_error("propagate: need a position-space state");
    double steps_real = t / dt_;
    long steps = std::lround(steps_real);
    if (std::abs(steps_real - steps) > 1e-9)
        throw domain_error("propagate: t must be an integral multiple of dt");
    GridState out = psi0;
    step(out.values, steps >= 0 ? dt_ : -dt_, static_cast<int>(std::abs(steps)));
    double bm = out.boundary_mass(4);
    max_boundary_mass_ = std::max(max_boundary_mass_, bm);
    if (bm > boundary_warn_threshold) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "boundary mass %.3e at t=%.6g", bm, t);
        warnings.push_back(buf);
    }
    return out;
}

void DecayTable::fit(double tmin, double tmax) {
    SlopeFit f = fit_loglog_slope(times, values, tmin, tmax);
    fitted_slope = f.slope;
    fit_tmin = tmin;
    fit_tmax = tmax;
}

void write_decay_csv(const DecayTable& t, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw config_error("write_decay_csv: cannot open " + path);
    f << "t,value\r\n";
    char buf[96];
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\r\n", t.times[i], t.values[i]);
        f << buf;
    }
    std::snprintf(buf, sizeof(buf), "# fittedSlope=%.6f window=[%g%s%g]\r\n",
                  t.fitted_slope, t.fit_tmin, ";", t.fit_tmax);
    f << buf;
}

namespace {

// || (x/t - v) psi || in the mass metric: sum_a mu_a ||(x_a/t - p_a/mu_a) psi||^2
double defect_norm(const GridState& psi, double t, const std::vector<double>& mu) {
    const Grid& g = psi.grid;
    GridState hat = dft(psi);
    double acc = 0.0;
    for (int a = 0; a < g.dim; ++a) {
        // (x_a/t) psi in position space
        GridState xpart = psi;
        int idx[3];
        for (std::size_t i = 0; i < xpart.values.size(); ++i) {
            g.unflatten(i, idx);
            xpart.values[i] *= g.x(idx[a]) / t;
        }
        // (p_a/mu_a) psi via momentum multiplier
        GridState vhat = hat;
        for (std::size_t i = 0; i < vhat.values.size(); ++i) {
            g.unflatten(i, idx);
            vhat.values[i] *= g.xi(idx[a]) / mu[a];
        }
        GridState vpart = idft(vhat);
        xpart -= vpart;
        acc += mu[a] * xpart.norm2();
    }
    return std::sqrt(acc);
}

}  // namespace

DecayTable local_time_defect(const Propagator& prop, const GridState& psi0,
                             const std::vector<double>& times) {
    for (double t : times)
        if (t == 0.0) throw domain_error("local_time_defect: t = 0 excluded");
    DecayTable out;
    for (double t : times) {
        GridState psi = prop.propagate(psi0, t);
        out.times.push_back(t);
        out.values.push_back(defect_norm(psi, t, prop.axis_masses()));
    }
    if (!times.empty()) out.fit(times.front(), times.back());
    return out;
}

std::vector<EhrenfestRow> ehrenfest_track(const Propagator& prop, const GridState& psi0,
                                          const std::vector<double>& times) {
    const Grid& g = prop.grid();
    std::vector<EhrenfestRow> rows;
    for (double t : times) {
        GridState psi = t == 0.0 ? psi0 : prop.propagate(psi0, t);
        GridState hat = dft(psi);
        EhrenfestRow row;
        row.t = t;
        row.x_mean.assign(g.dim, 0.0);
        row.p_mean.assign(g.dim, 0.0);
        int idx[3];
        double n2 = psi.norm2();
        for (std::size_t i = 0; i < psi.values.size(); ++i) {
            g.unflatten(i, idx);
            double w = std::norm(psi.values[i]);
            double wh = std::norm(hat.values[i]);
            for (int a = 0; a < g.dim; ++a) {
                row.x_mean[a] += w * g.x(idx[a]);
                row.p_mean[a] += wh * g.xi(idx[a]);
            }
        }
        for (int a = 0; a < g.dim; ++a) {
            row.x_mean[a] *= psi.cell() / n2;
            row.p_mean[a] *= hat.cell() / n2;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

double cone_cos(const double* x, const double* k, int dim) {
    double xx = 0, kk = 0, xk = 0;
    for (int a = 0; a < dim; ++a) {
        xx += sq(x[a]);
        kk += sq(k[a]);
        xk += x[a] * k[a];
    }
    if (xx == 0.0 || kk == 0.0) return 0.0;
    return xk / std::sqrt(xx * kk);
}

// 0 for r <= sigma, then an erf edge of scale `w` centered 3 widths above
// the clamp, so the clamp jump is erfc(3)/2 ~ 1e-5 of the local amplitude.
// erf edges keep momentum sidebands gaussian-small; C-inf bump edges ring at
// high momentum (Gevrey tails) and those ghosts wrap around a periodic box.
double erf_cut(double r, double sigma, double w) {
    if (r <= sigma) return 0.0;
    return 0.5 * (1.0 + std::erf((r - (sigma + 3.0 * w)) / w));
}

double radial_cut(double r, double sigma) {
    return erf_cut(r, sigma, 0.5 * sigma);
}

// position-edge and momentum-edge scales for the 1-d symbol windows
constexpr double kEdgeX = 2.5;
constexpr double kEdgeK = 0.15;

void check_cone(double theta, double rho, double sigma) {
    if (!(rho > 0.0) || !(theta + rho < 1.0) || !(theta - rho > -1.0))
        throw config_error("symbol spec: need theta+rho < 1 and theta-rho > -1");
    if (!(sigma > 0.0)) throw config_error("symbol spec: need sigma > 0");
}

}  // namespace

namespace {

// In one dimension cos(x, xi) = sign(x xi), so the cone factor takes just
// two values and the quadrature factorizes into two transforms.
GridState outgoing_1d(const GridState& f, double theta, double rho, double sigma) {
    const Grid& g = f.grid;
    double su = smoothstep_inf((1.0 - (theta - rho)) / (2.0 * rho));
    double sd = smoothstep_inf((-1.0 - (theta - rho)) / (2.0 * rho));
    // the position transition must be wide: a scale-w edge rings over
    // momentum ~1/w, which has to stay inside the |xi| < sigma dead zone
    GridState pos = f, neg = f;
    for (int j = 0; j < g.points; ++j) {
        double y = g.x(j);
        double r = erf_cut(std::abs(y), sigma, kEdgeX);
        pos.values[j] *= y > 0 ? r : 0.0;
        neg.values[j] *= y < 0 ? r : 0.0;
    }
    GridState hp = dft(pos), hn = dft(neg);
    GridState hat(g, true);
    for (int k = 0; k < g.points; ++k) {
        double xi = g.xi(k);
        double c = erf_cut(std::abs(xi), sigma, kEdgeK);
        // cos(y, xi) = +1 on matching signs, -1 otherwise
        cplx up = xi > 0 ? su * hp.values[k] + sd * hn.values[k]
                         : sd * hp.values[k] + su * hn.values[k];
        hat.values[k] = c * up;
    }
    return idft(hat);
}

GridState incoming_1d(const GridState& f, double theta, double rho, double sigma) {
    const Grid& g = f.grid;
    // psi_-(cos) = smoothstep((theta + rho - cos)/(2 rho))
    double su = smoothstep_inf(((theta + rho) - 1.0) / (2.0 * rho));
    double sd = smoothstep_inf(((theta + rho) + 1.0) / (2.0 * rho));
    GridState hat = dft(f);
    GridState hp = hat, hn = hat;
    for (int k = 0; k < g.points; ++k) {
        double xi = g.xi(k);
        double c = erf_cut(std::abs(xi), sigma, kEdgeK);
        hp.values[k] *= xi > 0 ? c : 0.0;
        hn.values[k] *= xi < 0 ? c : 0.0;
    }
    GridState fp = idft(hp), fn = idft(hn);
    GridState out(g);
    for (int j = 0; j < g.points; ++j) {
        double x = g.x(j);
        double r = erf_cut(std::abs(x), sigma, kEdgeX);
        cplx v = x > 0 ? su * fp.values[j] + sd * fn.values[j]
                       : sd * fp.values[j] + su * fn.values[j];
        out.values[j] = r * v;
    }
    return out;
}

}  // namespace

GridState apply_outgoing_symbol(const GridState& f, double theta, double rho,
                                double sigma) {
    check_cone(theta, rho, sigma);
    const Grid& g = f.grid;
    if (g.dim > 2) throw domain_error("apply_outgoing_symbol: dim 1 or 2 only");
    if (g.dim == 1) return outgoing_1d(f, theta, rho, sigma);
    const int n = g.points;
    (void)n;
    const std::size_t sz = g.size();
    // right symbol: g(xi) = (2 pi hbar)^{-m/2} int e^{-i y xi / hbar} p_+(xi, y) f(y) dy
    GridState hat(g, true);
    int idx[3], jdx[3];
    double kv[3], yv[3];
    double cellx = std::pow(g.dx(), g.dim);
    for (std::size_t ik = 0; ik < sz; ++ik) {
        g.unflatten(ik, idx);
        double kk = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            kv[a] = g.xi(idx[a]);
            kk += sq(kv[a]);
        }
        double kcut = radial_cut(std::sqrt(kk), sigma);
        if (kcut == 0.0) continue;
        cplx acc = 0.0;
        for (std::size_t jy = 0; jy < sz; ++jy) {
            g.unflatten(jy, jdx);
            double yy = 0.0, yk = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                yv[a] = g.x(jdx[a]);
                yy += sq(yv[a]);
                yk += yv[a] * kv[a];
            }
            double p = radial_cut(std::sqrt(yy), sigma) *
                       smoothstep_inf((cone_cos(yv, kv, g.dim) - (theta - rho)) /
                                      (2.0 * rho));
            if (p == 0.0) continue;
            acc += p * f.values[jy] * std::polar(1.0, -yk / g.hbar);
        }
        hat.values[ik] = kcut * acc * cellx / std::pow(2.0 * kPi * g.hbar, 0.5 * g.dim);
    }
    return idft(hat);
}

GridState apply_incoming_symbol(const GridState& f, double theta, double rho,
                                double sigma) {
    check_cone(theta, rho, sigma);
    const Grid& g = f.grid;
    if (g.dim > 2) throw domain_error("apply_incoming_symbol: dim 1 or 2 only");
    if (g.dim == 1) return incoming_1d(f, theta, rho, sigma);
    const std::size_t sz = g.size();
    // left symbol: (P_- f)(x) = (2 pi hbar)^{-m/2} int e^{i x xi/hbar} p_-(x, xi) fhat(xi) dxi
    GridState hat = dft(f);
    GridState out(g);
    int idx[3], jdx[3];
    double xv[3], kv[3];
    double cellk = std::pow(g.dxi(), g.dim);
    for (std::size_t ix = 0; ix < sz; ++ix) {
        g.unflatten(ix, idx);
        double xx = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            xv[a] = g.x(idx[a]);
            xx += sq(xv[a]);
        }
        double xcut = radial_cut(std::sqrt(xx), sigma);
        if (xcut == 0.0) continue;
        cplx acc = 0.0;
        for (std::size_t jk = 0; jk < sz; ++jk) {
            g.unflatten(jk, jdx);
            double kk = 0.0, xk = 0.0;
            for (int a = 0; a < g.dim; ++a) {
                kv[a] = g.xi(jdx[a]);
                kk += sq(kv[a]);
                xk += xv[a] * kv[a];
            }
            double p = radial_cut(std::sqrt(kk), sigma) *
                       smoothstep_inf(((theta + rho) - cone_cos(xv, kv, g.dim)) /
                                      (2.0 * rho));
            if (p == 0.0) continue;
            acc += p * hat.values[jk] * std::polar(1.0, xk / g.hbar);
        }
        out.values[ix] = xcut * acc * cellk / std::pow(2.0 * kPi * g.hbar, 0.5 * g.dim);
    }
    return out;
}

namespace {

void apply_weight(GridState& s, double expo) {
    if (expo == 0.0) return;
    const Grid& g = s.grid;
    int idx[3];
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        g.unflatten(i, idx);
        double x2 = 0.0;
        for (int a = 0; a < g.dim; ++a) x2 += sq(g.x(idx[a]));
        s.values[i] *= std::pow(1.0 + x2, 0.5 * expo);
    }
}

void apply_band_multiplier(GridState& s, double sigma, double hi) {
    GridState hat = dft(s);
    const Grid& g = s.grid;
    int idx[3];
    for (std::size_t i = 0; i < hat.values.size(); ++i) {
        g.unflatten(i, idx);
        double k2 = 0.0;
        for (int a = 0; a < g.dim; ++a) k2 += sq(g.xi(idx[a]));
        double k = std::sqrt(k2);
        // wide infrared edge: a scale-w momentum edge convolves position by
        // ~1/w, which must stay small or the Fraunhofer regime starts late
        hat.values[i] *= erf_cut(k, sigma, sigma) *
                         0.5 * (1.0 + std::erf((hi - k) / (0.15 * hi)));
    }
    s = idft(hat);
}

}  // namespace

DecayTable propagation_decay(const Grid& grid, const SymbolSpec& spec,
                             const std::vector<double>& times) {
    check_cone(spec.theta, spec.rho, spec.sigma);
    if (spec.s < 0.0 || spec.delta < 0.0)
        throw config_error("symbol spec: s and delta must be nonnegative");
    Rng rng(spec.seed);
    // Prepared probes. For the weighted family: band-limited random states
    // through the right-hand operator chain. For the cone families: coherent
    // outgoing packets (x0.xi0 > 0, both clear of the dead zones) — sharp
    // phase-space cuts on a 1-d lattice would leak across the |xi| < sigma
    // zone by the uncertainty principle, so the outgoing character is put
    // into the probes and P_+ is applied on top, costing only tail mass.
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double sigma_clearance = 2.0;
    std::vector<GridState> prepared;
    for (int p = 0; p < spec.probes; ++p) {
        GridState phi(grid);
        switch (spec.family) {
            case PropagationFamily::WeightWeight: {
                // compact coherent probes: the dispersive (Fraunhofer) regime
                // starts around t ~ width^2, which must precede the fit window
                double w = 1.0 + 0.5 * uni(rng);
                // clear of the finished infrared edge (~5 sigma) by 3 packet widths
                double kmin = 5.0 * spec.sigma + 3.2 / w;
                double kmax = 0.85 * spec.band_hi;
                if (!(kmax > kmin))
                    throw config_error("propagation_decay: band_hi too low for the probe set");
                double k0 = kmin + (kmax - kmin) * 0.5 * uni(rng);
                double sgn = (p % 2 == 0) ? 1.0 : -1.0;
                double xj = uni(rng) - 0.5;
                phi = sample_state(grid, [&](const double* x) {
                    double u = (x[0] - xj) / w;
                    return std::exp(cplx(-0.5 * u * u, sgn * k0 * x[0] / grid.hbar));
                });
                apply_weight(phi, -spec.s);
                // q(D): band multiplier vanishing below sigma (applied once;
                // it commutes with the free flow)
                apply_band_multiplier(phi, spec.sigma, spec.band_hi);
                break;
            }
            case PropagationFamily::WeightOutgoing:
            case PropagationFamily::IncomingOutgoing: {
                double a = 6.0 + 2.0 * uni(rng);                      // packet width
                // start past the finished position window (sigma + ~4.5 edge widths)
                double x0 = spec.sigma + 4.5 * 2.5 +
                            1.5 * a * (1.0 + 0.3 * uni(rng));
                // keep the momentum content well above the dead-zone edge at
                // 2 sigma, else the cut ringing sets the measurement floor
                double k0 = (0.75 + 0.15 * uni(rng)) * spec.band_hi;
                if (k0 < 2.0 * spec.sigma + 3.0 / a)
                    throw config_error("propagation_decay: band too close to the dead zone");
                double sgn = (p % 2 == 0) ? 1.0 : -1.0;                // both cones
                if (grid.dim != 1)
                    throw domain_error("propagation_decay cone families: 1-d grids");
                phi = sample_state(grid, [&](const double* x) {
                    double u = (x[0] - sgn * x0) / a;
                    return std::exp(cplx(-0.5 * u * u, sgn * k0 * x[0] / grid.hbar));
                });
                apply_weight(phi, spec.delta);
                phi = apply_outgoing_symbol(phi, spec.theta, spec.rho, spec.sigma);
                break;
            }
        }
        double nn = phi.norm();
        if (nn > 1e-14) phi.scale(1.0 / nn);
        prepared.push_back(std::move(phi));
    }

    DecayTable out;
    for (double t : times) {
        double worst = 0.0;
        for (const GridState& phi : prepared) {
            GridState evolved = free_propagate_axes(phi, t, std::vector<double>(grid.dim, 1.0));
            double val = 0.0;
            switch (spec.family) {
                case PropagationFamily::WeightWeight: {
                    GridState w = evolved;
                    apply_weight(w, -spec.s);
                    val = w.norm();
                    break;
                }
                case PropagationFamily::WeightOutgoing: {
                    GridState w = evolved;
                    apply_weight(w, -spec.s);
                    val = w.norm();
                    break;
                }
                case PropagationFamily::IncomingOutgoing: {
                    GridState w = apply_incoming_symbol(evolved, spec.theta, spec.rho,
                                                        spec.sigma);
                    apply_weight(w, spec.delta);
                    val = w.norm();
                    break;
                }
            }
            worst = std::max(worst, val);
        }
        out.times.push_back(t);
        out.values.push_back(worst);
    }
    if (!times.empty()) out.fit(times.front(), times.back());
    return out;
}

std::vector<EigenPair> lowest_eigenstates(const Grid& grid, double mass,
                                          const std::function<double(double)>& v,
                                          int k) {
    if (grid.dim != 1) throw domain_error("lowest_eigenstates: 1-d grids only");
    const int n = grid.points;
    if (n > 4096) throw domain_error("lowest_eigenstates: grid too large for dense solve");
    // kinetic part is a real symmetric circulant; build its first row by DFT
    std::vector<double> trow(n);
    {
        std::vector<cplx> tk(n);
        for (int j = 0; j < n; ++j) tk[j] = sq(grid.xi(j)) / (2.0 * mass);
        fftw_plan plan = fftw_plan_dft(1, &n, reinterpret_cast<fftw_complex*>(tk.data()),
                                       reinterpret_cast<fftw_complex*>(tk.data()),
                                       FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
        for (int j = 0; j < n; ++j) trow[j] = tk[j].real() / n;
    }
    Eigen::MatrixXd h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h(i, j) = trow[((i - j) % n + n) % n];
    for (int i = 0; i < n; ++i) h(i, i) += v(grid.x(i));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    std::vector<EigenPair> out;
    for (int q = 0; q < k && q < n; ++q) {
        EigenPair ep;
        ep.energy = es.eigenvalues()(q);
        ep.state = GridState(grid);
        double nrm = std::sqrt(grid.dx());
        for (int i = 0; i < n; ++i) ep.state.values[i] = es.eigenvectors()(i, q) / nrm;
        out.push_back(std::move(ep));
    }
    return out;
}

std::vector<EigenPair> lowest_eigenstates_iterative(
    const Grid& grid, const std::vector<double>& axis_masses,
    const std::function<double(const double*)>& v, int k, double tol,
    int max_sweeps) {
    const std::size_t n = grid.size();
    // sampled potential and kinetic lattice
    std::vector<double> vv(n), tv(n);
    int idx[3];
    double xv[3];
    for (std::size_t i = 0; i < n; ++i) {
        grid.unflatten(i, idx);
        for (int a = 0; a < grid.dim; ++a) xv[a] = grid.x(idx[a]);
        vv[i] = v(xv);
        double e = 0.0;
        for (int a = 0; a < grid.dim; ++a)
            e += sq(grid.xi(idx[a])) / (2.0 * axis_masses[a]);
        tv[i] = e;
    }
    auto apply_h = [&](const GridState& s) {
        GridState hat = dft(s);
        for (std::size_t i = 0; i < n; ++i) hat.values[i] *= tv[i];
        GridState out = idft(hat);
        for (std::size_t i = 0; i < n; ++i) out.values[i] += vv[i] * s.values[i];
        return out;
    };
    // imaginary-time half-step factors (Strang)
    const double dtau = 0.05;
    std::vector<double> ev(n), et(n);
    for (std::size_t i = 0; i < n; ++i) {
        ev[i] = std::exp(-0.5 * dtau * vv[i]);
        et[i] = std::exp(-dtau * tv[i]);
    }
    auto imag_step = [&](GridState& s) {
        for (std::size_t i = 0; i < n; ++i) s.values[i] *= ev[i];
        GridState hat = dft(s);
        for (std::size_t i = 0; i < n; ++i) hat.values[i] *= et[i];
        s = idft(hat);
        for (std::size_t i = 0; i < n; ++i) s.values[i] *= ev[i];
    };

    Rng rng(777);
    std::normal_distribution<double> gs(0.0, 1.0);
    std::vector<GridState> block;
    for (int q = 0; q < k; ++q) {
        GridState s(grid);
        double x0 = -0.5 * k + q;  // slight symmetry breaking between vectors
        for (std::size_t i = 0; i < n; ++i) {
            grid.unflatten(i, idx);
            double x2 = 0.0, xq = 0.0;
            for (int a = 0; a < grid.dim; ++a) {
                x2 += sq(grid.x(idx[a]));
                xq += grid.x(idx[a]);
            }
            s.values[i] = std::exp(-0.25 * x2) *
                          (std::pow(xq - x0, q) + 0.01 * gs(rng));
        }
        s.scale(1.0 / s.norm());
        block.push_back(std::move(s));
    }

    auto orthonormalize = [&]() {
        for (int q = 0; q < k; ++q) {
            for (int p = 0; p < q; ++p) {
                cplx c = block[q].inner(block[p]);
                for (std::size_t i = 0; i < n; ++i)
                    block[q].values[i] -= c * block[p].values[i];
            }
            block[q].scale(1.0 / block[q].norm());
        }
    };

    double worst = 1e300;
    for (int sweep = 0; sweep < max_sweeps && worst > tol; ++sweep) {
        for (int q = 0; q < k; ++q) imag_step(block[q]);
        orthonormalize();
        if (sweep % 25 == 24 || sweep == max_sweeps - 1) {
            worst = 0.0;
            for (int q = 0; q < k; ++q) {
                GridState h = apply_h(block[q]);
                double lam = h.inner(block[q]).real();
                for (std::size_t i = 0; i < n; ++i)
                    h.values[i] -= lam * block[q].values[i];
                worst = std::max(worst, h.norm());
            }
        }
    }

    // Rayleigh-Ritz in the converged block
    Eigen::MatrixXcd hm(k, k);
    std::vector<GridState> hb;
    for (int q = 0; q < k; ++q) hb.push_back(apply_h(block[q]));
    for (int q = 0; q < k; ++q)
        for (int p = 0; p < k; ++p) hm(p, q) = hb[q].inner(block[p]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hm);
    std::vector<EigenPair> out;
    for (int q = 0; q < k; ++q) {
        EigenPair ep;
        ep.energy = es.eigenvalues()(q);
        ep.state = GridState(grid);
        for (int p = 0; p < k; ++p)
            for (std::size_t i = 0; i < n; ++i)
                ep.state.values[i] += es.eigenvectors()(p, q) * block[p].values[i];
        ep.state.scale(1.0 / ep.state.norm());
        out.push_back(std::move(ep));
    }
    return out;
}

GridState project_off(const GridState& psi, const std::vector<EigenPair>& bound) {
    GridState out = psi;
    for (const EigenPair& b : bound) {
        cplx c = out.inner(b.state);
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] -= c * b.state.values[i];
    }
    return out;
}

}  // namespace scatterlab
