#include "scatterlab/scattering.hpp"

#include <fstream>

namespace scatterlab {

namespace {

// the cutout profile: 0 for |z| <= 1, 1 for |z| >= 2
double cutout(double z) { return smoothstep_inf(std::abs(z) - 1.0); }

// graded time mesh from 0 toward t (either sign): fine steps early, growing
// linearly once the time cutoff of V_rho has pushed the interaction out
std::vector<double> graded_mesh(double s, double t, double h0) {
    std::vector<double> taus;
    taus.push_back(s);
    double dir = t >= s ? 1.0 : -1.0;
    double tau = s;
    while (dir * (t - tau) > 1e-12) {
        double h = h0 * (1.0 + std::abs(tau) / 10.0);
        h = std::min(h, 0.5);
        if (dir * (t - tau) < h) h = dir * (t - tau);
        tau += dir * h;
        taus.push_back(tau);
    }
    return taus;
}

// cumulative integral of samples f over nodes taus, 4th-order corrected
// trapezoid (endpoint-derivative correction via one-sided differences)
void cumulative_integral(const std::vector<double>& taus,
                         const std::vector<Eigen::VectorXd>& f,
                         std::vector<Eigen::VectorXd>& out) {
    const std::size_t n = taus.size();
    out.resize(n);
    if (n == 0) return;
    out[0] = Eigen::VectorXd::Zero(f[0].size());
    auto deriv = [&](std::size_t i) {
        // non-uniform central (or one-sided) difference
        if (i == 0)
            return ((f[1] - f[0]) / (taus[1] - taus[0])).eval();
        if (i == n - 1)
            return ((f[n - 1] - f[n - 2]) / (taus[n - 1] - taus[n - 2])).eval();
        double hl = taus[i] - taus[i - 1], hr = taus[i + 1] - taus[i];
        return ((f[i + 1] * hl * hl - f[i - 1] * hr * hr +
                 f[i] * (hr * hr - hl * hl)) /
                (hl * hr * (hl + hr)))
            .eval();
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double h = taus[i + 1] - taus[i];
        Eigen::VectorXd seg = 0.5 * h * (f[i] + f[i + 1]) -
                              (h * h / 12.0) * (deriv(i + 1) - deriv(i));
        out[i + 1] = out[i] + seg;
    }
}

double cumulative_scalar(const std::vector<double>& taus, const std::vector<double>& f) {
    const std::size_t n = taus.size();
    if (n < 2) return 0.0;
    auto deriv = [&](std::size_t i) {
        if (i == 0) return (f[1] - f[0]) / (taus[1] - taus[0]);
        if (i == n - 1) return (f[n - 1] - f[n - 2]) / (taus[n - 1] - taus[n - 2]);
        double hl = taus[i] - taus[i - 1], hr = taus[i + 1] - taus[i];
        return (f[i + 1] * hl * hl - f[i - 1] * hr * hr + f[i] * (hr * hr - hl * hl)) /
               (hl * hr * (hl + hr));
    };
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double h = taus[i + 1] - taus[i];
        acc += 0.5 * h * (f[i] + f[i + 1]) - (h * h / 12.0) * (deriv(i + 1) - deriv(i));
    }
    return acc;
}

}  // namespace

OrbitSolver::OrbitSolver(std::function<double(const Eigen::VectorXd&)> v_long,
                         int dim, double rho, double delta0, double delta1,
                         double tol, int max_iter)
    : v_long_(std::move(v_long)),
      dim_(dim),
      rho_(rho),
      delta0_(delta0),
      delta1_(delta1),
      tol_(tol),
      max_iter_(max_iter) {
    if (!(rho_ > 0.0 && rho_ < 1.0)) throw domain_error("OrbitSolver: rho in (0,1)");
    if (dim_ < 1 || dim_ > 3) throw domain_error("OrbitSolver: dim 1..3");
}

double OrbitSolver::v_rho(double t, const Eigen::VectorXd& x) const {
    double r = x.norm();
    double tb = jbracket(t);
    double logb = jbracket(std::log(tb));
    double c = cutout(rho_ * r) * cutout(logb * r / tb);
    if (c == 0.0) return 0.0;
    return v_long_(x) * c;
}

Eigen::VectorXd OrbitSolver::grad_v_rho(double t, const Eigen::VectorXd& x) const {
    // central differences; V_rho is smooth and cheap
    const double h = 1e-6 * (1.0 + x.norm());
    Eigen::VectorXd g(dim_);
    Eigen::VectorXd xp = x, xm = x;
    for (int a = 0; a < dim_; ++a) {
        xp(a) = x(a) + h;
        xm(a) = x(a) - h;
        g(a) = (v_rho(t, xp) - v_rho(t, xm)) / (2.0 * h);
        xp(a) = x(a);
        xm(a) = x(a);
    }
    return g;
}

void OrbitSolver::solve_mesh(double t, double s, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& xi,
                             std::vector<Eigen::VectorXd>& qs,
                             std::vector<Eigen::VectorXd>& ps,
                             std::vector<double>& taus) const {
    if (!((t >= s && s >= 0.0) || (t <= s && s <= 0.0)))
        throw domain_error("orbit: need +-t >= +-s >= 0");
    taus = graded_mesh(s, t, mesh_h0);
    const std::size_t n = taus.size();
    qs.assign(n, y);
    ps.assign(n, xi);
    for (std::size_t i = 0; i < n; ++i) qs[i] = y + (taus[i] - s) * xi;
    if (n < 2) return;

    // Picard iteration applied window by window (flow composition). Over a
    // short window the Volterra map contracts geometrically; iterating the
    // whole horizon at once lets the increments grow like (kappa T)^n / n!
    // before they decay, which destroys accuracy at long horizons.
    const double window = 1.0;
    std::size_t w0 = 0;
    while (w0 + 1 < n) {
        std::size_t w1 = w0 + 1;
        while (w1 + 1 < n && std::abs(taus[w1] - taus[w0]) < window) ++w1;
        const std::size_t wn = w1 - w0 + 1;
        std::vector<double> wt(taus.begin() + w0, taus.begin() + w1 + 1);
        const Eigen::VectorXd y0 = qs[w0];
        const Eigen::VectorXd p0 = ps[w0];
        std::vector<Eigen::VectorXd> wq(wn), wp(wn), grad(wn), ip, iq;
        for (std::size_t i = 0; i < wn; ++i) {
            wq[i] = y0 + (wt[i] - wt[0]) * p0;
            wp[i] = p0;
        }
        bool done = false;
        double prev_inc = 1e300;
        int stalls = 0;
        for (int it = 0; it < max_iter_ && !done; ++it) {
            for (std::size_t i = 0; i < wn; ++i) grad[i] = grad_v_rho(wt[i], wq[i]);
            cumulative_integral(wt, grad, ip);  // int grad V
            std::vector<Eigen::VectorXd> pnew(wn), qnew(wn);
            for (std::size_t i = 0; i < wn; ++i) pnew[i] = p0 - ip[i];
            cumulative_integral(wt, pnew, iq);  // int p
            double inc = 0.0;
            for (std::size_t i = 0; i < wn; ++i) {
                qnew[i] = y0 + iq[i];
                inc = std::max(inc,
                               (qnew[i] - wq[i]).norm() + (pnew[i] - wp[i]).norm());
            }
            wq.swap(qnew);
            wp.swap(pnew);
            // accept on tolerance, or on stagnation at the rounding floor
            stalls = (inc > 0.5 * prev_inc) ? stalls + 1 : 0;
            done = inc < tol_ || (stalls >= 3 && inc < 1e-9);
            prev_inc = inc;
            if (!done && it == max_iter_ - 1)
                throw convergence_error(
                    "orbit: Picard iteration did not contract; reduce rho");
        }
        for (std::size_t i = 0; i < wn; ++i) {
            qs[w0 + i] = wq[i];
            ps[w0 + i] = wp[i];
        }
        w0 = w1;
    }
}

void OrbitSolver::orbit(double t, double s, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& xi, Eigen::VectorXd& q_out,
                        Eigen::VectorXd& p_out) const {
    std::vector<Eigen::VectorXd> qs, ps;
    std::vector<double> taus;
    solve_mesh(t, s, y, xi, qs, ps, taus);
    q_out = qs.back();
    p_out = ps.back();
}

Eigen::VectorXd OrbitSolver::orbit_inverse(double t, double s, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& xi) const {
    // Newton iteration with a finite-difference Jacobian; the plain fixed
    // point eta -> xi - (p - eta) stops contracting for slow orbits where
    // the effective coupling gamma / v^2 approaches one.
    Eigen::VectorXd eta = xi;
    Eigen::VectorXd q, p, qh, ph;
    double prev = 1e300;
    int stalls = 0;
    for (int it = 0; it < max_iter_; ++it) {
        orbit(t, s, x, eta, q, p);
        Eigen::VectorXd res = p - xi;
        double rn = res.norm();
        if (rn < tol_ * (1.0 + xi.norm())) return eta;
        stalls = (rn > 0.5 * prev) ? stalls + 1 : 0;
        if (stalls >= 3 && rn < 1e-9) return eta;  // rounding floor
        prev = rn;
        const double h = 1e-6 * (1.0 + eta.norm());
        Eigen::MatrixXd jac(dim_, dim_);
        for (int a = 0; a < dim_; ++a) {
            Eigen::VectorXd ep = eta;
            ep(a) += h;
            orbit(t, s, x, ep, qh, ph);
            jac.col(a) = (ph - p) / h;
        }
        Eigen::VectorXd step = jac.fullPivLu().solve(res);
        if (!step.allFinite()) step = res;  // fall back to the plain map
        // damped acceptance: halve until the residual does not blow up
        double lam = 1.0;
        for (int back = 0; back < 6; ++back) {
            Eigen::VectorXd trial = eta - lam * step;
            orbit(t, s, x, trial, qh, ph);
            if ((ph - xi).norm() <= rn * (1.0 + 1e-12) || back == 5) {
                eta = trial;
                break;
            }
            lam *= 0.5;
        }
    }
    {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "orbit_inverse: fixed point did not converge (t=%g s=%g |x|=%g |xi|=%g res=%g)",
                      t, s, x.norm(), xi.norm(), prev);
        throw convergence_error(buf);
    }
}

double OrbitSolver::action(double t, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& eta) const {
    std::vector<Eigen::VectorXd> qs, ps;
    std::vector<double> taus;
    solve_mesh(t, 0.0, x, eta, qs, ps, taus);
    std::vector<double> integrand(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) {
        double v = v_rho(taus[i], qs[i]);
        Eigen::VectorXd g = grad_v_rho(taus[i], qs[i]);
        integrand[i] = 0.5 * ps[i].squaredNorm() + v - qs[i].dot(g);
    }
    return x.dot(eta) + cumulative_scalar(taus, integrand);
}

double OrbitSolver::phase_at(double t, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& xi) const {
    Eigen::VectorXd eta_x = orbit_inverse(t, 0.0, x, xi);
    double ax = action(t, x, eta_x);
    std::array<double, 4> key = {t, xi(0), dim_ > 1 ? xi(1) : 0.0,
                                 dim_ > 2 ? xi(2) : 0.0};
    auto it = ref_cache_.find(key);
    double a0;
    if (it != ref_cache_.end()) {
        a0 = it->second;
    } else {
        Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim_);
        Eigen::VectorXd eta_0 = orbit_inverse(t, 0.0, zero, xi);
        a0 = action(t, zero, eta_0);
        if (ref_cache_.size() < 200000) ref_cache_[key] = a0;
    }
    return ax - a0;
}

OrbitSolver::PhaseLimit OrbitSolver::eikonal_phase(const Eigen::VectorXd& x,
                                                   const Eigen::VectorXd& xi,
                                                   int sign, double t_max) const {
    if (sign != 1 && sign != -1) throw domain_error("eikonal_phase: sign +-1");
    // Beyond the orbit horizon the trajectory is straight to
    // O(rho^{d0} <tau>^{-d1}), so the remaining phase integral is evaluated
    // on straight lines: tail(T) = sign * int_{|T|}^inf
    // [V_rho(s tau, x + s tau xi) - V_rho(s tau, s tau xi)] dtau, with the
    // 1/u map making the improper integral a smooth one on (0, 1].
    auto straight_tail = [&](double Tabs) {
        std::vector<double> gn, gw;
        gauss_legendre(128, gn, gw);
        double acc = 0.0;
        for (int q = 0; q < 128; ++q) {
            double u = 0.5 * (1.0 + gn[q]);       // (0,1)
            double wq = 0.5 * gw[q];
            double tau = Tabs / u;
            double t = sign * tau;
            Eigen::VectorXd a = x + t * xi;
            Eigen::VectorXd b = t * xi;
            acc += wq * (v_rho(t, a) - v_rho(t, b)) * Tabs / (u * u);
        }
        return sign * acc;
    };
    double T = sign * t_max;
    double v_full = phase_at(T, x, xi) + straight_tail(t_max);
    PhaseLimit out;
    out.value = v_full;
    if (tail_tolerance >= 1e8) {  // error estimate disabled (cache builds)
        out.tail = 0.0;
        return out;
    }
    double v_half = phase_at(0.5 * T, x, xi) + straight_tail(0.5 * t_max);
    out.tail = std::abs(v_full - v_half);
    if (out.tail > tail_tolerance)
        throw convergence_error("eikonal_phase: tail above tolerance at t_max");
    return out;
}

PhaseFunction::PhaseFunction(std::shared_ptr<OrbitSolver> solver, PhaseParams params)
    : solver_(std::move(solver)), params_(params) {
    if (!(params_.sigma_minus > -1.0 && params_.sigma_minus < params_.sigma_plus &&
          params_.sigma_plus < 1.0))
        throw domain_error("PhaseFunction: need -1 < sigma- < sigma+ < 1");
    if (!(params_.d > 0.0)) throw domain_error("PhaseFunction: need d > 0");
}

double PhaseFunction::phi_pm(const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                             int sign) const {
    return solver_->eikonal_phase(x, xi, sign, params_.t_max).value;
}

double PhaseFunction::glued(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const {
    double xdot = x.dot(xi);
    double xn = x.norm(), kn = xi.norm();
    double radial = cutout(2.0 * kn / params_.d) * cutout(2.0 * xn / params_.r0);
    if (radial == 0.0) return xdot;
    double c = (xn > 0 && kn > 0) ? xdot / (xn * kn) : 0.0;
    double chi_p = smoothstep_inf((c - params_.sigma_minus) /
                                  (params_.sigma_plus - params_.sigma_minus));
    double chi_m = 1.0 - chi_p;
    double corr = 0.0;
    if (chi_p > 0.0) corr += chi_p * (phi_pm(x, xi, +1) - xdot);
    if (chi_m > 0.0) corr += chi_m * (phi_pm(x, xi, -1) - xdot);
    return xdot + radial * corr;
}

double PhaseFunction::eikonal_residual(const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& xi, int sign,
                                       double fd_step) const {
    const int m = solver_->dim();
    Eigen::VectorXd grad(m);
    for (int a = 0; a < m; ++a) {
        Eigen::VectorXd xp = x;
        double v[4];
        const double off[4] = {-2, -1, 1, 2};
        for (int q = 0; q < 4; ++q) {
            xp(a) = x(a) + off[q] * fd_step;
            v[q] = phi_pm(xp, xi, sign);
        }
        grad(a) = (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * fd_step);
    }
    // V_L evaluated directly (not the time-cutoff version)
    double vl = solver_->v_rho(0.0, x);
    // at |x| >= max(2/rho, ...) the cutoffs are 1 and v_rho(0,.) = V_L
    return 0.5 * grad.squaredNorm() + vl - 0.5 * xi.squaredNorm();
}

cplx PhaseFunction::amplitude(const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                              double fd_step) const {
    const int m = solver_->dim();
    double center = glued(x, xi);
    double g2 = 0.0, lap = 0.0;
    for (int a = 0; a < m; ++a) {
        Eigen::VectorXd xp = x, xm = x;
        xp(a) += fd_step;
        xm(a) -= fd_step;
        double vp = glued(xp, xi), vm = glued(xm, xi);
        double d1 = (vp - vm) / (2.0 * fd_step);
        g2 += d1 * d1;
        lap += (vp - 2.0 * center + vm) / (fd_step * fd_step);
    }
    double vl = solver_->v_rho(0.0, x);
    return cplx(0.5 * g2 + vl - 0.5 * xi.squaredNorm(), -0.5 * lap);
}

namespace {

// non-uniform Catmull-Rom style cubic through 4 nodes, evaluated at u
double cubic_interp(const double* xs, const double* ys, double u) {
    // Lagrange cubic on the 4 nodes (smooth enough for the cache's purpose)
    double r = 0.0;
    for (int i = 0; i < 4; ++i) {
        double li = 1.0;
        for (int j = 0; j < 4; ++j)
            if (j != i) li *= (u - xs[j]) / (xs[i] - xs[j]);
        r += li * ys[i];
    }
    return r;
}

}  // namespace

double PhaseFunction::correction(double x, double xi) const {
    Eigen::VectorXd xv(1), kv(1);
    xv << x;
    kv << xi;
    return glued(xv, kv) - x * xi;
}

double PhaseFunction::correction_for_cache(double x, double xi) const {
    // the glue band d/2 < |xi| < d converges slowly (the time cutoff is
    // active for a long while on slow orbits); the cache only needs a
    // smooth bounded phase there, so degrade to the straight-line (Born)
    // phase when the orbit limit fails to converge
    double saved = solver_->tail_tolerance;
    solver_->tail_tolerance = 1e9;
    double out;
    try {
        out = correction(x, xi);
    } catch (const convergence_error&) {
        Eigen::VectorXd xv(1), kv(1);
        xv << x;
        kv << xi;
        double xn = std::abs(x), kn = std::abs(xi);
        double radial = cutout(2.0 * kn / params_.d) * cutout(2.0 * xn / params_.r0);
        double corr = 0.0;
        if (radial > 0.0 && kn > 0.0) {
            int sgn = (x * xi > 0) ? 1 : -1;
            std::vector<double> gn, gw;
            gauss_legendre(96, gn, gw);
            double acc = 0.0;
            for (int q = 0; q < 96; ++q) {
                double u = 0.5 * (1.0 + gn[q]);
                double wq = 0.5 * gw[q];
                double tau = 0.02 / (u * u);  // map (0,1) -> (0.02, inf)-ish
                double t = sgn * tau;
                Eigen::VectorXd a = xv + t * kv;
                Eigen::VectorXd b = t * kv;
                acc += wq * (solver_->v_rho(t, a) - solver_->v_rho(t, b)) * 0.04 /
                       (u * u * u);
            }
            corr = sgn * acc;
        }
        out = radial * corr;
    }
    solver_->tail_tolerance = saved;
    return out;
}

void PhaseFunction::build_cache(const Grid& grid, int coarse) {
    if (grid.dim != 1)
        throw domain_error("PhaseFunction::build_cache: 1-d grids only");
    grid_ = grid;
    const int n = grid.points;

    // coarse nodes: uniform in x; momentum nodes denser near the |xi| = d/2
    // activation edge (the correction varies like 1/|xi| there)
    std::vector<double> xs(coarse), ks(coarse);
    for (int i = 0; i < coarse; ++i)
        xs[i] = -grid.half_extent + 2.0 * grid.half_extent * i / (coarse - 1);
    const double kmax = grid.xi_max();
    for (int i = 0; i < coarse; ++i) {
        // symmetric odd map: u in [-1,1] -> sign(u) kmax u^2 spreads nodes
        // toward small |xi|
        double u = -1.0 + 2.0 * i / (coarse - 1);
        ks[i] = kmax * u * std::abs(u);
    }
    std::vector<double> cv(static_cast<std::size_t>(coarse) * coarse);
    for (int i = 0; i < coarse; ++i)
        for (int j = 0; j < coarse; ++j)
            cv[static_cast<std::size_t>(i) * coarse + j] =
                correction_for_cache(xs[i], ks[j]);

    auto locate = [](const std::vector<double>& nodes, double v) {
        int lo = 1;
        int hi = static_cast<int>(nodes.size()) - 3;
        int i = static_cast<int>(std::lower_bound(nodes.begin(), nodes.end(), v) -
                                 nodes.begin()) - 1;
        return std::max(lo, std::min(hi, i)) - 1;  // start of 4-node stencil
    };

    cache_.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        double xq = grid.x(j);
        int ix = locate(xs, xq);
        for (int k = 0; k < n; ++k) {
            double kq = grid.xi(k);
            int ik = locate(ks, kq);
            double col[4];
            for (int a = 0; a < 4; ++a) {
                double row[4];
                for (int b = 0; b < 4; ++b)
                    row[b] = cv[static_cast<std::size_t>(ix + a) * coarse + (ik + b)];
                col[a] = cubic_interp(&ks[ik], row, kq);
            }
            double corr = cubic_interp(&xs[ix], col, xq);
            cache_[static_cast<std::size_t>(j) * n + k] = xq * kq + corr;
        }
    }
}

double PhaseFunction::cached_phase(int j, int k) const {
    if (cache_.empty()) throw domain_error("PhaseFunction: cache not built");
    return cache_[static_cast<std::size_t>(j) * grid_.points + k];
}

void PhaseFunction::write_cache(const std::string& path) const {
    if (cache_.empty()) throw domain_error("write_cache: cache not built");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("write_cache: cannot open " + path);
    double head[8] = {params_.d,          params_.r0,   params_.sigma_minus,
                      params_.sigma_plus, double(grid_.dim), double(grid_.points),
                      grid_.half_extent,  grid_.hbar};
    f.write(reinterpret_cast<const char*>(head), sizeof(head));
    f.write(reinterpret_cast<const char*>(cache_.data()),
            static_cast<std::streamsize>(cache_.size() * sizeof(double)));
}

PhaseFunction PhaseFunction::read_cache(const std::string& path,
                                        std::shared_ptr<OrbitSolver> solver) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw config_error("read_cache: cannot open " + path);
    double head[8];
    f.read(reinterpret_cast<char*>(head), sizeof(head));
    PhaseParams p;
    p.d = head[0];
    p.r0 = head[1];
    p.sigma_minus = head[2];
    p.sigma_plus = head[3];
    PhaseFunction out(std::move(solver), p);
    out.grid_ = Grid(int(head[4]), int(head[5]), head[6], head[7]);
    out.cache_.resize(out.grid_.size() * out.grid_.size());
    f.read(reinterpret_cast<char*>(out.cache_.data()),
           static_cast<std::streamsize>(out.cache_.size() * sizeof(double)));
    if (!f) throw config_error("read_cache: truncated file");
    return out;
}

GridState identification_apply(const PhaseFunction& phase, const GridState& psi) {
    const Grid& g = phase.cached_grid();
    if (!(psi.grid == g)) throw domain_error("identification_apply: grid mismatch");
    GridState hat = psi.momentum ? psi : dft(psi);
    GridState out(g);
    const int n = g.points;
    const double scale = g.dxi() / std::sqrt(2.0 * kPi * g.hbar);
    for (int j = 0; j < n; ++j) {
        cplx acc = 0.0;
        for (int k = 0; k < n; ++k)
            acc += std::polar(1.0, phase.cached_phase(j, k) / g.hbar) * hat.values[k];
        out.values[j] = scale * acc;
    }
    return out;
}

GridState identification_adjoint(const PhaseFunction& phase, const GridState& psi) {
    const Grid& g = phase.cached_grid();
    if (!(psi.grid == g)) throw domain_error("identification_adjoint: grid mismatch");
    if (psi.momentum) throw domain_error("identification_adjoint: position-space input");
    const int n = g.points;
    GridState hat(g, true);
    const double scale = g.dx() / std::sqrt(2.0 * kPi * g.hbar);
    for (int k = 0; k < n; ++k) {
        cplx acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += std::polar(1.0, -phase.cached_phase(j, k) / g.hbar) * psi.values[j];
        hat.values[k] = scale * acc;
    }
    return idft(hat);
}

InverseResult identification_inverse(const PhaseFunction& phase, const GridState& psi,
                                     double tol, int max_iter) {
    // solve (J J*) y = psi by conjugate gradients (JJ* is Hermitian positive
    // definite when ||I - JJ*|| < 1), then J^{-1} psi = J* y
    const Grid& g = phase.cached_grid();
    if (!(psi.grid == g)) throw domain_error("identification_inverse: grid mismatch");
    auto jjstar = [&](const GridState& v) {
        return identification_apply(phase, identification_adjoint(phase, v));
    };
    GridState y(g);
    GridState r = psi;  // r = psi - JJ* y, y = 0
    GridState p = r;
    double rr = r.norm2();
    const double target = tol * std::sqrt(psi.norm2());
    int it = 0;
    for (; it < max_iter && std::sqrt(rr) > target; ++it) {
        GridState ap = jjstar(p);
        double pap = p.inner(ap).real();
        if (!(pap > 0.0))
            throw convergence_error("identification_inverse: JJ* lost positivity; increase R0");
        double alpha = rr / pap;
        for (std::size_t i = 0; i < y.values.size(); ++i) {
            y.values[i] += alpha * p.values[i];
            r.values[i] -= alpha * ap.values[i];
        }
        double rr_new = r.norm2();
        double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < p.values.size(); ++i)
            p.values[i] = r.values[i] + beta * p.values[i];
    }
    if (std::sqrt(rr) > target)
        throw convergence_error("identification_inverse: CG did not converge; increase R0");
    InverseResult out;
    out.state = identification_adjoint(phase, y);
    GridState check = identification_apply(phase, out.state);
    check -= psi;
    out.residual = check.norm();
    out.iterations = it;
    return out;
}

double measure_i_minus_jjstar(const PhaseFunction& phase, int probes, Rng& rng,
                              double band_lo, double band_hi) {
    const Grid& g = phase.cached_grid();
    double worst = 0.0;
    for (int p = 0; p < probes; ++p) {
        GridState psi = random_band_state(g, rng, band_lo, band_hi);
        GridState w = identification_apply(phase, identification_adjoint(phase, psi));
        w -= psi;
        worst = std::max(worst, w.norm() / psi.norm());
    }
    return worst;
}

PhaseParams search_r0(std::shared_ptr<OrbitSolver> solver, PhaseParams base,
                      const Grid& grid, double r_min, double r_max,
                      int cache_coarse, double threshold) {
    for (double r0 = r_min; r0 <= r_max * 1.0001; r0 *= 2.0) {
        PhaseParams p = base;
        p.r0 = r0;
        PhaseFunction phase(solver, p);
        phase.build_cache(grid, cache_coarse);
        Rng rng(99);
        double m = measure_i_minus_jjstar(phase, 4, rng, p.d, 0.35 * grid.xi_max());
        if (m < threshold) return p;
    }
    throw convergence_error("search_r0: no R0 up to r_max achieves the JJ* threshold");
}

WaveOperatorResult cook_wave_operator(const Propagator& full, const GridState& g,
                                      double horizon, int direction) {
    if (direction != 1 && direction != -1)
        throw domain_error("cook_wave_operator: direction +-1");
    WaveOperatorResult out;
    std::vector<double> hs = {horizon / 8, horizon / 4, horizon / 2, horizon};
    std::vector<GridState> ws;
    for (double T : hs) {
        GridState free = free_propagate_axes(g, direction * T, full.axis_masses());
        ws.push_back(full.propagate(free, -direction * T));
        out.horizons.push_back(T);
    }
    out.state = ws.back();
    for (std::size_t i = 0; i + 1 < ws.size(); ++i) {
        GridState d = ws[i + 1];
        d -= ws[i];
        out.tails.push_back(d.norm());
    }
    for (std::size_t i = 1; i < out.tails.size(); ++i)
        if (out.tails[i] > out.tails[i - 1]) {
            out.tail_decreasing = false;
            out.warnings.push_back("wave-operator tail not decreasing");
        }
    return out;
}

WaveOperatorResult modified_wave_operator(const Propagator& full,
                                          const PhaseFunction& phase,
                                          const GridState& g, double horizon,
                                          int direction) {
    if (direction != 1 && direction != -1)
        throw domain_error("modified_wave_operator: direction +-1");
    WaveOperatorResult out;
    std::vector<double> hs = {horizon / 8, horizon / 4, horizon / 2, horizon};
    std::vector<GridState> ws;
    for (double T : hs) {
        GridState free = free_propagate_axes(g, direction * T, full.axis_masses());
        GridState jf = identification_apply(phase, free);
        ws.push_back(full.propagate(jf, -direction * T));
        out.horizons.push_back(T);
    }
    out.state = ws.back();
    for (std::size_t i = 0; i + 1 < ws.size(); ++i) {
        GridState d = ws[i + 1];
        d -= ws[i];
        out.tails.push_back(d.norm());
    }
    for (std::size_t i = 1; i < out.tails.size(); ++i)
        if (out.tails[i] > out.tails[i - 1]) {
            out.tail_decreasing = false;
            out.warnings.push_back("wave-operator tail not decreasing");
        }
    return out;
}

namespace {

double window_fn(double e, double lo, double hi) {
    // erf edges: bump-function edges give the windowed state slowly decaying
    // spatial tails that keep interacting with the potential at late times
    double w = 0.12 * (hi - lo);
    return 0.25 * (1.0 + std::erf((e - (lo + 2.0 * w)) / w)) *
           (1.0 + std::erf(((hi - 2.0 * w) - e) / w));
}

}  // namespace

double intertwining_defect(const Propagator& full,
                           const std::function<double(double)>& v, double mass,
                           const GridState& g, double horizon, int direction,
                           double b_lo, double b_hi) {
    const Grid& grid = full.grid();
    if (grid.dim != 1) throw domain_error("intertwining_defect: 1-d grids only");
    if (!(b_lo < b_hi)) throw domain_error("intertwining_defect: empty window");
    auto eig = lowest_eigenstates(grid, mass, v, grid.points);
    if (b_hi < eig.front().energy || b_lo > eig.back().energy)
        throw domain_error("intertwining_defect: window outside the spectrum");

    auto wave = [&](const GridState& f) {
        GridState free = free_propagate_axes(f, direction * horizon, full.axis_masses());
        return full.propagate(free, -direction * horizon);
    };

    // chi_B(H) W g
    GridState wg = wave(g);
    GridState lhs(grid);
    for (const auto& ep : eig) {
        double w = window_fn(ep.energy, b_lo, b_hi);
        if (w == 0.0) continue;
        cplx c = wg.inner(ep.state);
        for (std::size_t i = 0; i < lhs.values.size(); ++i)
            lhs.values[i] += w * c * ep.state.values[i];
    }

    // W chi_B(H0) g
    GridState ghat = dft(g);
    int idx[1];
    for (std::size_t i = 0; i < ghat.values.size(); ++i) {
        grid.unflatten(i, idx);
        double e = sq(grid.xi(idx[0])) / (2.0 * full.axis_masses()[0]);
        ghat.values[i] *= window_fn(e, b_lo, b_hi);
    }
    GridState rhs = wave(idft(ghat));

    lhs -= rhs;
    return lhs.norm();
}

double completeness_defect(const Propagator& full, const PhaseFunction* phase,
                           const GridState& f_c, double horizon) {
    // candidate asymptote from the half horizon, tested at the full horizon;
    // identically zero when V = 0 (J = I)
    const double th = 0.5 * horizon;
    GridState evolved_half = full.propagate(f_c, th);
    GridState ginv = phase ? identification_inverse(*phase, evolved_half).state
                           : evolved_half;
    GridState g = free_propagate_axes(ginv, -th, full.axis_masses());

    GridState lhs = full.propagate(f_c, horizon);
    GridState free_full = free_propagate_axes(g, horizon, full.axis_masses());
    GridState rhs = phase ? identification_apply(*phase, free_full) : free_full;
    lhs -= rhs;
    return lhs.norm();
}

}  // namespace scatterlab
