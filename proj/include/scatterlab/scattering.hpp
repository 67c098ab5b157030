#pragma once

#include <map>
#include <memory>

#include "scatterlab/dynamics.hpp"
#include "scatterlab/potentials.hpp"

namespace scatterlab {

// Classical orbits of the time-cutoff Hamiltonian |p|^2/2 + V_rho(t, x),
// V_rho(t,x) = V_L(x) phi(rho x) phi(<log<t>> x / <t>), solved as the fixed
// point of the integral equations
//   q(t,s) = y + int_s^t p,   p(t,s) = xi - int_s^t grad V_rho(tau, q(tau)).
class OrbitSolver {
  public:
    OrbitSolver(std::function<double(const Eigen::VectorXd&)> v_long, int dim,
                double rho, double delta0, double delta1, double tol = 1e-12,
                int max_iter = 200);

    int dim() const { return dim_; }
    double rho() const { return rho_; }

    double v_rho(double t, const Eigen::VectorXd& x) const;
    Eigen::VectorXd grad_v_rho(double t, const Eigen::VectorXd& x) const;

    // (q, p)(t, s, y, xi): data (y, xi) at time s, evaluated at time t.
    // Requires +-t >= +-s >= 0.
    void orbit(double t, double s, const Eigen::VectorXd& y, const Eigen::VectorXd& xi,
               Eigen::VectorXd& q_out, Eigen::VectorXd& p_out) const;

    // eta with p(t, s, x, eta) = xi  (fixed point of eta -> xi - (p - eta))
    Eigen::VectorXd orbit_inverse(double t, double s, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& xi) const;

    // Generating-function value u(t, x, eta) along the orbit from (x, eta) at 0.
    double action(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& eta) const;

    // phi(t,x,xi) - phi(t,0,xi), and its t -> +-inf limit with tail estimate.
    double phase_at(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const;

    struct PhaseLimit {
        double value = 0.0;
        double tail = 0.0;  // magnitude of the last quadrature contribution
    };
    PhaseLimit eikonal_phase(const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                             int sign, double t_max = 200.0) const;
    mutable double tail_tolerance = 1e-3;
    double mesh_h0 = 0.02;  // base step of the graded orbit mesh

  private:
    std::function<double(const Eigen::VectorXd&)> v_long_;
    int dim_;
    double rho_, delta0_, delta1_, tol_;
    int max_iter_;
    // memoized reference actions phi(t, 0, xi), keyed by (t, xi)
    mutable std::map<std::array<double, 4>, double> ref_cache_;

    // solve on a mesh over [min(s,t), max(s,t)] by Picard iteration
    void solve_mesh(double t, double s, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& xi, std::vector<Eigen::VectorXd>& qs,
                    std::vector<Eigen::VectorXd>& ps, std::vector<double>& taus) const;
};

// Glued eikonal phase phi(x, xi) built from the forward/backward limits
// phi_+- with directional cutoffs chi_+- = psi_+-(cos(x, xi)) and radial
// cutoffs vanishing for |xi| <= d/2 or |x| <= R0/2.
struct PhaseParams {
    double d = 0.5;
    double r0 = 16.0;
    double sigma_minus = -0.2;
    double sigma_plus = 0.2;
    double t_max = 200.0;
};

class PhaseFunction {
  public:
    PhaseFunction(std::shared_ptr<OrbitSolver> solver, PhaseParams params);

    const PhaseParams& params() const { return params_; }

    // direct (orbit-limit) evaluations
    double phi_pm(const Eigen::VectorXd& x, const Eigen::VectorXd& xi, int sign) const;
    double glued(const Eigen::VectorXd& x, const Eigen::VectorXd& xi) const;

    // eikonal residual 0.5 |grad_x phi|^2 + V_L - 0.5 |xi|^2 with the
    // gradient taken by 4th-order central differences of the direct phase
    double eikonal_residual(const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                            int sign, double fd_step = 1e-3) const;

    // amplitude a(x, xi) of the conjugated kinetic defect (glued phase,
    // finite-difference derivatives)
    cplx amplitude(const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
                   double fd_step = 1e-3) const;

    // 1-d lattice cache for the identification operator: glued phase on the
    // (x, xi) grid lattice, built from a coarse sub-lattice by bicubic
    // interpolation of the correction phi - x.xi
    void build_cache(const Grid& grid, int coarse = 64);
    bool has_cache() const { return !cache_.empty(); }
    double cached_phase(int j, int k) const;  // position index j, momentum index k
    const Grid& cached_grid() const { return grid_; }

    void write_cache(const std::string& path) const;
    static PhaseFunction read_cache(const std::string& path,
                                    std::shared_ptr<OrbitSolver> solver);

  private:
    std::shared_ptr<OrbitSolver> solver_;
    PhaseParams params_;
    Grid grid_;
    std::vector<double> cache_;  // row-major [position][momentum]

    double correction(double x, double xi) const;  // glued phi - x xi (1-d)
    double correction_for_cache(double x, double xi) const;
};

// J psi(x) = (2 pi hbar)^{-m/2} int e^{i phi(x,xi)/hbar} psi_hat(xi) dxi over
// the momentum lattice (1-d; uses the phase cache).
GridState identification_apply(const PhaseFunction& phase, const GridState& psi);
GridState identification_adjoint(const PhaseFunction& phase, const GridState& psi);

// J^{-1} psi = J* (J J*)^{-1} psi by conjugate gradients on the normal
// equations; residual-certified.
struct InverseResult {
    GridState state;
    double residual = 0.0;
    int iterations = 0;
};
InverseResult identification_inverse(const PhaseFunction& phase, const GridState& psi,
                                     double tol = 1e-10, int max_iter = 400);

// max over probes of ||(I - J J*) psi|| / ||psi||
double measure_i_minus_jjstar(const PhaseFunction& phase, int probes, Rng& rng,
                              double band_lo, double band_hi);

// smallest power-of-two R0 >= r_min with measured ||I - JJ*|| below the
// threshold (the paper's construction wants < 1/2; tighter values buy a more
// isometric J at the cost of a larger identification zone)
PhaseParams search_r0(std::shared_ptr<OrbitSolver> solver, PhaseParams base,
                      const Grid& grid, double r_min = 4.0, double r_max = 64.0,
                      int cache_coarse = 64, double threshold = 0.5);

// Wave operators. direction = +1 uses the t -> +infty limit e^{+iTH} e^{-iTH0}.
struct WaveOperatorResult {
    GridState state;                 // approximation at the horizon
    std::vector<double> horizons;    // checkpoints T/4, T/2, T
    std::vector<double> tails;       // ||W(2h) g - W(h) g|| per checkpoint
    bool tail_decreasing = true;
    std::vector<std::string> warnings;
};

WaveOperatorResult cook_wave_operator(const Propagator& full, const GridState& g,
                                      double horizon, int direction);
WaveOperatorResult modified_wave_operator(const Propagator& full,
                                          const PhaseFunction& phase,
                                          const GridState& g, double horizon,
                                          int direction);

// || chi_B(H) W(T) g - W(T) chi_B(H0) g || with W(T) the finite-horizon Cook
// operator and chi_B a smooth bump on [b_lo, b_hi]; chi_B(H) is evaluated
// through the dense eigendecomposition of the 1-d discretized H.
double intertwining_defect(const Propagator& full,
                           const std::function<double(double)>& v, double mass,
                           const GridState& g, double horizon, int direction,
                           double b_lo, double b_hi);

// Completeness defect: the candidate asymptote g is taken at horizon T/2 via
// g = e^{i(T/2)H0} J^{-1} e^{-i(T/2)H} f, then tested at T:
// || e^{-iTH} f - J e^{-iTH0} g ||. Vanishes identically when V = 0, J = I.
double completeness_defect(const Propagator& full, const PhaseFunction* phase,
                           const GridState& f_c, double horizon);

}  // namespace scatterlab
