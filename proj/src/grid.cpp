#include "scatterlab/grid.hpp"

#include <fftw3.h>

#include <cstdio>
#include <cstring>
#include <fstream>

namespace scatterlab {

Grid::Grid(int m, int n, double L, double hb)
    : dim(m), points(n), half_extent(L), hbar(hb) {
    if (m < 1 || m > 3) throw domain_error("Grid: dim must be 1, 2 or 3");
    if (n < 2 || (n & (n - 1)) != 0)
        throw domain_error("Grid: points per axis must be a power of two");
    if (!(L > 0.0)) throw domain_error("Grid: half extent must be positive");
    if (!(hb > 0.0)) throw domain_error("Grid: hbar must be positive");
}

std::size_t Grid::size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(points);
    return s;
}

void Grid::unflatten(std::size_t idx, int* out) const {
    for (int a = dim - 1; a >= 0; --a) {
        out[a] = static_cast<int>(idx % points);
        idx /= points;
    }
}

double GridState::cell() const {
    double c = momentum ? grid.dxi() : grid.dx();
    double v = 1.0;
    for (int a = 0; a < grid.dim; ++a) v *= c;
    return v;
}

double GridState::norm2() const {
    double s = 0.0;
    for (const cplx& v : values) s += std::norm(v);
    return s * cell();
}

cplx GridState::inner(const GridState& other) const {
    if (!(grid == other.grid) || momentum != other.momentum)
        throw domain_error("inner: states live on different lattices");
    cplx s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        s += values[i] * std::conj(other.values[i]);
    return s * cell();
}

GridState& GridState::scale(cplx a) {
    for (cplx& v : values) v *= a;
    return *this;
}

GridState& GridState::operator+=(const GridState& o) {
    if (!(grid == o.grid) || momentum != o.momentum)
        throw domain_error("operator+=: lattice mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

GridState& GridState::operator-=(const GridState& o) {
    if (!(grid == o.grid) || momentum != o.momentum)
        throw domain_error("operator-=: lattice mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}

double GridState::boundary_mass(int cells) const {
    double total = 0.0, edge = 0.0;
    int idx[3];
    for (std::size_t i = 0; i < values.size(); ++i) {
        double w = std::norm(values[i]);
        total += w;
        grid.unflatten(i, idx);
        for (int a = 0; a < grid.dim; ++a) {
            if (idx[a] < cells || idx[a] >= grid.points - cells) {
                edge += w;
                break;
            }
        }
    }
    return total > 0.0 ? edge / total : 0.0;
}

namespace {

void run_fftw(std::vector<cplx>& data, const Grid& g, int sign) {
    int n[3] = {g.points, g.points, g.points};
    fftw_plan plan = fftw_plan_dft(
        g.dim, n, reinterpret_cast<fftw_complex*>(data.data()),
        reinterpret_cast<fftw_complex*>(data.data()), sign, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
}

}  // namespace

GridState dft(const GridState& state) {
    if (state.momentum) throw domain_error("dft: state already in momentum space");
    const Grid& g = state.grid;
    GridState out = state;
    run_fftw(out.values, g, FFTW_FORWARD);
    // continuum-normalized transform: scale and shift-phase per axis
    double scale = 1.0;
    for (int a = 0; a < g.dim; ++a) scale *= g.dx() / std::sqrt(2.0 * kPi * g.hbar);
    int idx[3];
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        g.unflatten(i, idx);
        double xl = 0.0;
        for (int a = 0; a < g.dim; ++a) xl += g.xi(idx[a]);
        out.values[i] *= scale * std::polar(1.0, xl * g.half_extent / g.hbar);
    }
    out.momentum = true;
    return out;
}

GridState idft(const GridState& state) {
    if (!state.momentum) throw domain_error("idft: state not in momentum space");
    const Grid& g = state.grid;
    GridState out = state;
    double scale = 1.0;
    for (int a = 0; a < g.dim; ++a) scale *= g.dxi() / std::sqrt(2.0 * kPi * g.hbar);
    int idx[3];
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        g.unflatten(i, idx);
        double xl = 0.0;
        for (int a = 0; a < g.dim; ++a) xl += g.xi(idx[a]);
        out.values[i] *= scale * std::polar(1.0, -xl * g.half_extent / g.hbar);
    }
    run_fftw(out.values, g, FFTW_BACKWARD);
    out.momentum = false;
    return out;
}

GridState sample_state(const Grid& g, const std::function<cplx(const double*)>& f) {
    GridState s(g);
    int idx[3];
    double xv[3];
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        g.unflatten(i, idx);
        for (int a = 0; a < g.dim; ++a) xv[a] = g.x(idx[a]);
        s.values[i] = f(xv);
    }
    return s;
}

void apply_position_multiplier(GridState& s, const std::function<cplx(const double*)>& f) {
    if (s.momentum) throw domain_error("apply_position_multiplier: momentum-space state");
    int idx[3];
    double xv[3];
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        s.grid.unflatten(i, idx);
        for (int a = 0; a < s.grid.dim; ++a) xv[a] = s.grid.x(idx[a]);
        s.values[i] *= f(xv);
    }
}

void apply_momentum_multiplier(GridState& s, const std::function<cplx(const double*)>& f) {
    if (!s.momentum) throw domain_error("apply_momentum_multiplier: position-space state");
    int idx[3];
    double kv[3];
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        s.grid.unflatten(i, idx);
        for (int a = 0; a < s.grid.dim; ++a) kv[a] = s.grid.xi(idx[a]);
        s.values[i] *= f(kv);
    }
}

double smoothstep_inf(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    double a = std::exp(-1.0 / u);
    double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

GridState random_band_state(const Grid& g, Rng& rng, double xi_lo, double xi_hi) {
    if (!(0.0 <= xi_lo && xi_lo < xi_hi)) throw domain_error("random_band_state: bad band");
    if (xi_hi > g.xi_max()) throw range_error("random_band_state: band beyond lattice");
    // superposition of Gaussian momentum bumps with random centers inside the
    // band; smooth in xi, so the state decays rapidly in x and band-limited
    // interpolation of its transform is accurate
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int nbump = 6;
    const double width = 0.25 * (xi_hi - xi_lo);
    struct Bump {
        double c[3];
        cplx amp;
    };
    std::vector<Bump> bumps(nbump);
    for (Bump& b : bumps) {
        double k = xi_lo + (0.25 + 0.5 * uni(rng)) * (xi_hi - xi_lo);
        double dir[3] = {0, 0, 0};
        double dn = 0.0;
        for (int a = 0; a < g.dim; ++a) {
            dir[a] = gauss(rng);
            dn += sq(dir[a]);
        }
        dn = std::sqrt(dn);
        for (int a = 0; a < g.dim; ++a) b.c[a] = k * dir[a] / dn;
        b.amp = cplx(gauss(rng), gauss(rng));
    }
    // analytic erf band window: numerically band-limited (sub-1e-6 leakage
    // past the edges) while keeping Gaussian-fast spatial decay
    double tau = 0.15 * (xi_hi - xi_lo);
    if (xi_lo > 0.0) tau = std::min(tau, xi_lo / 3.0);
    GridState hat(g, true);
    int idx[3];
    for (std::size_t i = 0; i < hat.values.size(); ++i) {
        g.unflatten(i, idx);
        double k2 = 0.0;
        for (int a = 0; a < g.dim; ++a) k2 += sq(g.xi(idx[a]));
        double k = std::sqrt(k2);
        double win = 0.25 * (1.0 + std::erf((k - xi_lo) / tau)) *
                     (1.0 + std::erf((xi_hi - k) / tau));
        if (win < 1e-14) continue;
        cplx acc = 0.0;
        for (const Bump& b : bumps) {
            double d2 = 0.0;
            for (int a = 0; a < g.dim; ++a) d2 += sq(g.xi(idx[a]) - b.c[a]);
            acc += b.amp * std::exp(-0.5 * d2 / sq(width));
        }
        hat.values[i] = win * acc;
    }
    GridState s = idft(hat);
    double n = s.norm();
    if (n == 0.0) throw domain_error("random_band_state: empty band on this lattice");
    s.scale(1.0 / n);
    return s;
}

void write_state_binary(const GridState& s, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("write_state_binary: cannot open " + path);
    std::int64_t dim = s.grid.dim, pts = s.grid.points;
    double L = s.grid.half_extent, hb = s.grid.hbar;
    f.write(reinterpret_cast<const char*>(&dim), 8);
    f.write(reinterpret_cast<const char*>(&pts), 8);
    f.write(reinterpret_cast<const char*>(&L), 8);
    f.write(reinterpret_cast<const char*>(&hb), 8);
    for (const cplx& v : s.values) {
        double re = v.real(), im = v.imag();
        f.write(reinterpret_cast<const char*>(&re), 8);
        f.write(reinterpret_cast<const char*>(&im), 8);
    }
}

GridState read_state_binary(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw config_error("read_state_binary: cannot open " + path);
    std::int64_t dim = 0, pts = 0;
    double L = 0, hb = 0;
    f.read(reinterpret_cast<char*>(&dim), 8);
    f.read(reinterpret_cast<char*>(&pts), 8);
    f.read(reinterpret_cast<char*>(&L), 8);
    f.read(reinterpret_cast<char*>(&hb), 8);
    GridState s(Grid(static_cast<int>(dim), static_cast<int>(pts), L, hb));
    for (cplx& v : s.values) {
        double re = 0, im = 0;
        f.read(reinterpret_cast<char*>(&re), 8);
        f.read(reinterpret_cast<char*>(&im), 8);
        v = cplx(re, im);
    }
    if (!f) throw config_error("read_state_binary: truncated file " + path);
    return s;
}

void write_state_csv(const GridState& s, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw config_error("write_state_csv: cannot open " + path);
    for (int a = 0; a < s.grid.dim; ++a) f << "i" << a << ",";
    f << "re,im\r\n";
    char buf[64];
    int idx[3];
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        s.grid.unflatten(i, idx);
        for (int a = 0; a < s.grid.dim; ++a) f << idx[a] << ",";
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\r\n", s.values[i].real(),
                      s.values[i].imag());
        f << buf;
    }
}

}  // namespace scatterlab
