#include "scatterlab/coords.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace scatterlab {

SlopeFit fit_loglog_slope(const std::vector<double>& times,
                          const std::vector<double>& values, double tmin,
                          double tmax) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < times.size() && i < values.size(); ++i) {
        if (times[i] < tmin || times[i] > tmax) continue;
        if (!(values[i] > 0.0) || !(times[i] > 0.0)) continue;
        double lx = std::log(times[i]), ly = std::log(values[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n;
    }
    SlopeFit fit;
    fit.points = n;
    if (n >= 2) {
        double den = n * sxx - sx * sx;
        fit.slope = (n * sxy - sx * sy) / den;
        fit.intercept = (sy - fit.slope * sx) / n;
    }
    return fit;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = fnv1a64(bytes.data(), bytes.size());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ClusterDecomposition::ClusterDecomposition(int n, std::vector<std::vector<int>> cs)
    : particle_count(n), clusters(std::move(cs)) {
    if (n < 1) throw domain_error("ClusterDecomposition: need N >= 1");
    std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
    int total = 0;
    for (auto& c : clusters) {
        if (c.empty()) throw domain_error("ClusterDecomposition: empty cluster");
        std::sort(c.begin(), c.end());
        for (int p : c) {
            if (p < 1 || p > n) throw domain_error("ClusterDecomposition: particle index out of range");
            if (seen[p]) throw domain_error("ClusterDecomposition: clusters not disjoint");
            seen[p] = 1;
            ++total;
        }
    }
    if (total != n) throw domain_error("ClusterDecomposition: clusters do not cover {1..N}");
    std::sort(clusters.begin(), clusters.end(),
              [](const std::vector<int>& a, const std::vector<int>& b) { return a.front() < b.front(); });
}

ClusterDecomposition ClusterDecomposition::finest(int n) {
    std::vector<std::vector<int>> cs;
    for (int i = 1; i <= n; ++i) cs.push_back({i});
    return {n, std::move(cs)};
}

ClusterDecomposition ClusterDecomposition::coarsest(int n) {
    std::vector<int> c(n);
    std::iota(c.begin(), c.end(), 1);
    return {n, {c}};
}

int ClusterDecomposition::cluster_of(int particle) const {
    for (int l = 0; l < size(); ++l)
        if (std::binary_search(clusters[l].begin(), clusters[l].end(), particle)) return l;
    throw domain_error("cluster_of: particle not in decomposition");
}

std::string ClusterDecomposition::to_string() const {
    std::ostringstream os;
    for (int l = 0; l < size(); ++l) {
        if (l) os << '|';
        os << '{';
        for (std::size_t k = 0; k < clusters[l].size(); ++k) {
            if (k) os << ',';
            os << clusters[l][k];
        }
        os << '}';
    }
    return os.str();
}

ClusterDecomposition ClusterDecomposition::parse(const std::string& text, int n) {
    std::vector<std::vector<int>> cs;
    std::vector<int> cur;
    bool in_braces = false;
    std::string num;
    auto flush_num = [&] {
        if (!num.empty()) {
            cur.push_back(std::stoi(num));
            num.clear();
        }
    };
    for (char ch : text) {
        if (ch == '{') {
            if (in_braces) throw domain_error("parse: nested '{'");
            in_braces = true;
            cur.clear();
        } else if (ch == '}') {
            if (!in_braces) throw domain_error("parse: unmatched '}'");
            flush_num();
            if (cur.empty()) throw domain_error("parse: empty cluster");
            cs.push_back(cur);
            in_braces = false;
        } else if (ch == ',') {
            flush_num();
        } else if (ch == '|') {
            if (in_braces) throw domain_error("parse: '|' inside cluster");
        } else if (ch >= '0' && ch <= '9') {
            num.push_back(ch);
        } else if (ch == ' ') {
            continue;
        } else {
            throw domain_error(std::string("parse: unexpected character '") + ch + "'");
        }
    }
    if (in_braces) throw domain_error("parse: unterminated cluster");
    return {n, std::move(cs)};
}

bool refines(const ClusterDecomposition& b, const ClusterDecomposition& a) {
    if (b.particle_count != a.particle_count)
        throw domain_error("refines: particle counts differ");
    for (const auto& c : b.clusters) {
        int host = a.cluster_of(c.front());
        for (int p : c)
            if (a.cluster_of(p) != host) return false;
    }
    return true;
}

std::vector<std::pair<int, int>> intercluster_pairs(const ClusterDecomposition& b) {
    std::vector<std::pair<int, int>> out;
    for (int i = 1; i <= b.particle_count; ++i)
        for (int j = i + 1; j <= b.particle_count; ++j)
            if (b.cluster_of(i) != b.cluster_of(j)) out.emplace_back(i, j);
    return out;
}

std::vector<ClusterDecomposition> all_decompositions(int n) {
    // Enumerate set partitions by restricted growth strings.
    std::vector<ClusterDecomposition> out;
    std::vector<int> rgs(n, 0);
    while (true) {
        int blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        std::vector<std::vector<int>> cs(blocks);
        for (int i = 0; i < n; ++i) cs[rgs[i]].push_back(i + 1);
        out.emplace_back(n, std::move(cs));
        // next RGS
        int i = n - 1;
        for (; i > 0; --i) {
            int maxprev = *std::max_element(rgs.begin(), rgs.begin() + i);
            if (rgs[i] <= maxprev) {
                ++rgs[i];
                std::fill(rgs.begin() + i + 1, rgs.end(), 0);
                break;
            }
            rgs[i] = 0;
        }
        if (i == 0) break;
    }
    return out;
}

double JacobiFrame::total_mass() const {
    return std::accumulate(masses.begin(), masses.end(), 0.0);
}

JacobiFrame jacobi_frame(const std::vector<double>& masses, int dim,
                         const std::vector<int>& order) {
    const int n = static_cast<int>(masses.size());
    if (n < 1) throw domain_error("jacobi_frame: need at least one particle");
    if (dim < 1 || dim > 3) throw domain_error("jacobi_frame: dim must be 1, 2 or 3");
    for (double m : masses)
        if (!(m > 0.0)) throw domain_error("jacobi_frame: masses must be positive");

    std::vector<int> perm(n);
    if (order.empty()) {
        std::iota(perm.begin(), perm.end(), 0);
    } else {
        if (static_cast<int>(order.size()) != n)
            throw domain_error("jacobi_frame: order has wrong length");
        std::vector<char> seen(n, 0);
        for (int i = 0; i < n; ++i) {
            if (order[i] < 1 || order[i] > n || seen[order[i] - 1])
                throw domain_error("jacobi_frame: order is not a permutation of 1..N");
            seen[order[i] - 1] = 1;
            perm[i] = order[i] - 1;
        }
    }

    JacobiFrame f;
    f.dim = dim;
    f.masses = masses;
    f.reduced_masses.resize(std::max(0, n - 1));
    f.to_jacobi = Eigen::MatrixXd::Zero(std::max(0, n - 1), n);

    double mass_sum = masses[perm[0]];
    for (int i = 0; i + 1 < n; ++i) {
        // x_i = X_{perm(i+1)} - (weighted mean of X_{perm(0..i)})
        double mnext = masses[perm[i + 1]];
        f.reduced_masses[i] = 1.0 / (1.0 / mnext + 1.0 / mass_sum);
        f.to_jacobi(i, perm[i + 1]) = 1.0;
        double cum = 0.0;
        for (int j = 0; j <= i; ++j) cum += masses[perm[j]];
        for (int j = 0; j <= i; ++j) f.to_jacobi(i, perm[j]) = -masses[perm[j]] / cum;
        mass_sum += mnext;
    }

    // Invert the augmented square system [to_jacobi; COM row] and drop the
    // COM column; valid on the subspace sum_j m_j X_j = 0.
    Eigen::MatrixXd aug(n, n);
    if (n > 1) aug.topRows(n - 1) = f.to_jacobi;
    double mt = f.total_mass();
    for (int j = 0; j < n; ++j) aug(n - 1, j) = masses[j] / mt;
    Eigen::MatrixXd inv = aug.inverse();
    f.from_jacobi = inv.leftCols(std::max(0, n - 1));
    return f;
}

Eigen::MatrixXd JacobiFrame::jacobi_of(const Eigen::MatrixXd& particle_positions) const {
    if (particle_positions.rows() != particles() || particle_positions.cols() != dim)
        throw domain_error("jacobi_of: configuration has wrong shape");
    return to_jacobi * particle_positions;
}

Eigen::MatrixXd JacobiFrame::particles_of(const Eigen::MatrixXd& jacobi_config) const {
    if (jacobi_config.rows() != vectors() || jacobi_config.cols() != dim)
        throw domain_error("particles_of: configuration has wrong shape");
    return from_jacobi * jacobi_config;
}

double mass_inner_product(const JacobiFrame& frame, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& y) {
    if (x.rows() != frame.vectors() || y.rows() != frame.vectors() ||
        x.cols() != frame.dim || y.cols() != frame.dim)
        throw domain_error("mass_inner_product: dimension mismatch");
    double s = 0.0;
    for (int i = 0; i < frame.vectors(); ++i)
        s += frame.reduced_masses[i] * x.row(i).dot(y.row(i));
    return s;
}

double mass_norm2(const JacobiFrame& frame, const Eigen::MatrixXd& x) {
    return mass_inner_product(frame, x, x);
}

ClusteredFrame clustered_frame(const JacobiFrame& frame, const ClusterDecomposition& b) {
    if (b.particle_count != frame.particles())
        throw domain_error("clustered_frame: particle counts differ");
    ClusteredFrame cf;
    cf.base = frame;
    cf.decomposition = b;
    for (const auto& c : b.clusters) {
        std::vector<double> ms;
        double total = 0.0;
        for (int p : c) {
            ms.push_back(frame.masses[p - 1]);
            total += frame.masses[p - 1];
        }
        cf.cluster_masses.push_back(total);
        cf.internal_frames.push_back(jacobi_frame(ms, frame.dim));
    }
    cf.intercluster_frame = jacobi_frame(cf.cluster_masses, frame.dim);
    for (int l = 0; l < b.size(); ++l)
        for (int m = l + 1; m < b.size(); ++m) {
            cf.z_pairs.emplace_back(l, m);
            double Ml = cf.cluster_masses[l], Mm = cf.cluster_masses[m];
            cf.z_reduced_masses.push_back(Ml * Mm / (Ml + Mm));
        }
    return cf;
}

int ClusteredFrame::dim_inter() const {
    return base.dim * (decomposition.size() - 1);
}

int ClusteredFrame::dim_internal() const {
    return base.dim * (base.particles() - decomposition.size());
}

ClusterSplitNorms cluster_split_norms(const ClusteredFrame& cf,
                                      const Eigen::MatrixXd& particle_positions) {
    const JacobiFrame& f = cf.base;
    if (particle_positions.rows() != f.particles() || particle_positions.cols() != f.dim)
        throw domain_error("cluster_split_norms: configuration has wrong shape");

    Eigen::MatrixXd pos = particle_positions;
    Eigen::RowVectorXd com = Eigen::RowVectorXd::Zero(f.dim);
    for (int j = 0; j < f.particles(); ++j) com += f.masses[j] * pos.row(j);
    com /= f.total_mass();
    for (int j = 0; j < f.particles(); ++j) pos.row(j) -= com;

    const auto& b = cf.decomposition;
    ClusterSplitNorms out;
    std::vector<Eigen::RowVectorXd> centers(b.size(), Eigen::RowVectorXd::Zero(f.dim));
    for (int l = 0; l < b.size(); ++l) {
        for (int p : b.clusters[l]) centers[l] += f.masses[p - 1] * pos.row(p - 1);
        centers[l] /= cf.cluster_masses[l];
    }
    for (int j = 0; j < f.particles(); ++j)
        out.norm2_total += f.masses[j] * pos.row(j).squaredNorm();
    for (int l = 0; l < b.size(); ++l)
        out.norm2_inter += cf.cluster_masses[l] * centers[l].squaredNorm();
    for (int j = 0; j < f.particles(); ++j) {
        int l = b.cluster_of(j + 1);
        out.norm2_internal += f.masses[j] * (pos.row(j) - centers[l]).squaredNorm();
    }
    for (std::size_t k = 0; k < cf.z_pairs.size(); ++k) {
        auto [l, m] = cf.z_pairs[k];
        Eigen::VectorXd z = (centers[l] - centers[m]).transpose();
        out.z_norm2.push_back(cf.z_reduced_masses[k] * z.squaredNorm());
        out.z_vectors.push_back(std::move(z));
    }
    return out;
}

Eigen::VectorXd pair_vector(const Eigen::MatrixXd& particle_positions, int i, int j) {
    return (particle_positions.row(i - 1) - particle_positions.row(j - 1)).transpose();
}

}  // namespace scatterlab
