#include "scatterlab/manybody.hpp"

#include <fstream>

namespace scatterlab {

namespace {

// normalized bump integral: 1 for u <= 0, 0 for u >= 1, C^inf monotone
double mollifier_step(double u) { return 1.0 - smoothstep_inf(u); }

}  // namespace

double SmoothCutoff::operator()(double lambda) const {
    if (!greater) {
        // 1 for lambda <= tau, 0 for lambda >= tau + sigma
        return mollifier_step((lambda - tau) / sigma);
    }
    // phi_sigma(lambda > tau) = 1 - phi_sigma(lambda < tau - sigma)
    SmoothCutoff less{sigma, tau - sigma, false};
    return 1.0 - less(lambda);
}

double cutoff_eval(const SmoothCutoff& c, double lambda) { return c(lambda); }

std::string PartitionConstants::violated() const {
    const int n = n_particles;
    if (n < 3) return "need N >= 3";
    if (!(gamma > 1.0)) return "gamma must exceed 1";
    if (theta.size() != static_cast<std::size_t>(n) ||
        rho.size() != static_cast<std::size_t>(n) + 1)
        return "index ranges: theta_1..theta_{N-1}, rho_2..rho_N";
    if (!(theta[1] <= 1.0)) return "theta_1 <= 1";
    // ordering chain 1 >= theta_1 > rho_j > theta_j > rho_N > 0
    for (int j = 2; j <= n - 1; ++j) {
        if (!(theta[1] > rho[j])) return "theta_1 > rho_j";
        if (!(rho[j] > theta[j])) return "rho_j > theta_j";
        if (!(theta[j] > rho[n])) return "theta_j > rho_N";
    }
    if (!(rho[n] > 0.0)) return "rho_N > 0";
    for (int j = 2; j <= n - 1; ++j)
        if (!(theta[j - 1] >= theta[j] + rho[j]))
            return "theta_{j-1} >= theta_j + rho_j";
    double g1 = gamma * (1.0 + theta[n - 1]);
    double g2 = (1.0 + gamma) / (1.0 + theta[n - 1]);
    if (!(g1 < 2.0)) return "gamma'_1 = gamma (1 + theta_{N-1}) < 2";
    double r0v = 1e300;
    for (int j = 2; j <= n - 1; ++j) r0v = std::min(r0v, rho[j] / theta[j]);
    double bound = std::max(gamma * (1.0 + gamma), 2.0 * g1 * g2 / (2.0 - g1));
    if (!(bound < r0v)) return "max{gamma(1+gamma), 2 g1 g2/(2-g1)} < r0";
    double sig_bound = (1.0 - 1.0 / gamma) * rho[n];
    for (int j = 2; j <= n - 1; ++j) {
        sig_bound = std::min(sig_bound, (1.0 - 1.0 / gamma) * rho[j]);
        sig_bound = std::min(sig_bound, (gamma - 1.0) * theta[j]);
    }
    if (!(sigma > 0.0 && sigma < sig_bound))
        return "sigma below min{(1-1/gamma) rho_N, (1-1/gamma) rho_j, (gamma-1) theta_j}";
    return "";
}

PartitionConstants select_constants(int n, double gamma) {
    if (n < 3) throw config_error("select_constants: need N >= 3");
    if (!(gamma > 1.0)) throw config_error("select_constants: need gamma > 1");
    // gamma'_1 = gamma (1 + theta_{N-1}) < 2 needs gamma < 2 outright
    if (!(gamma < 2.0))
        throw config_error(
            "select_constants: infeasible gamma — gamma'_1 = gamma (1 + theta_{N-1}) >= 2");

    // Ratio kappa = rho_j / theta_j. Besides the Lemma bound we require the
    // sampled support property to be provable with the intercluster-weighted
    // pair norms: sqrt(1/gamma) - C sqrt((1+gamma)/kappa) > sqrt((1+t)/2)
    // with C = sqrt(N/2) covering equal-mass cluster splits.
    const double cmass = std::sqrt(0.5 * n);
    double kappa = 150.0;
    PartitionConstants out;
    for (int attempt = 0; attempt < 16; ++attempt, kappa *= 2.0) {
        out = PartitionConstants{};
        out.n_particles = n;
        out.gamma = gamma;
        out.theta.assign(n, 0.0);
        out.rho.assign(n + 1, 0.0);
        out.theta[1] = 1.0;
        const double a = 0.98 / (1.0 + 1.0 / kappa);
        for (int j = 2; j <= n - 1; ++j) {
            out.rho[j] = a * out.theta[j - 1];
            out.theta[j] = out.rho[j] / kappa;
        }
        out.rho[n] = 0.5 * out.theta[n - 1];
        double sig_bound = (1.0 - 1.0 / gamma) * out.rho[n];
        for (int j = 2; j <= n - 1; ++j) {
            sig_bound = std::min(sig_bound, (1.0 - 1.0 / gamma) * out.rho[j]);
            sig_bound = std::min(sig_bound, (gamma - 1.0) * out.theta[j]);
        }
        out.sigma = 0.9 * sig_bound;
        out.gamma1p = gamma * (1.0 + out.theta[n - 1]);
        out.gamma2p = (1.0 + gamma) / (1.0 + out.theta[n - 1]);
        out.r0 = kappa;
        std::string bad = out.violated();
        if (!bad.empty()) throw config_error("select_constants: " + bad);
        double lhs = std::sqrt(1.0 / gamma) -
                     cmass * std::sqrt((1.0 + gamma) / kappa);
        double rhs = std::sqrt(0.5 * (1.0 + out.theta[n - 1]));
        if (lhs > 1.1 * rhs) return out;
    }
    throw config_error("select_constants: no feasible ratio found (gamma too large)");
}

Eigen::MatrixXd ShellSampler::sample() {
    std::normal_distribution<double> gs(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int n = frame.particles();
    Eigen::MatrixXd pos(n, frame.dim);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < frame.dim; ++a) pos(i, a) = gs(rng);
    Eigen::RowVectorXd com = Eigen::RowVectorXd::Zero(frame.dim);
    double mt = frame.total_mass();
    for (int i = 0; i < n; ++i) com += frame.masses[i] * pos.row(i);
    com /= mt;
    for (int i = 0; i < n; ++i) pos.row(i) -= com;
    double n2 = 0.0;
    for (int i = 0; i < n; ++i) n2 += frame.masses[i] * pos.row(i).squaredNorm();
    double theta = constants.theta[constants.n_particles - 1];
    double target = 1.0 + theta * uni(rng);
    pos *= std::sqrt(target / n2);
    return pos;
}

PartitionOfUnity::PartitionOfUnity(JacobiFrame frame, PartitionConstants constants)
    : frame_(std::move(frame)), constants_(std::move(constants)) {
    if (frame_.particles() != constants_.n_particles)
        throw domain_error("PartitionOfUnity: frame/constants particle mismatch");
    std::string bad = constants_.violated();
    if (!bad.empty()) throw config_error("PartitionOfUnity: " + bad);
    for (const auto& b : all_decompositions(frame_.particles()))
        if (b.size() >= 2) {
            members_.push_back(b);
            frames_.push_back(clustered_frame(frame_, b));
        }
    for (std::size_t i = 0; i < members_.size(); ++i) {
        coarser_.emplace_back();
        for (std::size_t j = 0; j < members_.size(); ++j)
            if (i != j && refines(members_[i], members_[j]) &&
                members_[j].size() < members_[i].size())
                coarser_.back().push_back(static_cast<int>(j));
    }
}

double PartitionOfUnity::shell_high() const {
    return 1.0 + constants_.theta[constants_.n_particles - 1];
}

void PartitionOfUnity::check_shell(double norm2) const {
    if (norm2 < 1.0 - 1e-9 || norm2 > shell_high() + 1e-9)
        throw domain_error("partition: configuration off the shell S_theta");
}

double PartitionOfUnity::varphi(int member, const Eigen::MatrixXd& positions) const {
    const auto& b = members_[member];
    auto ns = cluster_split_norms(frames_[member], positions);
    check_shell(ns.norm2_total);
    const double sig = constants_.sigma;
    const double rho_b = constants_.rho[b.size()];
    // phi_b = prod_k phi_sigma(|z_bk|^2 > rho_{|b|}) * phi_sigma(|x_b|^2 > 1 - theta_{|b|});
    // for |b| = N the radial factor is identically 1 (x_b = x on the shell),
    // so theta_{N-1} stands in for the unused theta_N
    double out = 1.0;
    SmoothCutoff gt{sig, 0.0, true};
    for (double z2 : ns.z_norm2) {
        gt.tau = rho_b;
        out *= gt(z2);
        if (out == 0.0) return 0.0;
    }
    gt.tau = 1.0 - constants_.theta[b.size() == constants_.n_particles
                                        ? constants_.n_particles - 1
                                        : b.size()];
    out *= gt(ns.norm2_inter);
    return out;
}

std::vector<double> PartitionOfUnity::all_values(const Eigen::MatrixXd& positions) const {
    const int n = constants_.n_particles;
    std::vector<double> phis(members_.size());
    for (std::size_t i = 0; i < members_.size(); ++i) phis[i] = varphi(static_cast<int>(i), positions);
    // size sums S_j = sum over |b| = j of phi_b
    std::vector<double> ssum(n + 1, 0.0);
    for (std::size_t i = 0; i < members_.size(); ++i)
        ssum[members_[i].size()] += phis[i];
    std::vector<double> out(members_.size());
    for (std::size_t i = 0; i < members_.size(); ++i) {
        double v = phis[i];
        for (int j = members_[i].size() - 1; j >= 2; --j) v *= (1.0 - ssum[j]);
        out[i] = v;
    }
    return out;
}

double PartitionOfUnity::member_value(int member, const Eigen::MatrixXd& positions) const {
    return all_values(positions)[member];
}

SupportCheckReport support_check(PartitionOfUnity& pu, ShellSampler& sampler,
                                 int samples) {
    SupportCheckReport rep;
    const auto& members = pu.members();
    const auto& c = pu.constants();
    const JacobiFrame& frame = sampler.frame;
    for (int s = 0; s < samples; ++s) {
        Eigen::MatrixXd pos = sampler.sample();
        auto vals = pu.all_values(pos);
        double total = 0.0;
        for (double v : vals) total += v;
        double norm2 = 0.0;
        for (int i = 0; i < frame.particles(); ++i)
            norm2 += frame.masses[i] * pos.row(i).squaredNorm();
        for (std::size_t m = 0; m < members.size(); ++m) {
            if (vals[m] <= 1e-14) continue;
            const auto& b = members[m];
            for (auto [i, j] : intercluster_pairs(b)) {
                // pair norm weighted as the intercluster Jacobi vector between
                // the two clusters it connects
                int ci = b.cluster_of(i), cj = b.cluster_of(j);
                double mi = 0.0, mj = 0.0;
                for (int p : b.clusters[ci]) mi += frame.masses[p - 1];
                for (int p : b.clusters[cj]) mj += frame.masses[p - 1];
                double w = mi * mj / (mi + mj);
                double xa2 = w * pair_vector(pos, i, j).squaredNorm();
                double bound = 0.5 * c.rho[b.size()] * norm2;
                rep.worst_margin = std::min(rep.worst_margin, xa2 / bound);
                if (!(xa2 > bound)) {
                    ++rep.violations;
                    if (rep.witnesses.size() < 8) {
                        char buf[160];
                        std::snprintf(buf, sizeof(buf),
                                      "sample %d member %s pair {%d,%d}: |x_a|^2 = %.6g <= %.6g",
                                      s, b.to_string().c_str(), i, j, xa2, bound);
                        rep.witnesses.push_back(buf);
                    }
                }
            }
        }
        ++rep.samples;
        (void)total;
    }
    // finite-difference gradient bound along rigid intercluster displacements
    Rng grng(4242);
    std::normal_distribution<double> gs(0.0, 1.0);
    for (int s = 0; s < std::min(samples, 200); ++s) {
        Eigen::MatrixXd pos = sampler.sample();
        for (std::size_t m = 0; m < members.size(); ++m) {
            const auto& b = members[m];
            Eigen::MatrixXd dir = Eigen::MatrixXd::Zero(pos.rows(), pos.cols());
            Eigen::RowVectorXd shift(pos.cols());
            Eigen::RowVectorXd msum = Eigen::RowVectorXd::Zero(pos.cols());
            for (int l = 0; l < b.size(); ++l) {
                for (int a = 0; a < pos.cols(); ++a) shift(a) = gs(grng);
                double mcl = 0.0;
                for (int p : b.clusters[l]) {
                    dir.row(p - 1) = shift;
                    mcl += frame.masses[p - 1];
                }
                msum += mcl * shift;
            }
            // remove COM drift of the displacement
            msum /= frame.total_mass();
            for (int p = 0; p < pos.rows(); ++p) dir.row(p) -= msum;
            double dn = dir.norm();
            if (dn < 1e-12) continue;
            dir /= dn;
            const double h = 1e-5;
            // rescale both endpoints back onto the shell radius of pos
            auto on_shell = [&](const Eigen::MatrixXd& q) {
                double n2 = 0.0;
                for (int i = 0; i < frame.particles(); ++i)
                    n2 += frame.masses[i] * q.row(i).squaredNorm();
                double t2 = 0.0;
                for (int i = 0; i < frame.particles(); ++i)
                    t2 += frame.masses[i] * pos.row(i).squaredNorm();
                return (q * std::sqrt(t2 / n2)).eval();
            };
            // line scan with recursive zoom: the cutoff transitions are
            // width-sigma thin, so refine around the steepest interval until
            // the difference quotient stabilizes
            double lo = -0.175, hi = 0.175;
            const int nscan = 40;
            for (int level = 0; level < 5; ++level) {
                double best = 0.0, best_lo = lo, step = (hi - lo) / nscan;
                double prev = pu.member_value(static_cast<int>(m),
                                              on_shell(pos + lo * dir));
                for (int sc2 = 1; sc2 <= nscan; ++sc2) {
                    double e = lo + step * sc2;
                    double cur =
                        pu.member_value(static_cast<int>(m), on_shell(pos + e * dir));
                    double gq = std::abs(cur - prev) / step;
                    if (gq > best) {
                        best = gq;
                        best_lo = e - step;
                    }
                    prev = cur;
                }
                rep.gradient_sup = std::max(rep.gradient_sup, best);
                if (best == 0.0) break;
                lo = best_lo;
                hi = best_lo + step;
            }
            (void)h;
        }
    }
    return rep;
}

void write_support_csv(const SupportCheckReport& rep, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw config_error("write_support_csv: cannot open " + path);
    f << "witness\r\n";
    for (const auto& w : rep.witnesses) f << '"' << w << '"' << "\r\n";
}

double cluster_indicator_weight(const GridState& psi, const ClusteredFrame& cf,
                                double sigma, double delta, double r, double t) {
    if (!(t > 0.0)) throw domain_error("cluster_indicator_weight: t > 0 required");
    const JacobiFrame& frame = cf.base;
    const Grid& g = psi.grid;
    const int nvec = frame.vectors();
    if (g.dim != frame.dim * nvec)
        throw domain_error("cluster_indicator_weight: grid does not match the frame");
    const auto& b = cf.decomposition;
    auto pairs = intercluster_pairs(b);
    std::vector<double> pair_weight;
    for (auto [i, j] : pairs) {
        int ci = b.cluster_of(i), cj = b.cluster_of(j);
        double mi = cf.cluster_masses[ci], mj = cf.cluster_masses[cj];
        pair_weight.push_back(mi * mj / (mi + mj));
    }
    const double sig2 = sq(sigma * t);
    const double del2 = sq(delta * std::pow(t, r));

    double num = 0.0, den = 0.0;
    int idx[3];
    Eigen::MatrixXd jac(nvec, frame.dim);
    for (std::size_t flat = 0; flat < psi.values.size(); ++flat) {
        double w = std::norm(psi.values[flat]);
        den += w;
        if (w == 0.0) continue;
        g.unflatten(flat, idx);
        for (int v = 0; v < nvec; ++v)
            for (int a = 0; a < frame.dim; ++a) jac(v, a) = g.x(idx[v * frame.dim + a]);
        Eigen::MatrixXd pos = frame.particles_of(jac);
        auto ns = cluster_split_norms(cf, pos);
        bool keep = ns.norm2_internal <= del2;
        if (keep)
            for (std::size_t q = 0; q < pairs.size() && keep; ++q) {
                double xa2 = pair_weight[q] *
                             pair_vector(pos, pairs[q].first, pairs[q].second).squaredNorm();
                keep = xa2 >= sig2;
            }
        if (keep) num += w;
    }
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace scatterlab
