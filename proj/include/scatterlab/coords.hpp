#pragma once

#include <Eigen/Dense>

#include "scatterlab/common.hpp"

namespace scatterlab {

// A partition of the particle index set {1..N}. Canonical form: every
// cluster sorted ascending, clusters ordered by least element. Particle
// indices are 1-based throughout, matching the serialized form "{1,2}|{3}".
struct ClusterDecomposition {
    int particle_count = 0;
    std::vector<std::vector<int>> clusters;

    ClusterDecomposition() = default;
    ClusterDecomposition(int n, std::vector<std::vector<int>> cs);

    static ClusterDecomposition finest(int n);     // all singletons
    static ClusterDecomposition coarsest(int n);   // one cluster

    int size() const { return static_cast<int>(clusters.size()); }  // |b|
    int cluster_of(int particle) const;            // 0-based cluster index
    std::string to_string() const;
    static ClusterDecomposition parse(const std::string& text, int n);

    bool operator==(const ClusterDecomposition& o) const {
        return particle_count == o.particle_count && clusters == o.clusters;
    }
};

// true iff every cluster of b is contained in some cluster of a (b <= a).
bool refines(const ClusterDecomposition& b, const ClusterDecomposition& a);

// Pairs {i,j}, i<j, whose members lie in different clusters of b.
std::vector<std::pair<int, int>> intercluster_pairs(const ClusterDecomposition& b);

// All cluster decompositions of {1..N}, every size.
std::vector<ClusterDecomposition> all_decompositions(int n);

// Jacobi coordinate frame for N particles in d spatial dimensions,
// x_i = X_{i+1} - (m_1 X_1 + ... + m_i X_i)/(m_1 + ... + m_i),
// with the center of mass removed. The linear maps act per spatial axis,
// so they are stored as (N-1) x N and N x (N-1) coefficient matrices.
struct JacobiFrame {
    int dim = 3;
    std::vector<double> masses;          // size N
    std::vector<double> reduced_masses;  // size N-1
    Eigen::MatrixXd to_jacobi;           // (N-1) x N
    Eigen::MatrixXd from_jacobi;         // N x (N-1), valid on the COM-zero subspace

    int particles() const { return static_cast<int>(masses.size()); }
    int vectors() const { return particles() - 1; }
    double total_mass() const;

    // Particle positions (row j = particle j+1, COM need not be zero; it is
    // removed) -> Jacobi configuration, rows are Jacobi vectors.
    Eigen::MatrixXd jacobi_of(const Eigen::MatrixXd& particle_positions) const;
    // Jacobi configuration -> particle positions with COM = 0.
    Eigen::MatrixXd particles_of(const Eigen::MatrixXd& jacobi_config) const;
};

// masses in the given order; `order` optionally permutes the particle
// labels before the chain is built (identity when empty).
JacobiFrame jacobi_frame(const std::vector<double>& masses, int dim = 3,
                         const std::vector<int>& order = {});

// Mass-weighted inner product <x,y> = sum_i mu_i x_i . y_i of two Jacobi
// configurations (rows = Jacobi vectors).
double mass_inner_product(const JacobiFrame& frame, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& y);
double mass_norm2(const JacobiFrame& frame, const Eigen::MatrixXd& x);

// Clustered Jacobi frame x = (x_b, x^b) for a decomposition b: internal
// Jacobi frames per cluster, an intercluster frame over the cluster centers
// of mass, and the list of COM-difference vectors z_{bk}.
struct ClusteredFrame {
    JacobiFrame base;
    ClusterDecomposition decomposition;
    std::vector<JacobiFrame> internal_frames;  // one per cluster (size>=2 nontrivial)
    JacobiFrame intercluster_frame;            // over cluster masses, |b|>=2
    std::vector<std::pair<int, int>> z_pairs;  // cluster index pairs (l,m), l<m
    std::vector<double> z_reduced_masses;      // M_l M_m/(M_l+M_m) per z pair
    std::vector<double> cluster_masses;

    int dim_inter() const;     // dim(x_b) = d*(|b|-1)
    int dim_internal() const;  // dim(x^b) = d*(N-|b|)
};

ClusteredFrame clustered_frame(const JacobiFrame& frame, const ClusterDecomposition& b);

// Metric quantities of one configuration, evaluated from particle positions
// (rows = particles, COM removed internally): |x|^2 = |x_b|^2 + |x^b|^2 in
// the mass metric, plus the z_{bk} vectors with their reduced-mass norms.
struct ClusterSplitNorms {
    double norm2_total = 0.0;
    double norm2_inter = 0.0;     // |x_b|^2
    double norm2_internal = 0.0;  // |x^b|^2
    std::vector<Eigen::VectorXd> z_vectors;  // Euclidean COM differences
    std::vector<double> z_norm2;             // reduced-mass-weighted |z_bk|^2
};

ClusterSplitNorms cluster_split_norms(const ClusteredFrame& cf,
                                      const Eigen::MatrixXd& particle_positions);

// Euclidean relative vector X_i - X_j from particle positions (1-based pair).
Eigen::VectorXd pair_vector(const Eigen::MatrixXd& particle_positions, int i, int j);

}  // namespace scatterlab
