#pragma once

// Finite-difference model of the coupled operator on a star graph, used as an
// independent check on the Weyl-function machinery.
//
// Each edge carries nodes 0..N. Rows at interior nodes hold the three-point
// Laplacian plus the potential; the row at node 0 of edge i holds the i-th
// interface equation and the row at node N the outer boundary condition.
// Those rows are algebraic, so the spectrum is that of the pencil K - lambda M
// with M the identity on interior rows and zero elsewhere.

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Sparse>

#include "qgraph/interface_conditions.hpp"
#include "qgraph/weyl_functions.hpp"

namespace qgraph {

struct GridSpec {
    int points_per_edge = 2000;
    double half_line_length = 40.0;

    void validate() const;
};

using SparseComplex = Eigen::SparseMatrix<Complex>;

struct AssembledOperator {
    int n = 0;
    int dimension = 0;
    SparseComplex k;
    Eigen::VectorXd mass;              // 1 on interior rows, 0 on algebraic rows
    std::vector<int> constraint_rows;  // vertex rows, one per interface equation
    std::vector<int> offsets;          // index of node 0 of each edge
    std::vector<double> h;             // mesh width per edge
    int nodes_per_edge = 0;            // N + 1

    std::vector<int> interior_rows() const;
};

/// Rejects artificial edges. Half-lines are cut at grid.half_line_length with u = 0 there.
AssembledOperator assemble(const StarGraph& graph, const InterfaceCondition& ic, const GridSpec& grid = {});

struct Cluster {
    double center = 0.0;
    int multiplicity = 0;
    double spread = 0.0;
};

struct SpectrumReport {
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::vector<Cluster> clusters;
    std::vector<Complex> eigenvalues;  // every converged finite eigenvalue found in the window
};

/// Eigenvalues with real part in [lo, hi] via shift-invert block Arnoldi.
/// Values with |Im| > cluster_radius are dropped; the rest are grouped by
/// single linkage with that radius.
SpectrumReport eig_clusters(const AssembledOperator& op, double lo, double hi, double cluster_radius = 1e-3);

/// Numerical rank of the difference of the two discrete resolvents at z,
/// counted relative to the largest singular value of the difference. A
/// difference at rounding level next to the resolvent counts as rank 0.
int resolvent_rank_diff(const StarGraph& graph, const InterfaceCondition& ic1, const InterfaceCondition& ic2,
                        Complex z, const GridSpec& grid, double svd_threshold = 1e-6);

/// center, multiplicity, spread
void write_clusters_csv(std::ostream& out, const SpectrumReport& report);

/// Row-major dense K as little-endian (re, im) double pairs, preceded by nothing.
void write_dense_binary(std::ostream& out, const AssembledOperator& op);

}  // namespace qgraph
