#include "qgraph/discrete_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <Eigen/SparseLU>
#include <fmt/format.h>

namespace qgraph {

namespace {

using Triplet = Eigen::Triplet<Complex>;

constexpr double kRitzTolerance = 1e-9;

// Orthogonalizes the block against the basis twice, then orthonormalizes it.
// Returns the number of columns kept (dependent directions are dropped).
ComplexMatrix extend_basis(const ComplexMatrix& basis, Eigen::Index used, ComplexMatrix block) {
    for (int pass = 0; pass < 2; ++pass) {
        if (used > 0) {
            const auto v = basis.leftCols(used);
            block -= v * (v.adjoint() * block);
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(block);
    const ComplexMatrix r = qr.matrixQR().topRows(block.cols()).triangularView<Eigen::Upper>();
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(block.rows(), block.cols());
    // Drop columns whose new direction is negligible.
    std::vector<int> keep;
    const double scale = std::max(1e-300, r.cwiseAbs().maxCoeff());
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
        if (std::abs(r(j, j)) > 1e-12 * scale) keep.push_back(static_cast<int>(j));
    }
    return select_columns(q, keep);
}

std::vector<Cluster> cluster_values(std::vector<double> values, double radius) {
    std::sort(values.begin(), values.end());
    std::vector<Cluster> out;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= values.size(); ++i) {
        if (i == values.size() || values[i] - values[i - 1] > radius) {
            if (i > start) {
                double sum = 0.0;
                for (std::size_t j = start; j < i; ++j) sum += values[j];
                Cluster c;
                c.multiplicity = static_cast<int>(i - start);
                c.center = sum / c.multiplicity;
                c.spread = values[i - 1] - values[start];
                out.push_back(c);
            }
            start = i;
        }
    }
    return out;
}

bool same_values(const std::vector<double>& a, const std::vector<double>& b, double radius) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i] - b[i]) > radius) return false;
    }
    return true;
}

}  // namespace

void GridSpec::validate() const {
    if (points_per_edge < 16) {
        throw Error(ErrorCode::input, fmt::format("points_per_edge must be >= 16, got {}", points_per_edge));
    }
    if (!(half_line_length > 0.0) || !std::isfinite(half_line_length)) {
        throw Error(ErrorCode::input, "half-line truncation length must be positive and finite");
    }
}

std::vector<int> AssembledOperator::interior_rows() const {
    std::vector<int> rows;
    for (int i = 0; i < dimension; ++i) {
        if (mass[i] != 0.0) rows.push_back(i);
    }
    return rows;
}

AssembledOperator assemble(const StarGraph& graph, const InterfaceCondition& ic, const GridSpec& grid) {
    graph.validate();
    grid.validate();
    if (graph.n() != ic.n()) throw Error(ErrorCode::input, "graph and interface condition sizes differ");
    const int n = graph.n();
    const int big_n = grid.points_per_edge;

    AssembledOperator op;
    op.n = n;
    op.nodes_per_edge = big_n + 1;
    op.dimension = n * (big_n + 1);
    op.mass = Eigen::VectorXd::Zero(op.dimension);
    std::vector<Triplet> entries;
    entries.reserve(static_cast<std::size_t>(op.dimension) * 3 + static_cast<std::size_t>(n * n * 4));

    for (int l = 0; l < n; ++l) {
        const EdgeSpec& e = graph.edges[static_cast<std::size_t>(l)];
        double length = 0.0;
        double beta = 0.0;
        switch (e.kind) {
        case EdgeKind::artificial:
            throw Error(ErrorCode::unsupported, "the finite-difference model has no artificial edges")
                .with_edge(static_cast<std::size_t>(l));
        case EdgeKind::half_line:
            length = grid.half_line_length;
            break;
        case EdgeKind::regular:
            length = e.length;
            beta = e.beta;
            break;
        }
        const double h = length / big_n;
        const int base = l * (big_n + 1);
        op.offsets.push_back(base);
        op.h.push_back(h);
        const double inv_h2 = 1.0 / (h * h);
        for (int j = 1; j < big_n; ++j) {
            const int row = base + j;
            entries.emplace_back(row, row - 1, -inv_h2);
            entries.emplace_back(row, row, 2.0 * inv_h2 + e.potential(j * h));
            entries.emplace_back(row, row + 1, -inv_h2);
            op.mass[row] = 1.0;
        }
        // Outer end: cos(beta) u + sin(beta) u' = 0 with a backward three-point derivative.
        const int last = base + big_n;
        const double cb = std::cos(beta);
        const double sb = std::sin(beta);
        if (sb == 0.0) {
            entries.emplace_back(last, last, 1.0);
        } else {
            entries.emplace_back(last, last, cb + sb * 3.0 / (2.0 * h));
            entries.emplace_back(last, last - 1, -sb * 4.0 / (2.0 * h));
            entries.emplace_back(last, last - 2, sb * 1.0 / (2.0 * h));
        }
    }

    // Interface rows: A u(0) + B u'(0) = 0 with u'(0) from a forward three-point stencil.
    for (int i = 0; i < n; ++i) {
        const int row = op.offsets[static_cast<std::size_t>(i)];
        op.constraint_rows.push_back(row);
        for (int l = 0; l < n; ++l) {
            const int base = op.offsets[static_cast<std::size_t>(l)];
            const double h = op.h[static_cast<std::size_t>(l)];
            const Complex a = ic.a()(i, l);
            const Complex b = ic.b()(i, l) / (2.0 * h);
            if (a != 0.0 || b != 0.0) entries.emplace_back(row, base, a - 3.0 * b);
            if (b != 0.0) {
                entries.emplace_back(row, base + 1, 4.0 * b);
                entries.emplace_back(row, base + 2, -b);
            }
        }
    }

    op.k.resize(op.dimension, op.dimension);
    op.k.setFromTriplets(entries.begin(), entries.end());
    op.k.makeCompressed();
    return op;
}

SpectrumReport eig_clusters(const AssembledOperator& op, double lo, double hi, double cluster_radius) {
    if (!(hi >= lo)) throw Error(ErrorCode::input, fmt::format("empty window [{}, {}]", lo, hi));
    if (!(cluster_radius > 0.0)) throw Error(ErrorCode::input, "cluster radius must be positive");
    SpectrumReport report;
    report.window_lo = lo;
    report.window_hi = hi;
    const int dim = op.dimension;

    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    // A small imaginary offset keeps the shifted pencil away from exact singularity.
    const Complex shift(center, 1e-3 * (1.0 + half));

    SparseComplex shifted = op.k;
    for (int i = 0; i < dim; ++i) {
        if (op.mass[i] != 0.0) shifted.coeffRef(i, i) -= shift * op.mass[i];
    }
    shifted.makeCompressed();
    Eigen::SparseLU<SparseComplex> lu;
    lu.compute(shifted);
    if (lu.info() != Eigen::Success) {
        throw Error(ErrorCode::solver, fmt::format("sparse LU failed at shift {}: {}", center, lu.lastErrorMessage()));
    }
    auto apply = [&](const ComplexMatrix& x) -> ComplexMatrix {
        ComplexMatrix y = op.mass.asDiagonal() * x;
        ComplexMatrix out = lu.solve(y);
        if (lu.info() != Eigen::Success) throw Error(ErrorCode::solver, "sparse LU solve failed");
        return out;
    };

    // Weyl-law style estimate of how many eigenvalues lie in the window.
    double total_length = 0.0;
    for (double h : op.h) total_length += h * (op.nodes_per_edge - 1);
    const double count_hint = total_length * (std::sqrt(std::max(hi, 0.0)) - std::sqrt(std::max(lo, 0.0))) / M_PI;
    const int block = op.n + 1;
    const int max_cols = std::min(dim - 1, 2000);
    int target = std::min(max_cols, std::max(12 * block, static_cast<int>(4.0 * (count_hint + 2.0 * op.n))));

    std::mt19937_64 rng(0x5eed);
    ComplexMatrix basis(dim, max_cols + block);
    ComplexMatrix images(dim, max_cols + block);
    Eigen::Index used = 0;
    ComplexMatrix next = extend_basis(basis, 0, apply(complex_gaussian(dim, block, rng)));

    std::vector<double> previous;
    bool have_previous = false;
    while (true) {
        while (used < target && next.cols() > 0) {
            const Eigen::Index add = std::min<Eigen::Index>(next.cols(), basis.cols() - used);
            basis.middleCols(used, add) = next.leftCols(add);
            images.middleCols(used, add) = apply(next.leftCols(add));
            const ComplexMatrix candidate = images.middleCols(used, add);
            used += add;
            next = extend_basis(basis, used, candidate);
        }
        const bool exhausted = next.cols() == 0;

        // Rayleigh-Ritz on the Krylov basis.
        const auto v = basis.leftCols(used);
        const auto w = images.leftCols(used);
        const ComplexMatrix t = v.adjoint() * w;
        Eigen::ComplexEigenSolver<ComplexMatrix> es(t);
        if (es.info() != Eigen::Success) throw Error(ErrorCode::solver, "Ritz eigenproblem failed");

        std::vector<double> in_window;
        std::vector<Complex> lambdas;
        bool all_converged = true;
        for (Eigen::Index j = 0; j < t.rows(); ++j) {
            const Complex theta = es.eigenvalues()[j];
            if (std::abs(theta) < 1e-300) continue;
            const Complex lambda = shift + 1.0 / theta;
            if (lambda.real() < lo - cluster_radius || lambda.real() > hi + cluster_radius) continue;
            if (std::abs(lambda.imag()) > std::max(cluster_radius, 1e-2 * (1.0 + half))) continue;
            const ComplexVector y = es.eigenvectors().col(j);
            const double residual = (w * y - theta * (v * y)).norm() / y.norm();
            if (residual > kRitzTolerance * std::abs(theta)) {
                all_converged = false;
                continue;
            }
            if (lambda.real() < lo || lambda.real() > hi) continue;
            lambdas.push_back(lambda);
            if (std::abs(lambda.imag()) <= cluster_radius) in_window.push_back(lambda.real());
        }
        std::sort(in_window.begin(), in_window.end());

        const bool stable = have_previous && same_values(previous, in_window, cluster_radius * 1e-2);
        if ((all_converged && stable) || exhausted) {
            report.eigenvalues = lambdas;
            report.clusters = cluster_values(in_window, cluster_radius);
            return report;
        }
        if (used >= max_cols) {
            throw Error(ErrorCode::solver,
                        fmt::format("Arnoldi did not settle within {} vectors for window [{}, {}]", used, lo, hi));
        }
        previous = in_window;
        have_previous = true;
        target = std::min(max_cols, static_cast<int>(used + std::max<Eigen::Index>(4 * block, used / 2)));
    }
}

int resolvent_rank_diff(const StarGraph& graph, const InterfaceCondition& ic1, const InterfaceCondition& ic2,
                        Complex z, const GridSpec& grid, double svd_threshold) {
    if (z.imag() == 0.0) throw Error(ErrorCode::input, "resolvent needs Im z != 0");
    const AssembledOperator op1 = assemble(graph, ic1, grid);
    const AssembledOperator op2 = assemble(graph, ic2, grid);
    const std::vector<int> rows = op1.interior_rows();
    const auto inner = static_cast<Eigen::Index>(rows.size());

    // Right-hand sides are the unit vectors of interior nodes.
    ComplexMatrix rhs = ComplexMatrix::Zero(op1.dimension, inner);
    for (Eigen::Index j = 0; j < inner; ++j) rhs(rows[static_cast<std::size_t>(j)], j) = 1.0;

    auto resolvent = [&](const AssembledOperator& op) {
        SparseComplex shifted = op.k;
        for (int i : rows) shifted.coeffRef(i, i) -= z;
        shifted.makeCompressed();
        Eigen::SparseLU<SparseComplex> lu;
        lu.compute(shifted);
        if (lu.info() != Eigen::Success) {
            throw Error(ErrorCode::solver, "shifted finite-difference matrix is singular");
        }
        const ComplexMatrix full = lu.solve(rhs);
        ComplexMatrix out(inner, inner);
        for (Eigen::Index i = 0; i < inner; ++i) out.row(i) = full.row(rows[static_cast<std::size_t>(i)]);
        return out;
    };
    const ComplexMatrix r1 = resolvent(op1);
    const ComplexMatrix diff = r1 - resolvent(op2);
    // A difference at rounding level relative to the resolvent itself is zero.
    if (diff.norm() <= 1e-10 * r1.norm()) return 0;
    const Eigen::VectorXd sigma = singular_values(diff);
    int rank = 0;
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
        if (sigma[k] > svd_threshold * sigma[0]) ++rank;
    }
    return rank;
}

void write_clusters_csv(std::ostream& out, const SpectrumReport& report) {
    out << "center,multiplicity,spread\n";
    for (const auto& c : report.clusters) {
        out << fmt::format("{:.12g},{},{:.3e}\n", c.center, c.multiplicity, c.spread);
    }
}

void write_dense_binary(std::ostream& out, const AssembledOperator& op) {
    const ComplexMatrix dense(op.k);
    for (Eigen::Index i = 0; i < dense.rows(); ++i) {
        for (Eigen::Index j = 0; j < dense.cols(); ++j) {
            const double parts[2] = {dense(i, j).real(), dense(i, j).imag()};
            out.write(reinterpret_cast<const char*>(parts), sizeof(parts));
        }
    }
}

}  // namespace qgraph
