#include "qgraph/numeric_core.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qgraph {

namespace {

constexpr int kMaxMinorDimension = 12;

struct Svd {
    Eigen::VectorXd sigma;
    ComplexMatrix u;
    ComplexMatrix v;
};

// Full U and V are needed for kernels of wide matrices and for complements.
Svd full_svd(const ComplexMatrix& m) {
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {svd.singularValues(), svd.matrixU(), svd.matrixV()};
}

std::size_t count_above(const Eigen::VectorXd& sigma, double threshold) {
    std::size_t r = 0;
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
        if (sigma[k] > threshold) ++r;
    }
    return r;
}

double resolve_reference(const Eigen::VectorXd& sigma, double reference) {
    if (reference > 0.0) return reference;
    return sigma.size() > 0 ? sigma[0] : 0.0;
}

void require_nonempty(const ComplexMatrix& m, std::string_view what) {
    if (m.rows() == 0 || m.cols() == 0) {
        throw Error(ErrorCode::input, fmt::format("{}: empty matrix", what));
    }
}

}  // namespace

RankTolerance::RankTolerance(double relative_threshold) : threshold_(relative_threshold) {
    if (!(relative_threshold > 0.0 && relative_threshold < 1.0)) {
        throw Error(ErrorCode::input,
                    fmt::format("rank tolerance must lie in (0,1), got {}", relative_threshold));
    }
}

void require_finite(const ComplexMatrix& m, std::string_view what) {
    if (!m.allFinite()) {
        throw Error(ErrorCode::input, fmt::format("{}: non-finite entry", what));
    }
}

Eigen::VectorXd singular_values(const ComplexMatrix& m) {
    if (m.size() == 0) return {};
    // Not BDCSVD: the divide-and-conquer path of Eigen 3.4 returns wrong, unsorted
    // values on some complex matrices of a few hundred rows.
    if (m.rows() <= 64 && m.cols() <= 64) return Eigen::JacobiSVD<ComplexMatrix>(m).singularValues();

    // Large inputs are usually of low rank here. Column-pivoted QR first; trailing rows
    // of R below rounding level only move singular values by their norm, so drop them.
    const Eigen::Index k = std::min(m.rows(), m.cols());
    const Eigen::ColPivHouseholderQR<ComplexMatrix> qr(m);
    const ComplexMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const double floor = 1e-15 * r.norm();
    Eigen::Index keep = k;
    double tail = 0.0;
    while (keep > 0) {
        const double next = std::hypot(tail, r.row(keep - 1).norm());
        if (next > floor) break;
        tail = next;
        --keep;
    }
    Eigen::VectorXd sigma = Eigen::VectorXd::Zero(k);
    if (keep > 0) sigma.head(keep) = Eigen::JacobiSVD<ComplexMatrix>(r.topRows(keep)).singularValues();
    return sigma;
}

std::size_t rank_tol(const ComplexMatrix& m, RankTolerance tol) {
    return rank_tol(m, tol, -1.0);
}

std::size_t rank_tol(const ComplexMatrix& m, RankTolerance tol, double reference) {
    require_nonempty(m, "rank_tol");
    require_finite(m, "rank_tol");
    const Eigen::VectorXd sigma = singular_values(m);
    const double ref = resolve_reference(sigma, reference);
    if (ref == 0.0) return 0;
    return count_above(sigma, tol.relative_threshold() * ref);
}

ComplexMatrix null_space(const ComplexMatrix& m, RankTolerance tol) {
    return null_space(m, tol, -1.0);
}

ComplexMatrix null_space(const ComplexMatrix& m, RankTolerance tol, double reference) {
    require_nonempty(m, "null_space");
    require_finite(m, "null_space");
    const Svd svd = full_svd(m);
    const double ref = resolve_reference(svd.sigma, reference);
    const std::size_t r = ref == 0.0 ? 0 : count_above(svd.sigma, tol.relative_threshold() * ref);
    const Eigen::Index cols = m.cols();
    return svd.v.rightCols(cols - static_cast<Eigen::Index>(r));
}

ComplexMatrix orthonormal_basis(const ComplexMatrix& m, RankTolerance tol) {
    return orthonormal_basis(m, tol, -1.0);
}

ComplexMatrix orthonormal_basis(const ComplexMatrix& m, RankTolerance tol, double reference) {
    if (m.cols() == 0) return ComplexMatrix(m.rows(), 0);
    require_finite(m, "orthonormal_basis");
    const Svd svd = full_svd(m);
    const double ref = resolve_reference(svd.sigma, reference);
    const std::size_t r = ref == 0.0 ? 0 : count_above(svd.sigma, tol.relative_threshold() * ref);
    return svd.u.leftCols(static_cast<Eigen::Index>(r));
}

ComplexMatrix orthogonal_complement(const ComplexMatrix& m, RankTolerance tol) {
    const Eigen::Index n = m.rows();
    if (m.cols() == 0) return ComplexMatrix::Identity(n, n);
    require_finite(m, "orthogonal_complement");
    const Svd svd = full_svd(m);
    const double ref = resolve_reference(svd.sigma, -1.0);
    const std::size_t r = ref == 0.0 ? 0 : count_above(svd.sigma, tol.relative_threshold() * ref);
    return svd.u.rightCols(n - static_cast<Eigen::Index>(r));
}

std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.push_back(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) {
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

ComplexMatrix select_columns(const ComplexMatrix& m, const std::vector<int>& cols) {
    ComplexMatrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
    }
    return out;
}

bool all_minors_nonzero(const ComplexMatrix& m, RankTolerance tol) {
    require_nonempty(m, "all_minors_nonzero");
    require_finite(m, "all_minors_nonzero");
    const int rows = static_cast<int>(m.rows());
    const int cols = static_cast<int>(m.cols());
    if (rows > kMaxMinorDimension || cols > kMaxMinorDimension) {
        throw Error(ErrorCode::input,
                    fmt::format("all_minors_nonzero: {}x{} exceeds the {}x{} enumeration limit",
                                rows, cols, kMaxMinorDimension, kMaxMinorDimension));
    }
    const double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) return false;
    const int kmax = std::min(rows, cols);
    for (int k = 1; k <= kmax; ++k) {
        const double threshold = tol.relative_threshold() * std::pow(scale, k);
        const auto row_sets = combinations(rows, k);
        const auto col_sets = combinations(cols, k);
        ComplexMatrix sub(k, k);
        for (const auto& rs : row_sets) {
            for (const auto& cs : col_sets) {
                for (int i = 0; i < k; ++i) {
                    for (int j = 0; j < k; ++j) {
                        sub(i, j) = m(rs[static_cast<std::size_t>(i)], cs[static_cast<std::size_t>(j)]);
                    }
                }
                if (std::abs(sub.determinant()) <= threshold) return false;
            }
        }
    }
    return true;
}

std::size_t intersection_dim(const ComplexMatrix& u, const ComplexMatrix& v, RankTolerance tol) {
    if (u.rows() != v.rows()) {
        throw Error(ErrorCode::input,
                    fmt::format("intersection_dim: heights differ ({} vs {})", u.rows(), v.rows()));
    }
    const ComplexMatrix bu = orthonormal_basis(u, tol);
    const ComplexMatrix bv = orthonormal_basis(v, tol);
    if (bu.cols() == 0 || bv.cols() == 0) return 0;
    ComplexMatrix stacked(u.rows(), bu.cols() + bv.cols());
    stacked << bu, bv;
    const std::size_t joint = rank_tol(stacked, tol, 1.0);
    return static_cast<std::size_t>(bu.cols() + bv.cols()) - joint;
}

bool subspace_equal(const ComplexMatrix& u, const ComplexMatrix& v, RankTolerance tol) {
    if (u.rows() != v.rows()) {
        throw Error(ErrorCode::input,
                    fmt::format("subspace_equal: heights differ ({} vs {})", u.rows(), v.rows()));
    }
    const ComplexMatrix bu = orthonormal_basis(u, tol);
    const ComplexMatrix bv = orthonormal_basis(v, tol);
    if (bu.cols() != bv.cols()) return false;
    if (bu.cols() == 0) return true;
    // Residual of projecting each orthonormal basis onto the other span.
    const double ru = (bu - bv * (bv.adjoint() * bu)).norm();
    const double rv = (bv - bu * (bu.adjoint() * bv)).norm();
    return std::max(ru, rv) <= tol.relative_threshold();
}

ComplexMatrix complex_gaussian(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0));
    ComplexMatrix g(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) g(i, j) = Complex(normal(rng), normal(rng));
    }
    return g;
}

ComplexMatrix haar_unitary(int n, std::mt19937_64& rng) {
    const ComplexMatrix g = complex_gaussian(n, n, rng);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const Complex d = r(j, j);
        const double a = std::abs(d);
        if (a > 0.0) q.col(j) *= d / a;
    }
    return q;
}

double hermitian_defect(const ComplexMatrix& m) { return (m - m.adjoint()).norm(); }

}  // namespace qgraph
