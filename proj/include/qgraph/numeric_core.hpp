#pragma once

// Tolerance-aware dense complex linear algebra shared by every other module.
//
// Subspaces are passed around as matrices whose columns span them; the
// functions below never assume those columns are orthonormal unless stated.

#include <complex>
#include <cstddef>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qgraph/error.hpp"

namespace qgraph {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr Complex I_UNIT{0.0, 1.0};

/// Relative threshold used to decide which singular values count as nonzero.
class RankTolerance {
public:
    constexpr RankTolerance() = default;
    explicit RankTolerance(double relative_threshold);

    double relative_threshold() const noexcept { return threshold_; }

private:
    double threshold_ = 1e-8;
};

/// Throws ErrorCode::input when any entry is NaN or infinite.
void require_finite(const ComplexMatrix& m, std::string_view what);

/// Singular values in decreasing order.
Eigen::VectorXd singular_values(const ComplexMatrix& m);

/// Number of singular values above `tol * sigma_1`; 0 for the zero matrix.
std::size_t rank_tol(const ComplexMatrix& m, RankTolerance tol = {});

/// Number of singular values above `tol * reference`. Use this when the
/// natural scale of the problem is known and the matrix itself may be
/// (numerically) zero, so that a relative test against its own sigma_1
/// would count rounding noise as rank.
std::size_t rank_tol(const ComplexMatrix& m, RankTolerance tol, double reference);

/// Orthonormal basis (as columns) of the numerical kernel of `m`.
ComplexMatrix null_space(const ComplexMatrix& m, RankTolerance tol = {});
ComplexMatrix null_space(const ComplexMatrix& m, RankTolerance tol, double reference);

/// Orthonormal basis of the column span of `m`.
ComplexMatrix orthonormal_basis(const ComplexMatrix& m, RankTolerance tol = {});
ComplexMatrix orthonormal_basis(const ComplexMatrix& m, RankTolerance tol, double reference);

/// Orthonormal basis of the orthogonal complement of span(m) in C^rows.
ComplexMatrix orthogonal_complement(const ComplexMatrix& m, RankTolerance tol = {});

/// True iff every square minor of every order k exceeds tol * (max |entry|)^k.
/// Inputs with more than 12 rows or columns are rejected.
bool all_minors_nonzero(const ComplexMatrix& m, RankTolerance tol = {});

/// True iff span(U) == span(V) up to tolerance.
bool subspace_equal(const ComplexMatrix& u, const ComplexMatrix& v, RankTolerance tol = {});

/// dim(span U ∩ span V).
std::size_t intersection_dim(const ComplexMatrix& u, const ComplexMatrix& v,
                             RankTolerance tol = {});

/// All k-element subsets of {0, ..., n-1} in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k);

/// Columns of `m` selected by `cols`, in the given order.
ComplexMatrix select_columns(const ComplexMatrix& m, const std::vector<int>& cols);

/// Haar-distributed unitary matrix (QR of a complex Ginibre matrix, phase-fixed).
ComplexMatrix haar_unitary(int n, std::mt19937_64& rng);

/// Matrix of i.i.d. standard complex Gaussians.
ComplexMatrix complex_gaussian(int rows, int cols, std::mt19937_64& rng);

/// Frobenius norm of the Hermitian defect, ||M - M*||_F.
double hermitian_defect(const ComplexMatrix& m);

}  // namespace qgraph
