#include "qgraph/interface_conditions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace qgraph {

namespace {

ComplexMatrix hstack(const ComplexMatrix& left, const ComplexMatrix& right) {
    ComplexMatrix out(left.rows(), left.cols() + right.cols());
    out << left, right;
    return out;
}

ComplexMatrix vstack(const ComplexMatrix& top, const ComplexMatrix& bottom) {
    ComplexMatrix out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
}

std::vector<int> complement_indices(int n, const std::vector<int>& chosen) {
    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) out.push_back(i);
    }
    return out;
}

double smallest_singular_value(const ComplexMatrix& m) {
    if (m.size() == 0) return 1.0;
    const Eigen::VectorXd s = singular_values(m);
    return s[s.size() - 1];
}

// Max-abs residual used by the internal consistency checks of the normal form.
double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

InterfaceCondition validate(const ComplexMatrix& a, const ComplexMatrix& b, RankTolerance tol) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        throw Error(ErrorCode::input,
                    fmt::format("interface matrices must be square of equal size, got {}x{} and {}x{}",
                                a.rows(), a.cols(), b.rows(), b.cols()));
    }
    if (a.rows() < 1) throw Error(ErrorCode::input, "interface condition needs n >= 1");
    require_finite(a, "A");
    require_finite(b, "B");

    const ComplexMatrix ab = hstack(a, b);
    const double scale = ab.squaredNorm();
    if (scale == 0.0) throw Error(ErrorCode::d3_violation, "rank(A,B) = 0", 0.0);

    const double residual = (a * b.adjoint() - b * a.adjoint()).norm();
    if (residual > tol.relative_threshold() * scale) {
        throw Error(ErrorCode::d3_violation,
                    fmt::format("AB* != BA*: residual {:.3e} (scale {:.3e})", residual, scale), residual);
    }
    const std::size_t rank_ab = rank_tol(ab, tol);
    if (rank_ab != static_cast<std::size_t>(a.rows())) {
        const Eigen::VectorXd s = singular_values(ab);
        throw Error(ErrorCode::d3_violation,
                    fmt::format("rank(A,B) = {} < n = {}", rank_ab, a.rows()), s[s.size() - 1]);
    }

    InterfaceCondition ic;
    ic.a_ = a;
    ic.b_ = b;
    ic.r_ = b.isZero(0.0) ? 0 : static_cast<int>(rank_tol(b, tol, std::sqrt(scale)));
    ic.d3_residual_ = residual;
    return ic;
}

InterfaceCondition decoupled_condition(int n) {
    return validate(ComplexMatrix::Identity(n, n), ComplexMatrix::Zero(n, n));
}

InterfaceCondition antidecoupled_condition(int n) {
    return validate(ComplexMatrix::Zero(n, n), ComplexMatrix::Identity(n, n));
}

InterfaceCondition standard_condition(int n) {
    if (n < 2) throw Error(ErrorCode::input, "standard condition needs n >= 2");
    ComplexMatrix a = ComplexMatrix::Zero(n, n);
    ComplexMatrix b = ComplexMatrix::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        a(i, i) = 1.0;
        a(i, n - 1) = -1.0;
    }
    b.row(n - 1).setOnes();
    return validate(a, b);
}

ComplexMatrix permutation_matrix(const std::vector<int>& perm) {
    const auto n = static_cast<Eigen::Index>(perm.size());
    ComplexMatrix p = ComplexMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) p(perm[static_cast<std::size_t>(j)], j) = 1.0;
    return p;
}

InterfaceCondition transform(const InterfaceCondition& ic, const ComplexMatrix& q,
                             const std::vector<int>& perm, RankTolerance tol) {
    const ComplexMatrix p = permutation_matrix(perm);
    return validate(q * ic.a() * p, q * ic.b() * p, tol);
}

// --- (D4) ------------------------------------------------------------------

bool d4_by_columns(const ComplexMatrix& b, int r, RankTolerance tol) {
    if (r == 0) return true;
    const double ref = singular_values(b)[0];
    const int n = static_cast<int>(b.cols());
    for (const auto& cols : combinations(n, r)) {
        if (rank_tol(select_columns(b, cols), tol, ref) != static_cast<std::size_t>(r)) return false;
    }
    return true;
}

bool d4_by_coordinate_planes(const ComplexMatrix& b, int r, RankTolerance tol) {
    if (r == 0) return true;
    const double ref = singular_values(b)[0];
    const int n = static_cast<int>(b.cols());
    for (int dim = 1; dim <= r; ++dim) {
        for (const auto& cols : combinations(n, dim)) {
            // B restricted to span{e_i : i in cols} is B times the coordinate embedding.
            const ComplexMatrix restricted = b * coordinate_plane(n, cols);
            if (null_space(restricted, tol, ref).cols() != 0) return false;
        }
    }
    return true;
}

bool d4_by_projection_ranks(const ComplexMatrix& b, int r, RankTolerance tol) {
    const int n = static_cast<int>(b.cols());
    const double ref = r == 0 ? 0.0 : std::pow(singular_values(b)[0], 2);
    for (int dim = 1; dim <= n; ++dim) {
        for (const auto& cols : combinations(n, dim)) {
            ComplexMatrix x = ComplexMatrix::Zero(n, n);
            for (int i : cols) x(i, i) = 1.0;
            const ComplexMatrix bxb = b * x * b.adjoint();
            const std::size_t lhs = ref == 0.0 ? 0 : rank_tol(bxb, tol, ref);
            if (lhs != static_cast<std::size_t>(std::min(dim, r))) return false;
        }
    }
    return true;
}

bool satisfies_d4(const ComplexMatrix& b, RankTolerance tol) {
    const int r = b.isZero(0.0) ? 0 : static_cast<int>(rank_tol(b, tol));
    const bool by_columns = d4_by_columns(b, r, tol);
    const bool by_planes = d4_by_coordinate_planes(b, r, tol);
    const bool by_ranks = d4_by_projection_ranks(b, r, tol);
    if (by_columns != by_planes || by_planes != by_ranks) {
        throw Error(ErrorCode::internal,
                    fmt::format("(D4) criteria disagree: columns={} planes={} ranks={}", by_columns,
                                by_planes, by_ranks));
    }
    return by_columns;
}

bool satisfies_d4(const InterfaceCondition& ic, RankTolerance tol) {
    const int r = ic.r();
    const ComplexMatrix& b = ic.b();
    const bool by_columns = d4_by_columns(b, r, tol);
    const bool by_planes = d4_by_coordinate_planes(b, r, tol);
    const bool by_ranks = d4_by_projection_ranks(b, r, tol);
    if (by_columns != by_planes || by_planes != by_ranks) {
        throw Error(ErrorCode::internal,
                    fmt::format("(D4) criteria disagree: columns={} planes={} ranks={}", by_columns,
                                by_planes, by_ranks));
    }
    return by_columns;
}

MinorCriteria minor_criteria(const ComplexMatrix& b1, RankTolerance tol) {
    const int r = static_cast<int>(b1.rows());
    const int nr = static_cast<int>(b1.cols());
    if (r < 1 || nr < 1) throw Error(ErrorCode::input, "minor_criteria needs 1 <= r < n");
    const int n = r + nr;

    ComplexMatrix b = ComplexMatrix::Zero(n, n);
    b.bottomLeftCorner(r, nr) = b1;
    b.bottomRightCorner(r, r).setIdentity();

    const double scale = std::max(1.0, b1.cwiseAbs().maxCoeff());
    auto maximal_minors_nonzero = [&](const ComplexMatrix& m) {
        const int k = static_cast<int>(m.rows());
        const double threshold = tol.relative_threshold() * std::pow(scale, k);
        for (const auto& cols : combinations(static_cast<int>(m.cols()), k)) {
            if (std::abs(select_columns(m, cols).determinant()) <= threshold) return false;
        }
        return true;
    };

    MinorCriteria out;
    out.d4 = d4_by_columns(b, r, tol);
    out.r_minors = maximal_minors_nonzero(hstack(b1, ComplexMatrix::Identity(r, r)));
    out.complement_minors =
        maximal_minors_nonzero(hstack(ComplexMatrix::Identity(nr, nr), -b1.adjoint()));
    out.b1_minors = all_minors_nonzero(b1, tol);
    return out;
}

// --- Normal form -----------------------------------------------------------

ComplexMatrix NormalForm::assembled_a() const {
    ComplexMatrix a = ComplexMatrix::Zero(n, n);
    a.topLeftCorner(n - r, n - r).setIdentity();
    a.topRightCorner(n - r, r) = a1;
    a.bottomRightCorner(r, r) = a2;
    return a;
}

ComplexMatrix NormalForm::assembled_b() const {
    ComplexMatrix b = ComplexMatrix::Zero(n, n);
    b.bottomLeftCorner(r, n - r) = -a1.adjoint();
    b.bottomRightCorner(r, r).setIdentity();
    return b;
}

NormalForm normal_form_from_blocks(const ComplexMatrix& a1, const ComplexMatrix& a2) {
    if (a2.rows() != a2.cols() || a1.cols() != a2.rows()) {
        throw Error(ErrorCode::input, "normal form blocks have inconsistent shapes");
    }
    NormalForm nf;
    nf.r = static_cast<int>(a2.rows());
    nf.n = static_cast<int>(a1.rows()) + nf.r;
    nf.a1 = a1;
    nf.a2 = a2;
    nf.q = ComplexMatrix::Identity(nf.n, nf.n);
    nf.permutation.resize(static_cast<std::size_t>(nf.n));
    std::iota(nf.permutation.begin(), nf.permutation.end(), 0);
    nf.p = permutation_matrix(nf.permutation);
    return nf;
}

NormalForm to_normal_form(const InterfaceCondition& ic, RankTolerance tol) {
    const int n = ic.n();
    const int r = ic.r();
    const ComplexMatrix& a = ic.a();
    const ComplexMatrix& b = ic.b();

    NormalForm nf;
    nf.n = n;
    nf.r = r;
    nf.permutation.resize(static_cast<std::size_t>(n));
    std::iota(nf.permutation.begin(), nf.permutation.end(), 0);

    if (r == 0) {
        // B = 0 forces A invertible; Q = A^{-1} gives (I, 0).
        nf.a1 = ComplexMatrix(n, 0);
        nf.a2 = ComplexMatrix(0, 0);
        nf.q = a.inverse();
        nf.p = permutation_matrix(nf.permutation);
        return nf;
    }
    if (!satisfies_d4(ic, tol)) {
        throw Error(ErrorCode::d4_violation, "normal form requires (D4)");
    }

    // Step 1: Q1 kills the top n-r rows of B (left singular vectors of the kernel of B* first).
    Eigen::JacobiSVD<ComplexMatrix> svd(b, Eigen::ComputeFullU);
    const ComplexMatrix u = svd.matrixU();
    ComplexMatrix q1(n, n);
    q1.topRows(n - r) = u.rightCols(n - r).adjoint();
    q1.bottomRows(r) = u.leftCols(r).adjoint();
    const ComplexMatrix q1a = q1 * a;
    ComplexMatrix q1b = q1 * b;
    q1b.topRows(n - r).setZero();

    // Step 2: choose the n-r leading columns. Both the leading block of the top
    // rows of Q1A and the trailing block of the bottom rows of Q1B must be invertible.
    const ComplexMatrix a_top = q1a.topRows(n - r);
    const ComplexMatrix b_bottom = q1b.bottomRows(r);
    const double a_scale = n - r > 0 ? singular_values(a_top)[0] : 1.0;
    const double b_scale = singular_values(b_bottom)[0];
    std::vector<int> best_leading;
    double best_quality = -1.0;
    for (const auto& leading : combinations(n, n - r)) {
        const std::vector<int> trailing = complement_indices(n, leading);
        const double qa = smallest_singular_value(select_columns(a_top, leading)) / a_scale;
        const double qb = smallest_singular_value(select_columns(b_bottom, trailing)) / b_scale;
        const double quality = std::min(qa, qb);
        if (quality > tol.relative_threshold() && quality > best_quality) {
            best_quality = quality;
            best_leading = leading;
        }
    }
    if (best_quality < 0.0) {
        throw Error(ErrorCode::d4_violation, "no column order makes the normal-form blocks invertible");
    }
    std::vector<int> perm = best_leading;
    for (int j : complement_indices(n, best_leading)) perm.push_back(j);
    const ComplexMatrix p = permutation_matrix(perm);

    // Step 3: normalize the diagonal blocks.
    const ComplexMatrix ap = q1a * p;
    const ComplexMatrix bp = q1b * p;
    ComplexMatrix scale = ComplexMatrix::Zero(n, n);
    if (n - r > 0) scale.topLeftCorner(n - r, n - r) = ap.topLeftCorner(n - r, n - r).inverse();
    scale.bottomRightCorner(r, r) = bp.bottomRightCorner(r, r).inverse();
    ComplexMatrix q = scale * q1;
    // Clear the lower-left block of A with the top rows; B is untouched since its top rows vanish.
    if (n - r > 0) {
        const ComplexMatrix lower_left = (q * a * p).bottomLeftCorner(r, n - r);
        q.bottomRows(r) -= lower_left * q.topRows(n - r);
    }
    const ComplexMatrix a_nf = q * a * p;
    const ComplexMatrix b_nf = q * b * p;

    nf.q = q;
    nf.p = p;
    nf.permutation = perm;
    nf.a1 = a_nf.topRightCorner(n - r, r);
    const ComplexMatrix a22 = a_nf.bottomRightCorner(r, r);
    nf.a2 = 0.5 * (a22 + a22.adjoint());

    // The self-adjointness of (A, B) must have produced the Hermitian A2 and
    // B21 = -A1*; anything else means the tolerance was too loose for this input.
    const double magnitude = std::max({1.0, max_abs(a_nf), max_abs(b_nf)});
    const double defect = std::max({max_abs(a22 - a22.adjoint()),
                                    max_abs(b_nf.bottomLeftCorner(r, n - r) + nf.a1.adjoint()),
                                    max_abs(a_nf.bottomLeftCorner(r, n - r)),
                                    max_abs(b_nf.topRows(n - r))});
    if (defect > 1e-6 * magnitude) {
        throw Error(ErrorCode::internal,
                    fmt::format("normal form reduction left a block defect of {:.3e}", defect), defect);
    }
    return nf;
}

// --- J-unitary completion --------------------------------------------------

ComplexMatrix j_matrix(int n) {
    ComplexMatrix j = ComplexMatrix::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = I_UNIT * ComplexMatrix::Identity(n, n);
    j.bottomLeftCorner(n, n) = -I_UNIT * ComplexMatrix::Identity(n, n);
    return j;
}

ComplexMatrix JUnitaryCompletion::w() const {
    const auto n = a.rows();
    ComplexMatrix out(2 * n, 2 * n);
    out << a, b, c, d;
    return out;
}

double JUnitaryCompletion::residual_star_left() const {
    const ComplexMatrix ww = w();
    const ComplexMatrix j = j_matrix(static_cast<int>(a.rows()));
    return (ww.adjoint() * j * ww - j).norm();
}

double JUnitaryCompletion::residual_star_right() const {
    const ComplexMatrix ww = w();
    const ComplexMatrix j = j_matrix(static_cast<int>(a.rows()));
    return (ww * j * ww.adjoint() - j).norm();
}

double JUnitaryCompletion::relation_residual() const {
    const auto n = a.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    return std::max({(b * a.adjoint() - a * b.adjoint()).norm(),
                     (d * a.adjoint() - c * b.adjoint() - id).norm(),
                     (b * c.adjoint() - a * d.adjoint() + id).norm(),
                     (d * c.adjoint() - c * d.adjoint()).norm()});
}

JUnitaryCompletion complete_j_unitary(const InterfaceCondition& ic) {
    const ComplexMatrix& a = ic.a();
    const ComplexMatrix& b = ic.b();
    const ComplexMatrix x = a * a.adjoint() + b * b.adjoint();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(x, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()[0];
    const double hi = eig.eigenvalues()[eig.eigenvalues().size() - 1];
    if (!(lo > 1e-12 * hi)) {
        throw Error(ErrorCode::conditioning,
                    fmt::format("AA* + BB* is numerically singular (eigenvalues {:.3e}..{:.3e})", lo, hi),
                    hi / lo);
    }
    const Eigen::LLT<ComplexMatrix> llt(x);
    return {a, b, -llt.solve(b), llt.solve(a)};
}

// --- Lagrange planes -------------------------------------------------------

double LagrangePlane::neutrality_defect() const {
    if (basis.cols() == 0) return 0.0;
    const ComplexMatrix gram = basis.adjoint() * j_matrix(n) * basis;
    return gram.cwiseAbs().maxCoeff();
}

LagrangePlane lagrange_plane(const InterfaceCondition& ic) {
    const int n = ic.n();
    const ComplexMatrix ab = hstack(ic.a(), ic.b());
    LagrangePlane plane{n, null_space(ab)};
    if (plane.basis.cols() != n) {
        throw Error(ErrorCode::internal,
                    fmt::format("kernel of (A,B) has dimension {} instead of {}", plane.basis.cols(), n));
    }
    if (plane.neutrality_defect() > 1e-8) {
        throw Error(ErrorCode::internal, "kernel of (A,B) is not neutral", plane.neutrality_defect());
    }
    return plane;
}

InterfaceCondition condition_from_plane(const LagrangePlane& plane, RankTolerance tol) {
    const int n = plane.n;
    const ComplexMatrix comp = orthogonal_complement(plane.basis, tol);
    if (comp.cols() != n) {
        throw Error(ErrorCode::internal,
                    fmt::format("plane complement has dimension {} instead of {}", comp.cols(), n));
    }
    // Rows c_i* annihilate the plane: c_i* (a; b) = 0.
    const ComplexMatrix rows = comp.adjoint();
    return validate(rows.leftCols(n), rows.rightCols(n), tol);
}

int coupling_codim(const InterfaceCondition& ic1, const InterfaceCondition& ic2, RankTolerance tol) {
    if (ic1.n() != ic2.n()) throw Error(ErrorCode::input, "coupling_codim: sizes differ");
    const int n = ic1.n();
    const ComplexMatrix stacked = vstack(hstack(ic1.a(), ic1.b()), hstack(ic2.a(), ic2.b()));
    const auto nullity = static_cast<int>(null_space(stacked, tol).cols());
    return n - nullity;
}

ComplexMatrix coordinate_plane(int n, const std::vector<int>& indices) {
    ComplexMatrix c = ComplexMatrix::Zero(n, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t j = 0; j < indices.size(); ++j) c(indices[j], static_cast<Eigen::Index>(j)) = 1.0;
    return c;
}

ComplexMatrix extend_avoiding(const ComplexMatrix& l, const std::vector<ComplexMatrix>& avoid,
                              std::mt19937_64& rng, int max_retries) {
    const auto n = static_cast<int>(l.rows());
    const ComplexMatrix basis = orthonormal_basis(l);
    const auto dim = static_cast<int>(basis.cols());
    if (dim >= n) throw Error(ErrorCode::input, "extend_avoiding: subspace already fills C^n");

    std::vector<ComplexMatrix> planes;
    for (const auto& c : avoid) {
        if (c.rows() != n) throw Error(ErrorCode::input, "extend_avoiding: height mismatch");
        ComplexMatrix cb = orthonormal_basis(c);
        if (cb.cols() > n - dim - 1) {
            throw Error(ErrorCode::input,
                        fmt::format("extend_avoiding: avoided plane of dimension {} exceeds {}", cb.cols(),
                                    n - dim - 1));
        }
        if (cb.cols() > 0 && intersection_dim(basis, cb) != 0) {
            throw Error(ErrorCode::input, "extend_avoiding: subspace already meets an avoided plane");
        }
        planes.push_back(std::move(cb));
    }

    // The failure set is a finite union of proper subspaces of the complement,
    // so a random direction avoids it almost surely. Require a visible margin.
    constexpr double kMargin = 1e-6;
    const ComplexMatrix complement = orthogonal_complement(basis);
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        ComplexVector coeff = complex_gaussian(static_cast<int>(complement.cols()), 1, rng);
        coeff.normalize();
        const ComplexVector z = complement * coeff;
        const ComplexMatrix extended = hstack(basis, z);
        const bool ok = std::all_of(planes.begin(), planes.end(), [&](const ComplexMatrix& c) {
            if (c.cols() == 0) return true;
            return smallest_singular_value(hstack(extended, c)) > kMargin;
        });
        if (ok) return extended;
    }
    throw Error(ErrorCode::randomization,
                fmt::format("extend_avoiding: no admissible direction after {} attempts", max_retries));
}

namespace {

// One downward step of the rank reduction: from a plane whose B has rank k
// (and satisfies (D4)) to one with rank k-1 that is one step further from it.
LagrangePlane lower_rank_once(const InterfaceCondition& current, std::mt19937_64& rng,
                              RankTolerance tol) {
    const int n = current.n();
    const int k = current.r();
    const ComplexMatrix kernel_b = null_space(current.b(), tol, singular_values(current.b())[0]);

    std::vector<ComplexMatrix> avoid;
    if (k - 1 > 0) {
        for (const auto& idx : combinations(n, k - 1)) avoid.push_back(coordinate_plane(n, idx));
    }
    const ComplexMatrix enlarged = extend_avoiding(kernel_b, avoid, rng);

    // Π = {0} × L'
    ComplexMatrix pi = ComplexMatrix::Zero(2 * n, enlarged.cols());
    pi.bottomRows(n) = enlarged;

    // θ ∩ θ0 = {0} × ker B
    ComplexMatrix theta_cap = ComplexMatrix::Zero(2 * n, kernel_b.cols());
    theta_cap.bottomRows(n) = kernel_b;

    const LagrangePlane theta = lagrange_plane(current);
    const ComplexMatrix sum = orthonormal_basis(hstack(theta.basis, pi), tol);
    // [u, v] = v* J u, so the J-orthogonal companion of span(S) is ker(S* J).
    const ComplexMatrix j_perp = null_space(sum.adjoint() * j_matrix(n), tol, 1.0);

    // Π' = orthogonal complement of θ ∩ θ0 inside (θ + Π)^[⊥].
    ComplexMatrix projected = j_perp;
    if (theta_cap.cols() > 0) projected -= theta_cap * (theta_cap.adjoint() * j_perp);
    const ComplexMatrix pi_prime = orthonormal_basis(projected, RankTolerance(1e-6), 1.0);

    LagrangePlane result{n, orthonormal_basis(hstack(pi_prime, pi), tol, 1.0)};
    if (result.basis.cols() != n || result.neutrality_defect() > 1e-8) {
        throw Error(ErrorCode::internal,
                    fmt::format("rank reduction produced a plane of dimension {} with defect {:.3e}",
                                result.basis.cols(), result.neutrality_defect()));
    }
    return result;
}

}  // namespace

InterfaceCondition reduce_rank(const InterfaceCondition& ic, int k, std::uint64_t seed,
                               RankTolerance tol) {
    const int r = ic.r();
    if (r == 0) throw Error(ErrorCode::input, "reduce_rank: B = 0 has nothing to reduce");
    if (k < 1 || k > r) {
        throw Error(ErrorCode::input, fmt::format("reduce_rank: k = {} outside [1, {}]", k, r));
    }
    if (!satisfies_d4(ic, tol)) throw Error(ErrorCode::d4_violation, "reduce_rank requires (D4)");

    std::mt19937_64 rng(seed);
    constexpr int kStepAttempts = 16;
    InterfaceCondition current = ic;
    while (current.r() > k) {
        const int target = current.r() - 1;
        bool done = false;
        for (int attempt = 0; attempt < kStepAttempts && !done; ++attempt) {
            InterfaceCondition next = condition_from_plane(lower_rank_once(current, rng, tol), tol);
            if (next.r() == target && satisfies_d4(next, tol) &&
                coupling_codim(ic, next, tol) == r - target) {
                current = std::move(next);
                done = true;
            }
        }
        if (!done) {
            throw Error(ErrorCode::d4_violation,
                        fmt::format("reduce_rank: could not reach rank {} with (D4) after {} attempts",
                                    target, kStepAttempts));
        }
    }
    return current;
}

InterfaceCondition random_interface_condition(int n, int r, std::mt19937_64& rng) {
    if (n < 1 || r < 0 || r > n) {
        throw Error(ErrorCode::input, fmt::format("random_interface_condition: bad n={} r={}", n, r));
    }
    // U = V diag(e^{iφ}) V* with exactly n - r phases at π; then
    // A = -(U - I)/2 and B = i(U + I)/2 satisfy (D3) and rank B = r.
    const ComplexMatrix v = haar_unitary(n, rng);
    std::uniform_real_distribution<double> phase(-0.9 * M_PI, 0.9 * M_PI);
    Eigen::VectorXcd a_diag(n);
    Eigen::VectorXcd b_diag(n);
    for (int j = 0; j < n; ++j) {
        if (j < n - r) {
            a_diag[j] = 1.0;
            b_diag[j] = 0.0;
        } else {
            const Complex u = std::polar(1.0, phase(rng));
            a_diag[j] = -0.5 * (u - 1.0);
            b_diag[j] = 0.5 * I_UNIT * (u + 1.0);
        }
    }
    const ComplexMatrix a = v * a_diag.asDiagonal() * v.adjoint();
    const ComplexMatrix b = v.rightCols(r) * b_diag.tail(r).asDiagonal() * v.rightCols(r).adjoint();

    std::uniform_real_distribution<double> stretch(0.5, 2.0);
    Eigen::VectorXd s(n);
    for (int j = 0; j < n; ++j) s[j] = stretch(rng);
    const ComplexMatrix q = haar_unitary(n, rng) * s.asDiagonal() * haar_unitary(n, rng);
    return validate(q * a, q * b);
}

}  // namespace qgraph
