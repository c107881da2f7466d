#pragma once

// Interface conditions A·u(0) + B·u'(0) = 0 at the vertex of a star graph:
// validation, the (D4) mixing test, normal forms, J-unitary completions, and
// the Lagrange-plane geometry used to lower rank B while keeping (D4).

#include <cstdint>
#include <random>
#include <vector>

#include "qgraph/numeric_core.hpp"

namespace qgraph {

/// A validated pair (A, B) with AB* = BA* and rank(A, B) = n.
class InterfaceCondition {
public:
    int n() const noexcept { return static_cast<int>(a_.rows()); }
    const ComplexMatrix& a() const noexcept { return a_; }
    const ComplexMatrix& b() const noexcept { return b_; }
    /// Cached rank of B.
    int r() const noexcept { return r_; }
    /// ||AB* - BA*||_F at validation time.
    double d3_residual() const noexcept { return d3_residual_; }

private:
    friend InterfaceCondition validate(const ComplexMatrix&, const ComplexMatrix&, RankTolerance);
    ComplexMatrix a_;
    ComplexMatrix b_;
    int r_ = 0;
    double d3_residual_ = 0.0;
};

/// Checks (D3); throws ErrorCode::d3_violation carrying the offending residual.
InterfaceCondition validate(const ComplexMatrix& a, const ComplexMatrix& b, RankTolerance tol = {});

InterfaceCondition decoupled_condition(int n);      // A = I, B = 0
InterfaceCondition antidecoupled_condition(int n);  // A = 0, B = I
/// Continuity at the vertex plus the Kirchhoff sum of derivatives.
InterfaceCondition standard_condition(int n);

/// (QAP, QBP) for invertible Q and the permutation whose j-th column is e_{perm[j]}.
InterfaceCondition transform(const InterfaceCondition& ic, const ComplexMatrix& q,
                             const std::vector<int>& perm, RankTolerance tol = {});

ComplexMatrix permutation_matrix(const std::vector<int>& perm);

// --- (D4) ------------------------------------------------------------------

/// Every set of r columns of B is linearly independent.
bool d4_by_columns(const ComplexMatrix& b, int r, RankTolerance tol = {});
/// B is injective on every coordinate plane of dimension <= r.
bool d4_by_coordinate_planes(const ComplexMatrix& b, int r, RankTolerance tol = {});
/// rank(B X B*) = min(rank X, r) for every diagonal coordinate projection X.
bool d4_by_projection_ranks(const ComplexMatrix& b, int r, RankTolerance tol = {});

/// Runs all three tests above; throws ErrorCode::internal if they disagree.
bool satisfies_d4(const InterfaceCondition& ic, RankTolerance tol = {});
bool satisfies_d4(const ComplexMatrix& b, RankTolerance tol = {});

/// The four equivalent statements about B = [[0, 0], [B1, I_r]].
struct MinorCriteria {
    bool d4 = false;               // B satisfies (D4)
    bool r_minors = false;         // all r-minors of (B1, I_r) nonzero
    bool complement_minors = false;// all (n-r)-minors of (I_{n-r}, -B1*) nonzero
    bool b1_minors = false;        // all minors of B1 nonzero

    bool agree() const noexcept {
        return d4 == r_minors && r_minors == complement_minors && complement_minors == b1_minors;
    }
};
MinorCriteria minor_criteria(const ComplexMatrix& b1, RankTolerance tol = {});

// --- Normal form -----------------------------------------------------------

struct NormalForm {
    int n = 0;
    int r = 0;
    ComplexMatrix a1;  // (n-r) x r
    ComplexMatrix a2;  // r x r, Hermitian
    ComplexMatrix q;   // invertible n x n
    ComplexMatrix p;   // permutation matrix
    /// Original edge index placed at normal-form position j.
    std::vector<int> permutation;

    /// [[I, A1], [0, A2]]
    ComplexMatrix assembled_a() const;
    /// [[0, 0], [-A1*, I]]
    ComplexMatrix assembled_b() const;
};

/// Brings (A, B) to the block form above via Q (A, B) diag(P, P).
/// Among admissible column orders the best-conditioned one is used
/// (ties broken lexicographically). Throws d4_violation when (D4) fails.
NormalForm to_normal_form(const InterfaceCondition& ic, RankTolerance tol = {});

/// Builds a normal form directly from blocks (Q = P = I).
NormalForm normal_form_from_blocks(const ComplexMatrix& a1, const ComplexMatrix& a2);

// --- J-unitary completion --------------------------------------------------

/// J = i [[0, I], [-I, 0]] acting on C^n x C^n.
ComplexMatrix j_matrix(int n);

struct JUnitaryCompletion {
    ComplexMatrix a, b, c, d;

    ComplexMatrix w() const;
    /// ||w* J w - J||_F
    double residual_star_left() const;
    /// ||w J w* - J||_F
    double residual_star_right() const;
    /// Largest residual among BA*-AB* = 0, DA*-CB* = I, BC*-AD* = -I, DC*-CD* = 0.
    double relation_residual() const;
};

/// C = -X^{-1}B, D = X^{-1}A with X = AA* + BB*.
JUnitaryCompletion complete_j_unitary(const InterfaceCondition& ic);

// --- Lagrange planes -------------------------------------------------------

struct LagrangePlane {
    int n = 0;
    ComplexMatrix basis;  // 2n x n, orthonormal columns

    /// Largest |[u, v]| over basis pairs; zero for a neutral subspace.
    double neutrality_defect() const;
};

/// Orthonormal basis of {(a, b) : Aa + Bb = 0}.
LagrangePlane lagrange_plane(const InterfaceCondition& ic);

/// Reads (A, B) off a Lagrange plane: rows of (A, B) span its orthogonal complement.
InterfaceCondition condition_from_plane(const LagrangePlane& plane, RankTolerance tol = {});

/// n - dim(θ1 ∩ θ2).
int coupling_codim(const InterfaceCondition& ic1, const InterfaceCondition& ic2,
                   RankTolerance tol = {});

/// Enlarges span(l) by one dimension while meeting each subspace in `avoid`
/// only at zero. Columns of the result are orthonormal.
ComplexMatrix extend_avoiding(const ComplexMatrix& l, const std::vector<ComplexMatrix>& avoid,
                              std::mt19937_64& rng, int max_retries = 64);

/// Span of {e_i : i in indices} in C^n.
ComplexMatrix coordinate_plane(int n, const std::vector<int>& indices);

/// (A_k, B_k) with (D3), (D4), rank B_k = k and codim(θ_{A,B}, θ_{A_k,B_k}) = r - k.
InterfaceCondition reduce_rank(const InterfaceCondition& ic, int k, std::uint64_t seed,
                               RankTolerance tol = {});

/// Random (D3) pair with rank B = r, built from a unitary with n - r eigenvalues
/// at -1 and scrambled by a random well-conditioned left factor.
InterfaceCondition random_interface_condition(int n, int r, std::mt19937_64& rng);

}  // namespace qgraph
