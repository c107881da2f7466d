#pragma once

// The coupled Weyl function M_w(z) of a star graph under an interface
// condition, computed through the J-unitary completion and, independently,
// through the block inverse in normal-form coordinates.

#include <iosfwd>
#include <optional>
#include <vector>

#include "qgraph/interface_conditions.hpp"
#include "qgraph/weyl_functions.hpp"

namespace qgraph {

struct CoupledSample {
    Complex z;
    ComplexMatrix m0;
    ComplexMatrix mw;
    std::optional<ComplexMatrix> d_schur;  // present when a normal form is attached
    ComplexMatrix im_mw;                   // via the congruence with Im M0
    double trace_im = 0.0;
    /// Condition number of A + B M0(z).
    double condition = 1.0;
    /// Set when the condition number exceeds 1e12; values are then less reliable.
    bool ill_conditioned = false;
    /// Max-abs difference between the two M_w evaluation paths (0 if only one ran).
    double path_discrepancy = 0.0;
};

/// Im M = (M - M*)/(2i).
ComplexMatrix imaginary_part(const ComplexMatrix& m);

/// Graph plus interface condition with the completion (and normal form when (D4)
/// holds) computed once. Construction enforces that the graph has at least
/// rank B non-artificial edges.
class Coupling {
public:
    Coupling(StarGraph graph, InterfaceCondition ic, RankTolerance tol = {});

    const StarGraph& graph() const noexcept { return graph_; }
    const InterfaceCondition& ic() const noexcept { return ic_; }
    const JUnitaryCompletion& completion() const noexcept { return completion_; }
    const std::optional<NormalForm>& normal_form() const noexcept { return nf_; }

    CoupledSample eval(Complex z, MEvalMethod method = MEvalMethod::automatic) const;
    /// Same as eval, for an already computed M0 sample.
    CoupledSample eval(const WeylSample& m0) const;

private:
    StarGraph graph_;
    InterfaceCondition ic_;
    JUnitaryCompletion completion_;
    std::optional<NormalForm> nf_;
};

CoupledSample eval_mw(const StarGraph& graph, const InterfaceCondition& ic, Complex z);

/// (C + D M0)(A + B M0)^{-1}.
ComplexMatrix mw_direct(const JUnitaryCompletion& w, const ComplexMatrix& m0);

/// M_w through the block inverse in normal-form coordinates, mapped back.
ComplexMatrix mw_schur(const NormalForm& nf, const ComplexMatrix& m0);

/// D(z) = A2 + M22 + A1* M11 A1, with M0 reordered by the normal-form permutation.
ComplexMatrix eval_d_schur(const NormalForm& nf, const WeylSample& m0);

/// z_re, z_im, row-major Mw entries (re, im interleaved), trace_im.
void write_samples_csv(std::ostream& out, const std::vector<CoupledSample>& samples);

}  // namespace qgraph
