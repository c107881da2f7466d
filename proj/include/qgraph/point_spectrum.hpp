#pragma once

// Eigenvalue multiplicities of the coupled operator at a real point x, from
// the boundary data of the edgewise solutions at x.

#include <iosfwd>
#include <vector>

#include "qgraph/interface_conditions.hpp"
#include "qgraph/weyl_functions.hpp"

namespace qgraph {

enum class EdgeClass {
    none,              // no solution of the right kind at x
    in_jp,             // x is an eigenvalue of the edge with Dirichlet data at the vertex
    in_jpstar_not_jp,  // solution exists with u(0) != 0; boundary data (1, m)
    in_jm,             // artificial edge
};

const char* to_string(EdgeClass c);

struct EdgeClassification {
    int edge_index = 0;
    EdgeClass cls = EdgeClass::none;
    double m_value = 0.0;  // meaningful for in_jpstar_not_jp and in_jm
};

/// |u(0)| <= threshold * (|u(0)| + |u'(0)|) counts as u(0) = 0.
struct PointOptions {
    double vanishing_threshold = 1e-7;
    RankTolerance tol{};
};

EdgeClassification classify_edge_at(const EdgeSpec& edge, double x, const PointOptions& opts = {});

struct GammaProblem {
    double x = 0.0;
    ComplexMatrix gamma;
    int ker_gamma_dim = 0;
    int ker_gamma_cap_ker_xi_dim = 0;
    int np_ab = 0;
    int np_0 = 0;
    std::vector<int> jp;
    std::vector<int> jp_star;  // includes jp
    std::vector<int> jm;
    /// 1 when #((J_p* \ J_p) u J_m) <= n - r, else 2.
    int lemma5_case = 1;
};

/// Assembles gamma = A D_X + B (D_{J_p} + M D_X) with X = (J_p* \ J_p) u J_m and
/// computes the kernel dimensions. No theorem checks.
GammaProblem build_gamma(const InterfaceCondition& ic, const std::vector<EdgeClassification>& classes,
                         const PointOptions& opts = {});

/// Verifies the kernel dimensions against the closed forms (case 1) or the
/// bounds (case 2), and the multiplicity statements for N0 >= r and N0 < r.
/// Throws theorem_violation on failure.
void check_point_theorems(const GammaProblem& g, int r);

/// classify + build_gamma + check_point_theorems. Requires (D4).
GammaProblem point_multiplicity(const StarGraph& graph, const InterfaceCondition& ic, double x,
                                const PointOptions& opts = {});

/// x, J_p, J_p*, J_m, Np_0, Np_AB, lemma5_case
void write_point_table(std::ostream& out, const std::vector<GammaProblem>& rows);

}  // namespace qgraph
