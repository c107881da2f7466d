#pragma once

// Scalar Titchmarsh-Weyl functions of the edges of a star graph and the
// diagonal matrix M0(z) they form.
//
// Boundary data are (u(0), u'(0)) with the derivative taken into the edge, so
// that m(z) = u'(0)/u(0) is Herglotz in the upper half plane.

#include <array>
#include <optional>
#include <vector>

#include "qgraph/numeric_core.hpp"

namespace qgraph {

enum class EdgeKind { regular, half_line, artificial };

const char* to_string(EdgeKind kind);

/// Piecewise linear potential through (xs[i], qs[i]); zero outside [xs.front(), xs.back()].
/// Empty samples mean q = 0.
struct Potential {
    std::vector<double> xs;
    std::vector<double> qs;

    bool is_zero() const noexcept { return xs.empty(); }
    double operator()(double x) const;
    /// Right end of the support (0 for q = 0).
    double support_end() const noexcept { return xs.empty() ? 0.0 : xs.back(); }
};

struct EdgeSpec {
    EdgeKind kind = EdgeKind::regular;
    double length = 0.0;   // infinite for half-lines, unused for artificial edges
    Potential potential;
    double beta = 0.0;     // cos(beta) u(L) + sin(beta) u'(L) = 0; beta = 0 is Dirichlet
    double m_const = 0.0;  // artificial edges only

    static EdgeSpec regular(double length, double beta = 0.0, Potential q = {});
    static EdgeSpec half_line(Potential q = {});
    static EdgeSpec artificial(double m_const);

    /// Throws ErrorCode::input on inconsistent fields.
    void validate() const;
};

struct StarGraph {
    std::vector<EdgeSpec> edges;

    int n() const noexcept { return static_cast<int>(edges.size()); }
    int non_artificial_count() const noexcept;
    /// n >= 2, every edge valid, at least one non-artificial edge.
    void validate() const;
};

struct WeylSample {
    Complex z;
    std::vector<Complex> m;
    ComplexMatrix m0;  // diag(m)

    /// Sum of the edge functions.
    Complex trace() const;
};

enum class MEvalMethod { automatic, closed_form, shooting };

/// (u(0), u'(0)) of the Weyl solution, scaled to unit Euclidean norm.
/// For a half-line this is the solution that is square integrable when
/// Im z > 0, continued analytically to real z (the decaying one for z < 0).
/// Artificial edges have no solution and are rejected.
std::array<Complex, 2> weyl_solution_boundary(const EdgeSpec& edge, Complex z,
                                              MEvalMethod method = MEvalMethod::automatic);

/// m(z) = u'(0)/u(0). Throws ErrorCode::pole when u(0) vanishes; the error
/// detail is the residue estimate lim (z' - z) m(z').
Complex eval_m_edge(const EdgeSpec& edge, Complex z, MEvalMethod method = MEvalMethod::automatic);

/// Errors raised for edge l carry edge_index() = l.
WeylSample eval_m0(const StarGraph& graph, Complex z, MEvalMethod method = MEvalMethod::automatic);

/// Square root with Im >= 0.
Complex sqrt_upper(Complex z);

struct HerglotzEdgeReport {
    int positivity_violations = 0;
    /// eps * Im m(x + i eps) must not grow as eps shrinks.
    int monotonicity_violations = 0;
    /// Slope of log Im m against log eps over the smallest eps; empty when Im m vanishes.
    std::optional<double> growth_exponent;
};

struct HerglotzReport {
    std::vector<HerglotzEdgeReport> edges;
    bool ok() const noexcept;
};

/// Samples must lie on one vertical line x0 + i eps with eps > 0 decreasing.
HerglotzReport herglotz_diagnostic(const std::vector<WeylSample>& samples);

/// Least squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace qgraph
