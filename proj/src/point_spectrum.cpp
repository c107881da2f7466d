#include "qgraph/point_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace qgraph {

namespace {

EdgeClassification classify_from_boundary(int index, std::array<Complex, 2> data, double threshold) {
    const double u = std::abs(data[0]);
    const double du = std::abs(data[1]);
    EdgeClassification c;
    c.edge_index = index;
    if (u <= threshold * (u + du)) {
        c.cls = EdgeClass::in_jp;
        return c;
    }
    c.cls = EdgeClass::in_jpstar_not_jp;
    // At real x the solution can be chosen real, so the ratio is real up to rounding.
    c.m_value = (data[1] / data[0]).real();
    return c;
}

std::string index_list(const std::vector<int>& v) {
    // 1-based in the table, matching how edges are numbered in the input files.
    std::vector<int> shifted(v);
    for (int& i : shifted) ++i;
    return fmt::format("{{{}}}", fmt::join(shifted, " "));
}

}  // namespace

const char* to_string(EdgeClass c) {
    switch (c) {
    case EdgeClass::none: return "none";
    case EdgeClass::in_jp: return "in_Jp";
    case EdgeClass::in_jpstar_not_jp: return "in_Jpstar_not_Jp";
    case EdgeClass::in_jm: return "in_Jm";
    }
    return "unknown";
}

EdgeClassification classify_edge_at(const EdgeSpec& edge, double x, const PointOptions& opts) {
    if (!std::isfinite(x)) throw Error(ErrorCode::input, "x must be finite");
    switch (edge.kind) {
    case EdgeKind::artificial: {
        EdgeClassification c;
        c.cls = EdgeClass::in_jm;
        c.m_value = edge.m_const;
        return c;
    }
    case EdgeKind::half_line:
        // Only exponentially decaying solutions (x < 0) are square integrable.
        if (x >= 0.0) return {};
        return classify_from_boundary(0, weyl_solution_boundary(edge, Complex(x, 0.0)), opts.vanishing_threshold);
    case EdgeKind::regular:
        break;
    }
    return classify_from_boundary(0, weyl_solution_boundary(edge, Complex(x, 0.0)), opts.vanishing_threshold);
}

GammaProblem build_gamma(const InterfaceCondition& ic, const std::vector<EdgeClassification>& classes,
                         const PointOptions& opts) {
    const int n = ic.n();
    if (static_cast<int>(classes.size()) != n) {
        throw Error(ErrorCode::input,
                    fmt::format("{} classifications for an interface condition of size {}", classes.size(), n));
    }
    GammaProblem g;
    ComplexMatrix d_jp = ComplexMatrix::Zero(n, n);
    ComplexMatrix d_x = ComplexMatrix::Zero(n, n);  // (J_p* \ J_p) u J_m
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    double m_scale = 1.0;
    for (int l = 0; l < n; ++l) {
        const auto& c = classes[static_cast<std::size_t>(l)];
        switch (c.cls) {
        case EdgeClass::none:
            break;
        case EdgeClass::in_jp:
            g.jp.push_back(l);
            g.jp_star.push_back(l);
            d_jp(l, l) = 1.0;
            break;
        case EdgeClass::in_jpstar_not_jp:
            g.jp_star.push_back(l);
            d_x(l, l) = 1.0;
            m(l, l) = c.m_value;
            break;
        case EdgeClass::in_jm:
            g.jm.push_back(l);
            d_x(l, l) = 1.0;
            m(l, l) = c.m_value;
            break;
        }
        if (c.cls == EdgeClass::in_jpstar_not_jp || c.cls == EdgeClass::in_jm) {
            if (!std::isfinite(c.m_value)) throw Error(ErrorCode::input, "classification m value not finite");
            m_scale = std::max(m_scale, std::abs(c.m_value));
        }
    }
    g.gamma = ic.a() * d_x + ic.b() * (d_jp + m * d_x);

    // gamma can be exactly or numerically zero, so ranks are measured against
    // the scale of (A, B) and of the m values rather than against gamma itself.
    ComplexMatrix ab(n, 2 * n);
    ab << ic.a(), ic.b();
    const double reference = singular_values(ab)[0] * m_scale;
    const auto rank_of = [&](const ComplexMatrix& mat) {
        return mat.cols() == 0 ? 0 : static_cast<int>(rank_tol(mat, opts.tol, reference));
    };
    g.ker_gamma_dim = n - rank_of(g.gamma);

    std::vector<int> outside_star;
    for (int l = 0; l < n; ++l) {
        if (std::find(g.jp_star.begin(), g.jp_star.end(), l) == g.jp_star.end()) outside_star.push_back(l);
    }
    const ComplexMatrix restricted = select_columns(g.gamma, outside_star);
    g.ker_gamma_cap_ker_xi_dim = static_cast<int>(outside_star.size()) - rank_of(restricted);
    g.np_ab = g.ker_gamma_dim - g.ker_gamma_cap_ker_xi_dim;
    g.np_0 = static_cast<int>(g.jp.size());

    const int extra = static_cast<int>(g.jp_star.size() - g.jp.size() + g.jm.size());
    g.lemma5_case = extra <= n - ic.r() ? 1 : 2;
    return g;
}

void check_point_theorems(const GammaProblem& g, int r) {
    const int n = static_cast<int>(g.gamma.rows());
    const int jp = static_cast<int>(g.jp.size());
    const int jps = static_cast<int>(g.jp_star.size());
    const int jm = static_cast<int>(g.jm.size());
    auto fail = [&](const std::string& what) {
        throw Error(ErrorCode::theorem_violation,
                    fmt::format("at x = {}: {} (dim ker gamma = {}, dim intersection = {}, J_p = {}, "
                                "J_p* = {}, J_m = {}, r = {})",
                                g.x, what, g.ker_gamma_dim, g.ker_gamma_cap_ker_xi_dim, jp, jps, jm, r));
    };
    if (g.np_ab < 0) fail("negative multiplicity");
    if (g.lemma5_case == 1) {
        if (g.ker_gamma_dim != std::max(jp - r, 0) + n - jps - jm) fail("dim ker gamma differs from closed form");
        if (g.ker_gamma_cap_ker_xi_dim != n - jps - jm) fail("intersection dimension differs from closed form");
    } else {
        if (g.ker_gamma_dim > r - jp) fail("dim ker gamma exceeds r - #J_p");
        if (g.ker_gamma_cap_ker_xi_dim < n - jps - jm) fail("intersection dimension below n - #J_p* - #J_m");
    }
    if (g.np_0 >= r) {
        if (g.np_ab != g.np_0 - r) fail("multiplicity differs from N0 - r");
    } else if (g.np_ab > r - g.np_0) {
        fail("multiplicity exceeds r - N0");
    }
}

GammaProblem point_multiplicity(const StarGraph& graph, const InterfaceCondition& ic, double x,
                                const PointOptions& opts) {
    graph.validate();
    if (graph.n() != ic.n()) throw Error(ErrorCode::input, "graph and interface condition sizes differ");
    if (!satisfies_d4(ic, opts.tol)) throw Error(ErrorCode::d4_violation, "point multiplicity requires (D4)");
    std::vector<EdgeClassification> classes;
    for (int l = 0; l < graph.n(); ++l) {
        try {
            auto c = classify_edge_at(graph.edges[static_cast<std::size_t>(l)], x, opts);
            c.edge_index = l;
            classes.push_back(c);
        } catch (Error& e) {
            throw e.with_edge(static_cast<std::size_t>(l));
        }
    }
    GammaProblem g = build_gamma(ic, classes, opts);
    g.x = x;
    check_point_theorems(g, ic.r());
    return g;
}

void write_point_table(std::ostream& out, const std::vector<GammaProblem>& rows) {
    out << "x,J_p,J_p*,J_m,Np_0,Np_AB,lemma5_case\n";
    for (const auto& g : rows) {
        out << fmt::format("{:.17g},{},{},{},{},{},{}\n", g.x, index_list(g.jp), index_list(g.jp_star),
                           index_list(g.jm), g.np_0, g.np_ab, g.lemma5_case);
    }
}

}  // namespace qgraph
