#include "qgraph/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace qgraph {

namespace {

constexpr double kIllConditioned = 1e12;
constexpr double kPathTolerance = 1e-8;

ComplexMatrix permuted_m0(const NormalForm& nf, const ComplexMatrix& m0) {
    // P^T M0 P for the permutation placing edge perm[j] at position j.
    const ComplexMatrix& p = nf.p;
    return p.transpose() * m0 * p;
}

double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

ComplexMatrix imaginary_part(const ComplexMatrix& m) {
    return (m - m.adjoint()) / (2.0 * I_UNIT);
}

ComplexMatrix mw_direct(const JUnitaryCompletion& w, const ComplexMatrix& m0) {
    const ComplexMatrix denom = w.a + w.b * m0;
    const ComplexMatrix numer = w.c + w.d * m0;
    // X Y^{-1} = (Y^{-*} X^*)^*.
    return denom.adjoint().partialPivLu().solve(numer.adjoint()).adjoint();
}

ComplexMatrix eval_d_schur(const NormalForm& nf, const WeylSample& m0) {
    const int n = nf.n;
    const int r = nf.r;
    const ComplexMatrix mp = permuted_m0(nf, m0.m0);
    const ComplexMatrix m11 = mp.topLeftCorner(n - r, n - r);
    const ComplexMatrix m22 = mp.bottomRightCorner(r, r);
    ComplexMatrix d = nf.a2 + m22;
    if (n - r > 0) d += nf.a1.adjoint() * m11 * nf.a1;
    return d;
}

ComplexMatrix mw_schur(const NormalForm& nf, const ComplexMatrix& m0) {
    const int n = nf.n;
    const int r = nf.r;
    const ComplexMatrix mp = permuted_m0(nf, m0);
    const ComplexMatrix m11 = mp.topLeftCorner(n - r, n - r);

    // Block inverse of A' + B' M0' = [[I, A1], [-A1* M11, A2 + M22]].
    ComplexMatrix inv = ComplexMatrix::Zero(n, n);
    if (r > 0) {
        WeylSample tmp;
        tmp.m0 = m0;
        const ComplexMatrix d = eval_d_schur(nf, tmp);
        const auto lu = d.fullPivLu();
        if (!lu.isInvertible()) {
            throw Error(ErrorCode::invertibility, "Schur complement D(z) is singular");
        }
        const ComplexMatrix d_inv = lu.inverse();
        const ComplexMatrix lower = d_inv * nf.a1.adjoint() * m11;
        inv.topLeftCorner(n - r, n - r) = ComplexMatrix::Identity(n - r, n - r) - nf.a1 * lower;
        inv.topRightCorner(n - r, r) = -nf.a1 * d_inv;
        inv.bottomLeftCorner(r, n - r) = lower;
        inv.bottomRightCorner(r, r) = d_inv;
    } else {
        inv.setIdentity();
    }

    const InterfaceCondition nf_ic = validate(nf.assembled_a(), nf.assembled_b());
    const JUnitaryCompletion w = complete_j_unitary(nf_ic);
    const ComplexMatrix mw_nf = (w.c + w.d * mp) * inv;
    // In normal-form coordinates M_w' = Q^{-*} M_w Q^{-1}.
    return nf.q.adjoint() * mw_nf * nf.q;
}

Coupling::Coupling(StarGraph graph, InterfaceCondition ic, RankTolerance tol)
    : graph_(std::move(graph)), ic_(std::move(ic)), completion_(complete_j_unitary(ic_)) {
    graph_.validate();
    if (graph_.n() != ic_.n()) {
        throw Error(ErrorCode::input,
                    fmt::format("graph has {} edges but the interface condition is {}x{}", graph_.n(), ic_.n(),
                                ic_.n()));
    }
    if (graph_.non_artificial_count() < ic_.r()) {
        throw Error(ErrorCode::d5_violation,
                    fmt::format("only {} non-artificial edges for rank B = {}", graph_.non_artificial_count(),
                                ic_.r()));
    }
    if (satisfies_d4(ic_, tol)) nf_ = to_normal_form(ic_, tol);
}

CoupledSample Coupling::eval(Complex z, MEvalMethod method) const {
    if (z.imag() == 0.0) throw Error(ErrorCode::input, "M_w needs Im z != 0");
    return eval(eval_m0(graph_, z, method));
}

CoupledSample Coupling::eval(const WeylSample& m0) const {
    CoupledSample s;
    s.z = m0.z;
    s.m0 = m0.m0;

    const ComplexMatrix denom = ic_.a() + ic_.b() * m0.m0;
    const Eigen::VectorXd sigma = singular_values(denom);
    const double smax = sigma[0];
    const double smin = sigma[sigma.size() - 1];
    if (!(smin > 1e-15 * smax)) {
        throw Error(ErrorCode::invertibility,
                    fmt::format("A + B M0(z) is singular at z = {}{:+}i (fewer usable edges than rank B?)",
                                s.z.real(), s.z.imag()),
                    smin == 0.0 ? INFINITY : smax / smin);
    }
    s.condition = smax / smin;
    s.ill_conditioned = s.condition > kIllConditioned;

    s.mw = mw_direct(completion_, m0.m0);
    if (nf_) {
        if (nf_->r > 0) s.d_schur = eval_d_schur(*nf_, m0);
        const ComplexMatrix other = mw_schur(*nf_, m0.m0);
        s.path_discrepancy = max_abs(s.mw - other);
        const double scale = std::max(1.0, max_abs(s.mw));
        const double allowed = std::max(kPathTolerance, 1e-15 * s.condition) * scale;
        if (s.path_discrepancy > allowed) {
            throw Error(ErrorCode::internal,
                        fmt::format("M_w paths disagree by {:.3e} at z = {}{:+}i", s.path_discrepancy,
                                    s.z.real(), s.z.imag()),
                        s.path_discrepancy);
        }
    }

    // Im M_w = (A + B M0)^{-*} Im M0 (A + B M0)^{-1}.
    const ComplexMatrix im_m0 = imaginary_part(m0.m0);
    const auto lu = denom.partialPivLu();
    const ComplexMatrix right = lu.inverse();
    s.im_mw = right.adjoint() * im_m0 * right;
    s.im_mw = 0.5 * (s.im_mw + s.im_mw.adjoint()).eval();
    s.trace_im = s.im_mw.trace().real();

    const double im_defect = max_abs(s.im_mw - imaginary_part(s.mw));
    const double im_allowed = std::max(kPathTolerance, 1e-15 * s.condition) * std::max(1.0, max_abs(s.mw));
    if (im_defect > im_allowed) {
        throw Error(ErrorCode::internal,
                    fmt::format("Im M_w congruence disagrees with M_w by {:.3e}", im_defect), im_defect);
    }
    return s;
}

CoupledSample eval_mw(const StarGraph& graph, const InterfaceCondition& ic, Complex z) {
    return Coupling(graph, ic).eval(z);
}

void write_samples_csv(std::ostream& out, const std::vector<CoupledSample>& samples) {
    if (samples.empty()) {
        out << "z_re,z_im,trace_im\n";
        return;
    }
    const auto n = samples.front().mw.rows();
    out << "z_re,z_im";
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) out << fmt::format(",Mw{}{}_re,Mw{}{}_im", i, j, i, j);
    }
    out << ",trace_im\n";
    for (const auto& s : samples) {
        out << fmt::format("{:.17g},{:.17g}", s.z.real(), s.z.imag());
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                out << fmt::format(",{:.17g},{:.17g}", s.mw(i, j).real(), s.mw(i, j).imag());
            }
        }
        out << fmt::format(",{:.17g}\n", s.trace_im);
    }
}

}  // namespace qgraph
