#include "qgraph/boundary_limits.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace qgraph {

namespace {

struct Trail {
    std::vector<double> eps;
    std::vector<double> trace_im;
    std::vector<ComplexMatrix> ratio;
};

// Consecutive trailing iterates within `tol` of each other.
bool settled(const std::vector<ComplexMatrix>& iterates, int window, double tol) {
    const auto count = static_cast<int>(iterates.size());
    if (count < window || window < 2) return false;
    for (int k = count - window + 1; k < count; ++k) {
        if ((iterates[static_cast<std::size_t>(k)] - iterates[static_cast<std::size_t>(k - 1)]).norm() >= tol) {
            return false;
        }
    }
    return true;
}

double trailing_slope(const Trail& t, int window) {
    const auto count = static_cast<int>(t.eps.size());
    const int start = std::max(0, count - std::max(window, 2));
    std::vector<double> x(t.eps.begin() + start, t.eps.end());
    std::vector<double> y(t.trace_im.begin() + start, t.trace_im.end());
    return loglog_slope(x, y);
}

std::vector<WeylSample> m0_samples(const StarGraph& graph, double x, const EpsSchedule& sched) {
    sched.validate();
    std::vector<WeylSample> out;
    out.reserve(sched.eps_values.size());
    for (double e : sched.eps_values) out.push_back(eval_m0(graph, Complex(x, e)));
    return out;
}

LimitSample alpha_from_samples(const std::vector<WeylSample>& samples, double x, const EpsSchedule& sched,
                               const LimitOptions& opts) {
    Trail t;
    LimitSample out;
    out.x = x;
    for (const auto& s : samples) {
        const ComplexMatrix im = imaginary_part(s.m0);
        const double tr = im.trace().real();
        if (!(tr > 0.0)) {
            throw Error(ErrorCode::degenerate,
                        fmt::format("Im tr M0 vanishes at x = {} (eps = {}); no usable edge", x, s.z.imag()));
        }
        t.eps.push_back(s.z.imag());
        t.trace_im.push_back(tr);
        t.ratio.push_back(im / tr);
        out.trace_defect = std::max(out.trace_defect, std::abs(t.ratio.back().trace().real() - 1.0));
    }
    out.alpha = t.ratio.back();
    out.alpha_rank = static_cast<int>(rank_tol(out.alpha, opts.limit_rank, 1.0));
    out.stable = settled(t.ratio, sched.stability_window, opts.stability_tol);
    out.growth_exponent = trailing_slope(t, sched.stability_window);
    return out;
}

}  // namespace

EpsSchedule EpsSchedule::down_to(double smallest) {
    EpsSchedule s;
    s.eps_values.clear();
    for (double e = 1e-2; e >= smallest * (1.0 - 1e-9); e /= 10.0) s.eps_values.push_back(e);
    s.validate();
    return s;
}

void EpsSchedule::validate() const {
    if (eps_values.empty()) throw Error(ErrorCode::input, "eps schedule is empty");
    for (std::size_t k = 0; k < eps_values.size(); ++k) {
        if (!(eps_values[k] > 0.0)) throw Error(ErrorCode::input, "eps values must be positive");
        if (k > 0 && !(eps_values[k] < eps_values[k - 1])) {
            throw Error(ErrorCode::input, "eps values must be strictly decreasing");
        }
    }
    if (stability_window < 2 || stability_window > static_cast<int>(eps_values.size())) {
        throw Error(ErrorCode::input,
                    fmt::format("stability window {} must lie in [2, {}]", stability_window, eps_values.size()));
    }
}

LimitSample estimate_alpha(const StarGraph& graph, double x, const EpsSchedule& sched,
                           const LimitOptions& opts) {
    graph.validate();
    return alpha_from_samples(m0_samples(graph, x, sched), x, sched, opts);
}

Lemma9Prediction lemma9_predict(const NormalForm& nf, const LimitSample& sample, const LimitOptions& opts) {
    const int n = nf.n;
    const int r = nf.r;
    Lemma9Prediction out;
    out.limit = ComplexMatrix::Zero(n, n);
    if (sample.alpha_rank < r) {
        throw Error(ErrorCode::degenerate,
                    fmt::format("rank alpha = {} is below r = {}; the limit formula does not apply",
                                sample.alpha_rank, r));
    }
    if (sample.alpha_rank == r) return out;

    const ComplexMatrix alpha = nf.p.transpose() * sample.alpha * nf.p;
    const ComplexMatrix a11 = alpha.topLeftCorner(n - r, n - r);
    const ComplexMatrix a22 = alpha.bottomRightCorner(r, r);
    out.h = a22 + nf.a1.adjoint() * a11 * nf.a1;
    if (r > 0 && rank_tol(out.h, opts.limit_rank, 1.0) != static_cast<std::size_t>(r)) {
        throw Error(ErrorCode::theorem_violation,
                    fmt::format("H(x) is singular although rank alpha = {} > r = {}", sample.alpha_rank, r));
    }
    ComplexMatrix block = a11;
    if (r > 0) block -= a11 * nf.a1 * out.h.partialPivLu().solve(nf.a1.adjoint() * a11);
    out.limit.topLeftCorner(n - r, n - r) = block;
    out.rank = static_cast<int>(rank_tol(out.limit, opts.limit_rank, 1.0));
    return out;
}

NabEstimate estimate_nab(const Coupling& coupling, double x, const EpsSchedule& sched,
                         const LimitOptions& opts) {
    const auto samples = m0_samples(coupling.graph(), x, sched);
    NabEstimate out;
    out.alpha = alpha_from_samples(samples, x, sched, opts);

    Trail t;
    ComplexMatrix last_im;
    for (const auto& s : samples) {
        const CoupledSample c = coupling.eval(s);
        t.eps.push_back(s.z.imag());
        // Keep the trace strictly positive for the log fit; a vanishing trace means decay.
        t.trace_im.push_back(std::max(c.trace_im, 1e-300));
        t.ratio.push_back(c.im_mw / std::max(c.trace_im, 1e-300));
        last_im = c.im_mw;
    }
    out.growth_exponent = trailing_slope(t, sched.stability_window);
    out.in_spectrum = out.growth_exponent <= opts.decay_exponent;
    out.ratio = t.ratio.back();
    const double tr_m0 = imaginary_part(samples.back().m0).trace().real();
    out.ratio_to_m = last_im / tr_m0;
    out.stable = settled(t.ratio, sched.stability_window, opts.stability_tol);
    out.nab = out.in_spectrum ? static_cast<int>(rank_tol(out.ratio, opts.limit_rank, 1.0)) : 0;

    const auto& nf = coupling.normal_form();
    const bool singular = out.alpha.growth_exponent < opts.singular_exponent;
    if (nf && singular && out.alpha.stable && out.alpha.alpha_rank >= nf->r) {
        out.prediction = lemma9_predict(*nf, out.alpha, opts);
        // Im M_w in normal-form coordinates: Q^{-*} Im M_w Q^{-1}.
        const auto qlu = nf->q.partialPivLu();
        const ComplexMatrix right = qlu.inverse();
        const ComplexMatrix observed = right.adjoint() * last_im * right / tr_m0;
        out.prediction_error = (observed - out.prediction->limit).norm();
    }
    return out;
}

const char* to_string(Regime regime) {
    switch (regime) {
    case Regime::ac: return "ac";
    case Regime::n0_zero: return "N0=0";
    case Regime::n0_above_r: return "N0>r";
    case Regime::n0_equal_r: return "N0=r";
    case Regime::n0_below_r: return "0<N0<r";
    }
    return "unknown";
}

bool MultiplicityProfile::any_violation() const noexcept {
    return std::any_of(points.begin(), points.end(), [](const ProfilePoint& p) { return p.violation; });
}

MultiplicityProfile scan(const Coupling& coupling, const std::vector<double>& grid, const EpsSchedule& sched,
                         const LimitOptions& opts) {
    MultiplicityProfile profile;
    const int r = coupling.ic().r();
    profile.r = r;
    for (double x : grid) {
        ProfilePoint p;
        p.x = x;
        p.estimate = estimate_nab(coupling, x, sched, opts);
        const auto& est = p.estimate;
        const int n0 = est.alpha.alpha_rank;
        const double g = est.alpha.growth_exponent;
        bool ok = true;
        if (g > opts.decay_exponent) {
            p.regime = Regime::n0_zero;
            ok = est.nab <= r;
        } else if (g >= opts.singular_exponent) {
            // Bounded nonzero Im M0: absolutely continuous part, multiplicity preserved.
            p.regime = Regime::ac;
            ok = est.nab == n0;
        } else if (n0 > r) {
            p.regime = Regime::n0_above_r;
            ok = est.nab == n0 - r;
        } else if (n0 == r) {
            p.regime = Regime::n0_equal_r;
            ok = est.nab == 0;
        } else {
            p.regime = Regime::n0_below_r;
            ok = est.nab <= r - n0;
        }
        // Integer relations are only judged where both limits settled.
        p.violation = !ok && est.stable && est.alpha.stable;
        profile.points.push_back(std::move(p));
    }
    return profile;
}

void write_profile_csv(std::ostream& out, const MultiplicityProfile& profile) {
    out << "x,alpha_rank,nab,regime,stable,growth_exponent\n";
    for (const auto& p : profile.points) {
        const bool stable = p.estimate.stable && p.estimate.alpha.stable;
        out << fmt::format("{:.17g},{},{},{},{},{:.6g}\n", p.x, p.estimate.alpha.alpha_rank, p.estimate.nab,
                           to_string(p.regime), stable ? 1 : 0, p.estimate.alpha.growth_exponent);
    }
}

}  // namespace qgraph
