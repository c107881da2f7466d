#include "qgraph/weyl_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

namespace qgraph {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<Complex, 2>;

constexpr double kShootTolerance = 1e-12;
constexpr double kPoleThreshold = 1e-10;

// cos(w) e^{-|Im w|} and sin(w) e^{-|Im w|}: bounded for any w.
std::pair<Complex, Complex> scaled_cos_sin(Complex w) {
    const double b = w.imag();
    const double shrink = std::abs(b);
    const Complex plus = std::polar(std::exp(-b - shrink), w.real());    // e^{iw} e^{-|b|}
    const Complex minus = std::polar(std::exp(b - shrink), -w.real());   // e^{-iw} e^{-|b|}
    return {0.5 * (plus + minus), (plus - minus) / (2.0 * I_UNIT)};
}

State normalized(State s) {
    const double norm = std::sqrt(std::norm(s[0]) + std::norm(s[1]));
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorCode::solver, "Weyl solution vanished or overflowed");
    }
    return {s[0] / norm, s[1] / norm};
}

State closed_form_regular(const EdgeSpec& edge, Complex z) {
    const Complex k = sqrt_upper(z);
    const double len = edge.length;
    const Complex w = k * len;
    const auto [c, s] = scaled_cos_sin(w);
    // sin(kL)/k, with the removable singularity at k = 0 handled by series.
    Complex sin_over_k;
    if (std::abs(w) < 1e-4) {
        sin_over_k = len * (1.0 - w * w / 6.0) * std::exp(-std::abs(w.imag()));
    } else {
        sin_over_k = s / k;
    }
    const double sb = std::sin(edge.beta);
    const double cb = std::cos(edge.beta);
    // u(L) = sin(beta), u'(L) = -cos(beta), carried back to the vertex.
    return normalized({sb * c + cb * sin_over_k, sb * k * s - cb * c});
}

// Integrates -u'' + q u = z u from t_start down to 0, starting from `init`
// = (u, u') at t_start. Pieces end at potential knots and unit steps; the
// state is renormalized between pieces so growing solutions stay finite.
State shoot_to_vertex(const Potential& q, Complex z, double t_start, State init) {
    std::vector<double> cuts;
    for (double x : q.xs) {
        if (x > 0.0 && x < t_start) cuts.push_back(x);
    }
    for (double x = std::floor(t_start); x > 0.0; x -= 1.0) {
        if (x < t_start) cuts.push_back(x);
    }
    cuts.push_back(0.0);
    std::sort(cuts.begin(), cuts.end(), std::greater<>());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // In s = t_start - t: du/ds = -u', du'/ds = (z - q) u.
    auto rhs = [&](const State& y, State& dy, double s) {
        const double t = t_start - s;
        dy[0] = -y[1];
        dy[1] = (z - q(t)) * y[0];
    };
    State y = normalized(init);
    double t = t_start;
    for (double next : cuts) {
        if (next >= t) continue;
        auto stepper = odeint::make_controlled(kShootTolerance, kShootTolerance,
                                               odeint::runge_kutta_dopri5<State, double, State, double>());
        const double s0 = t_start - t;
        const double s1 = t_start - next;
        const double dt = std::min(1e-2, s1 - s0);
        try {
            odeint::integrate_adaptive(stepper, rhs, y, s0, s1, dt);
        } catch (const std::exception& e) {
            throw Error(ErrorCode::solver, fmt::format("shooting failed at t = {}: {}", next, e.what()));
        }
        y = normalized(y);
        t = next;
    }
    return y;
}

State shooting_regular(const EdgeSpec& edge, Complex z) {
    return shoot_to_vertex(edge.potential, z, edge.length, {std::sin(edge.beta), -std::cos(edge.beta)});
}

State half_line_boundary(const EdgeSpec& edge, Complex z, MEvalMethod method) {
    const Complex k = sqrt_upper(z);
    const State free{1.0, I_UNIT * k};
    const double support = edge.potential.is_zero() ? 0.0 : edge.potential.support_end();
    if (support <= 0.0 && method != MEvalMethod::shooting) return normalized(free);
    if (method == MEvalMethod::closed_form) {
        throw Error(ErrorCode::unsupported, "closed form needs q = 0");
    }
    // Beyond the support the solution is e^{ikt}; carry it back to the vertex.
    return shoot_to_vertex(edge.potential, z, std::max(support, 1.0), free);
}

double herglotz_tolerance(Complex m) { return 1e-12 * (1.0 + std::abs(m)); }

}  // namespace

const char* to_string(EdgeKind kind) {
    switch (kind) {
    case EdgeKind::regular: return "regular";
    case EdgeKind::half_line: return "half_line";
    case EdgeKind::artificial: return "artificial";
    }
    return "unknown";
}

double Potential::operator()(double x) const {
    if (xs.empty() || x < xs.front() || x > xs.back()) return 0.0;
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) return qs.back();
    const auto j = static_cast<std::size_t>(it - xs.begin());
    if (j == 0) return qs.front();
    const double x0 = xs[j - 1];
    const double x1 = xs[j];
    const double w = (x - x0) / (x1 - x0);
    return (1.0 - w) * qs[j - 1] + w * qs[j];
}

EdgeSpec EdgeSpec::regular(double length, double beta, Potential q) {
    EdgeSpec e;
    e.kind = EdgeKind::regular;
    e.length = length;
    e.beta = beta;
    e.potential = std::move(q);
    e.validate();
    return e;
}

EdgeSpec EdgeSpec::half_line(Potential q) {
    EdgeSpec e;
    e.kind = EdgeKind::half_line;
    e.length = std::numeric_limits<double>::infinity();
    e.potential = std::move(q);
    e.validate();
    return e;
}

EdgeSpec EdgeSpec::artificial(double m_const) {
    EdgeSpec e;
    e.kind = EdgeKind::artificial;
    e.m_const = m_const;
    e.validate();
    return e;
}

void EdgeSpec::validate() const {
    const auto& q = potential;
    if (q.xs.size() != q.qs.size()) throw Error(ErrorCode::input, "potential xs and qs differ in length");
    if (q.xs.size() == 1) throw Error(ErrorCode::input, "potential needs at least two samples");
    for (std::size_t i = 0; i < q.xs.size(); ++i) {
        if (!std::isfinite(q.xs[i]) || !std::isfinite(q.qs[i])) {
            throw Error(ErrorCode::input, "potential samples must be finite");
        }
        if (i > 0 && !(q.xs[i] > q.xs[i - 1])) {
            throw Error(ErrorCode::input, "potential abscissae must be strictly increasing");
        }
    }
    if (!q.xs.empty() && q.xs.front() < 0.0) throw Error(ErrorCode::input, "potential starts before 0");
    switch (kind) {
    case EdgeKind::regular:
        if (!(length > 0.0) || !std::isfinite(length)) {
            throw Error(ErrorCode::input, fmt::format("regular edge needs finite positive length, got {}", length));
        }
        if (!(beta >= 0.0 && beta < M_PI)) {
            throw Error(ErrorCode::input, fmt::format("outer angle must lie in [0, pi), got {}", beta));
        }
        break;
    case EdgeKind::half_line:
        if (!std::isinf(length)) throw Error(ErrorCode::input, "half-line must have infinite length");
        break;
    case EdgeKind::artificial:
        if (!std::isfinite(m_const)) throw Error(ErrorCode::input, "artificial edge constant must be finite");
        if (!q.is_zero()) throw Error(ErrorCode::input, "artificial edge cannot carry a potential");
        break;
    }
}

int StarGraph::non_artificial_count() const noexcept {
    return static_cast<int>(std::count_if(edges.begin(), edges.end(), [](const EdgeSpec& e) {
        return e.kind != EdgeKind::artificial;
    }));
}

void StarGraph::validate() const {
    if (n() < 2) throw Error(ErrorCode::input, fmt::format("star graph needs n >= 2 edges, got {}", n()));
    for (std::size_t l = 0; l < edges.size(); ++l) {
        try {
            edges[l].validate();
        } catch (Error& e) {
            throw e.with_edge(l);
        }
    }
    if (non_artificial_count() == 0) throw Error(ErrorCode::input, "all edges are artificial");
}

Complex WeylSample::trace() const {
    Complex t = 0.0;
    for (const Complex& v : m) t += v;
    return t;
}

Complex sqrt_upper(Complex z) {
    Complex k = std::sqrt(z);
    if (k.imag() < 0.0) k = -k;
    return k;
}

std::array<Complex, 2> weyl_solution_boundary(const EdgeSpec& edge, Complex z, MEvalMethod method) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw Error(ErrorCode::input, "z not finite");
    switch (edge.kind) {
    case EdgeKind::artificial:
        throw Error(ErrorCode::unsupported, "artificial edges have no Weyl solution");
    case EdgeKind::half_line:
        return half_line_boundary(edge, z, method);
    case EdgeKind::regular:
        break;
    }
    const bool closed = method == MEvalMethod::closed_form ||
                        (method == MEvalMethod::automatic && edge.potential.is_zero());
    if (closed) {
        if (!edge.potential.is_zero()) throw Error(ErrorCode::unsupported, "closed form needs q = 0");
        return closed_form_regular(edge, z);
    }
    return shooting_regular(edge, z);
}

Complex eval_m_edge(const EdgeSpec& edge, Complex z, MEvalMethod method) {
    if (edge.kind == EdgeKind::artificial) return edge.m_const;
    const auto [u, du] = weyl_solution_boundary(edge, z, method);
    if (std::abs(u) <= kPoleThreshold) {
        // Near a pole m(z') ~ c/(z' - z); probe slightly above the real axis.
        const double delta = 1e-6 * std::max(1.0, std::abs(z));
        const Complex probe = z + I_UNIT * delta;
        const auto [pu, pdu] = weyl_solution_boundary(edge, probe, method);
        const Complex residue = (pdu / pu) * (I_UNIT * delta);
        throw Error(ErrorCode::pole,
                    fmt::format("Weyl function has a pole at z = {}{:+}i (residue ~ {:.6g})", z.real(),
                                z.imag(), residue.real()),
                    residue.real());
    }
    const Complex m = du / u;
    if (z.imag() > 0.0 && m.imag() < -herglotz_tolerance(m)) {
        throw Error(ErrorCode::internal,
                    fmt::format("Herglotz sign violated: Im m = {:.3e} at z = {}{:+}i", m.imag(), z.real(),
                                z.imag()),
                    m.imag());
    }
    if (z.imag() < 0.0 && m.imag() > herglotz_tolerance(m)) {
        throw Error(ErrorCode::internal, "Herglotz sign violated in the lower half plane", m.imag());
    }
    return m;
}

WeylSample eval_m0(const StarGraph& graph, Complex z, MEvalMethod method) {
    if (graph.n() < 1) throw Error(ErrorCode::input, "empty graph");
    WeylSample s;
    s.z = z;
    s.m.resize(graph.edges.size());
    for (std::size_t l = 0; l < graph.edges.size(); ++l) {
        try {
            s.m[l] = eval_m_edge(graph.edges[l], z, method);
        } catch (Error& e) {
            throw e.with_edge(l);
        }
    }
    s.m0 = ComplexMatrix::Zero(graph.n(), graph.n());
    for (int l = 0; l < graph.n(); ++l) s.m0(l, l) = s.m[static_cast<std::size_t>(l)];
    return s;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorCode::input, "loglog_slope needs at least two matching samples");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto count = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = count * sxx - sx * sx;
    if (denom == 0.0) throw Error(ErrorCode::input, "loglog_slope: abscissae coincide");
    return (count * sxy - sx * sy) / denom;
}

bool HerglotzReport::ok() const noexcept {
    return std::all_of(edges.begin(), edges.end(), [](const HerglotzEdgeReport& e) {
        return e.positivity_violations == 0 && e.monotonicity_violations == 0;
    });
}

HerglotzReport herglotz_diagnostic(const std::vector<WeylSample>& samples) {
    HerglotzReport report;
    if (samples.empty()) return report;
    const std::size_t n = samples.front().m.size();
    report.edges.resize(n);
    constexpr std::size_t kFitWindow = 3;

    for (std::size_t l = 0; l < n; ++l) {
        auto& edge = report.edges[l];
        std::vector<double> eps;
        std::vector<double> im;
        double previous = std::numeric_limits<double>::infinity();
        for (const auto& s : samples) {
            const double e = s.z.imag();
            const Complex m = s.m.at(l);
            if (e > 0.0 && m.imag() < -herglotz_tolerance(m)) ++edge.positivity_violations;
            const double weighted = e * m.imag();
            if (weighted > previous * (1.0 + 1e-9) + 1e-14) ++edge.monotonicity_violations;
            previous = weighted;
            eps.push_back(e);
            im.push_back(m.imag());
        }
        const std::size_t start = eps.size() > kFitWindow ? eps.size() - kFitWindow : 0;
        std::vector<double> fx(eps.begin() + static_cast<std::ptrdiff_t>(start), eps.end());
        std::vector<double> fy(im.begin() + static_cast<std::ptrdiff_t>(start), im.end());
        const bool positive = std::all_of(fy.begin(), fy.end(), [](double v) { return v > 1e-300; });
        if (fx.size() >= 2 && positive) edge.growth_exponent = loglog_slope(fx, fy);
    }
    return report;
}

}  // namespace qgraph
