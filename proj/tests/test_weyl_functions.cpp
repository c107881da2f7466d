#include <doctest.h>

#include <cmath>

#include "qgraph/weyl_functions.hpp"
#include "test_support.hpp"

using namespace qgraph;

namespace {

// -u'' + c u = z u on [0, L] with Dirichlet outer end: m = -k cot(kL), k = sqrt(z - c).
Complex dirichlet_m(Complex z, double length, double c = 0.0) {
    const Complex k = sqrt_upper(z - c);
    return -k * std::cos(k * length) / std::sin(k * length);
}

// Outer condition cos(b) u(L) + sin(b) u'(L) = 0, q = 0.
Complex robin_m(Complex z, double length, double beta) {
    const Complex k = sqrt_upper(z);
    const Complex s = std::sin(k * length);
    const Complex c = std::cos(k * length);
    const double sb = std::sin(beta);
    const double cb = std::cos(beta);
    return (sb * k * s - cb * c) / (sb * c + cb * s / k);
}

}  // namespace

TEST_SUITE("weyl_functions") {

TEST_CASE("Dirichlet pi edge at z = -1 equals -coth(pi)") {
    const EdgeSpec e = EdgeSpec::regular(M_PI);
    const double expected = -1.0 / std::tanh(M_PI);
    CHECK(std::abs(eval_m_edge(e, -1.0, MEvalMethod::closed_form) - expected) < 1e-12);
    CHECK(std::abs(eval_m_edge(e, -1.0, MEvalMethod::shooting) - expected) < 1e-10);
    CHECK(expected == doctest::Approx(-1.003742).epsilon(1e-6));
}

TEST_CASE("free half-line and artificial edge") {
    const Complex m = eval_m_edge(EdgeSpec::half_line(), I_UNIT);
    CHECK(m.real() == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-12));
    CHECK(m.imag() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(eval_m_edge(EdgeSpec::artificial(2.5), Complex(3.0, 1.0)) == Complex(2.5, 0.0));
}

TEST_CASE("M0 assembly") {
    StarGraph g{{EdgeSpec::half_line(), EdgeSpec::half_line()}};
    const WeylSample s = eval_m0(g, I_UNIT);
    const Complex v = I_UNIT * std::sqrt(I_UNIT);
    CHECK(std::abs(s.m0(0, 0) - v) < 1e-14);
    CHECK(std::abs(s.m0(1, 1) - v) < 1e-14);
    CHECK(std::abs(s.m0(0, 1)) == 0.0);

    StarGraph h{{EdgeSpec::half_line(), EdgeSpec::artificial(0.0)}};
    const WeylSample t = eval_m0(h, 2.0 * I_UNIT);
    CHECK(std::abs(t.m[0] - I_UNIT * std::sqrt(2.0 * I_UNIT)) < 1e-14);
    CHECK(t.m[1] == Complex(0.0, 0.0));
}

TEST_CASE("conjugation symmetry and Herglotz sign on a log grid") {
    const StarGraph g = fixture("mixed_potential.json");
    StarGraph all = g;
    all.edges.push_back(EdgeSpec::artificial(-0.3));
    all.edges.push_back(EdgeSpec::regular(M_PI));
    for (double re : {-20.0, -1.0, 0.3, 2.0, 17.0}) {
        for (double im = 1e-4; im <= 1e2; im *= 10.0) {
            const Complex z(re, im);
            const WeylSample up = eval_m0(all, z);
            const WeylSample down = eval_m0(all, std::conj(z));
            for (int l = 0; l < all.n(); ++l) {
                const Complex m = up.m[static_cast<std::size_t>(l)];
                CHECK(m.imag() >= -1e-12);
                CHECK(std::abs(down.m[static_cast<std::size_t>(l)] - std::conj(m)) <= 1e-10 * std::max(1.0, std::abs(m)));
            }
        }
    }
}

TEST_CASE("shooting matches the closed forms for q = 0") {
    for (double beta : {0.0, M_PI / 2, 1.1}) {
        const EdgeSpec e = EdgeSpec::regular(2.3, beta);
        for (double re : {-60.0, -3.0, 0.0, 0.7, 9.0, 80.0}) {
            for (double im : {1e-4, 1e-2, 1.0, 30.0}) {
                const Complex z(re, im);
                if (std::abs(z) > 100.0) continue;
                const Complex closed = eval_m_edge(e, z, MEvalMethod::closed_form);
                const Complex shot = eval_m_edge(e, z, MEvalMethod::shooting);
                const Complex oracle = robin_m(z, 2.3, beta);
                CHECK(std::abs(closed - oracle) <= 1e-9 * std::max(1.0, std::abs(oracle)));
                CHECK(std::abs(shot - closed) <= 1e-8 * std::max(1.0, std::abs(closed)));
            }
        }
    }
}

TEST_CASE("closed form survives large imaginary arguments") {
    const EdgeSpec e = EdgeSpec::regular(50.0);
    const Complex m = eval_m_edge(e, Complex(-400.0, 1.0));
    // Deep in the decaying regime the edge looks like a half-line.
    CHECK(std::abs(m - I_UNIT * sqrt_upper(Complex(-400.0, 1.0))) < 1e-8);
}

TEST_CASE("constant potential shifts the spectral parameter") {
    Potential q{{0.0, 1.7}, {0.8, 0.8}};
    const EdgeSpec e = EdgeSpec::regular(1.7, 0.0, q);
    for (Complex z : {Complex(-2.0, 0.5), Complex(3.0, 1e-3), Complex(25.0, 2.0)}) {
        CHECK(std::abs(eval_m_edge(e, z) - dirichlet_m(z, 1.7, 0.8)) < 1e-8 * std::abs(dirichlet_m(z, 1.7, 0.8)));
    }
}

TEST_CASE("half-line with a compactly supported step potential") {
    // q = -2 on [0, 1.5], zero beyond: match a cos/sin solution to e^{ikt} at t = 1.5.
    Potential q{{0.0, 1.5}, {-2.0, -2.0}};
    const EdgeSpec e = EdgeSpec::half_line(q);
    for (Complex z : {Complex(1.0, 0.5), Complex(-4.0, 0.1), Complex(0.2, 3.0)}) {
        const Complex k = sqrt_upper(z);
        const Complex kap = std::sqrt(z + 2.0);
        const double t = 1.5;
        // u(t) = a cos(kap t) + b sin(kap t) with u(1.5) = 1, u'(1.5) = ik.
        const Complex c = std::cos(kap * t);
        const Complex s = std::sin(kap * t);
        const Complex a = c - I_UNIT * k * s / kap;
        const Complex b = s + I_UNIT * k * c / kap;
        const Complex oracle = b * kap / a;
        CHECK(std::abs(eval_m_edge(e, z) - oracle) < 1e-8 * std::abs(oracle));
    }
}

TEST_CASE("truncated half-lines converge to the free half-line") {
    const Complex z(1.0, 0.5);
    const Complex target = I_UNIT * sqrt_upper(z);
    const double err20 = std::abs(eval_m_edge(EdgeSpec::regular(20.0), z) - target);
    const double err40 = std::abs(eval_m_edge(EdgeSpec::regular(40.0), z) - target);
    // Dirichlet end: m - ik = 2ik e^{2ikL} / (e^{2ikL} - 1), so the error is about 2|k| e^{-2 Im(k) L}.
    const Complex k = sqrt_upper(z);
    for (auto [l, err] : {std::pair{20.0, err20}, std::pair{40.0, err40}}) {
        const double leading = 2.0 * std::abs(k) * std::exp(-2.0 * k.imag() * l);
        CHECK(err == doctest::Approx(leading).epsilon(1e-3));
    }
}

TEST_CASE("pole at a Dirichlet eigenvalue carries the residue") {
    try {
        eval_m_edge(EdgeSpec::regular(M_PI), 1.0);
        FAIL("expected a pole");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::pole);
        CHECK(e.detail() == doctest::Approx(-2.0 / M_PI).epsilon(1e-4));
    }
}

TEST_CASE("Herglotz diagnostic growth exponents") {
    std::vector<WeylSample> half;
    StarGraph g{{EdgeSpec::half_line(), EdgeSpec::regular(M_PI), EdgeSpec::artificial(1.0)}};
    for (double eps = 1e-1; eps >= 1e-6 * 0.999; eps /= 10.0) half.push_back(eval_m0(g, Complex(1.0, eps)));
    const HerglotzReport r = herglotz_diagnostic(half);
    REQUIRE(r.edges.size() == 3);
    CHECK(r.ok());
    REQUIRE(r.edges[0].growth_exponent);
    CHECK(std::abs(*r.edges[0].growth_exponent) < 1e-3);
    CHECK(half.back().m[0].imag() == doctest::Approx(1.0).epsilon(1e-5));
    REQUIRE(r.edges[1].growth_exponent);
    CHECK(*r.edges[1].growth_exponent == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK_FALSE(r.edges[2].growth_exponent.has_value());
}

TEST_CASE("edge validation") {
    CHECK_THROWS_AS(EdgeSpec::regular(-1.0), Error);
    CHECK_THROWS_AS(EdgeSpec::regular(1.0, M_PI), Error);
    CHECK_THROWS_AS(EdgeSpec::regular(1.0, 0.0, Potential{{0.0, 1.0}, {1.0}}), Error);
    StarGraph one{{EdgeSpec::regular(1.0)}};
    CHECK_THROWS_AS(one.validate(), Error);
    StarGraph fake{{EdgeSpec::artificial(1.0), EdgeSpec::artificial(2.0)}};
    CHECK_THROWS_AS(fake.validate(), Error);
}

}
