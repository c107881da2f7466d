#include <doctest.h>

#include <sstream>

#include "qgraph/point_spectrum.hpp"
#include "test_support.hpp"

using namespace qgraph;

namespace {

std::vector<EdgeClassification> classes_of(const std::vector<EdgeClass>& cls, const std::vector<double>& m) {
    std::vector<EdgeClassification> out;
    for (std::size_t i = 0; i < cls.size(); ++i) {
        EdgeClassification c;
        c.edge_index = static_cast<int>(i);
        c.cls = cls[i];
        c.m_value = m[i];
        out.push_back(c);
    }
    return out;
}

}  // namespace

TEST_SUITE("point_spectrum") {

TEST_CASE("edge classification") {
    const EdgeSpec pi = EdgeSpec::regular(M_PI);
    CHECK(classify_edge_at(pi, 1.0).cls == EdgeClass::in_jp);
    const EdgeClassification two = classify_edge_at(pi, 2.0);
    CHECK(two.cls == EdgeClass::in_jpstar_not_jp);
    const double k = std::sqrt(2.0);
    CHECK(two.m_value == doctest::Approx(-k / std::tan(k * M_PI)).epsilon(1e-10));
    const EdgeClassification art = classify_edge_at(EdgeSpec::artificial(0.0), 3.0);
    CHECK(art.cls == EdgeClass::in_jm);
    CHECK(art.m_value == 0.0);
    CHECK(classify_edge_at(EdgeSpec::half_line(), 1.0).cls == EdgeClass::none);
    const EdgeClassification neg = classify_edge_at(EdgeSpec::half_line(), -4.0);
    CHECK(neg.cls == EdgeClass::in_jpstar_not_jp);
    CHECK(neg.m_value == doctest::Approx(-2.0));
}

TEST_CASE("gamma for empty and full eigenvalue sets") {
    const InterfaceCondition st = standard_condition(3);
    const GammaProblem none = build_gamma(st, classes_of({EdgeClass::none, EdgeClass::none, EdgeClass::none}, {0, 0, 0}));
    CHECK(none.gamma.norm() == 0.0);
    CHECK(none.ker_gamma_dim == 3);
    CHECK(none.ker_gamma_cap_ker_xi_dim == 3);
    CHECK(none.np_ab == 0);

    const GammaProblem all = build_gamma(st, classes_of({EdgeClass::in_jp, EdgeClass::in_jp, EdgeClass::in_jp}, {0, 0, 0}));
    CHECK(all.ker_gamma_dim == 2);
    CHECK(all.ker_gamma_cap_ker_xi_dim == 0);
    CHECK(all.np_ab == 2);
    CHECK(all.lemma5_case == 1);
}

TEST_CASE("antidecoupled pair counts zeros of m") {
    const InterfaceCondition ic = antidecoupled_condition(2);
    const auto both = classes_of({EdgeClass::in_jpstar_not_jp, EdgeClass::in_jpstar_not_jp}, {0.0, 0.0});
    CHECK(build_gamma(ic, both).np_ab == 2);
    const auto one = classes_of({EdgeClass::in_jpstar_not_jp, EdgeClass::in_jpstar_not_jp}, {0.0, 1.3});
    CHECK(build_gamma(ic, one).np_ab == 1);
    const auto zero = classes_of({EdgeClass::in_jpstar_not_jp, EdgeClass::in_jpstar_not_jp}, {-0.7, 1.3});
    CHECK(build_gamma(ic, zero).np_ab == 0);
}

TEST_CASE("multiplicities on the fixtures") {
    const StarGraph three = fixture("three_pi.json");
    for (double x : {1.0, 4.0, 9.0}) {
        const GammaProblem g = point_multiplicity(three, standard_condition(3), x);
        CHECK(g.np_0 == 3);
        CHECK(g.np_ab == 2);
    }
    const StarGraph mixed = fixture("pi_pi_halfpi.json");
    CHECK(point_multiplicity(mixed, standard_condition(3), 1.0).np_ab == 1);
    CHECK(point_multiplicity(mixed, standard_condition(3), 4.0).np_ab == 2);
    const GammaProblem p2 = point_multiplicity(fixture("two_pi.json"), antidecoupled_condition(2), 0.25);
    CHECK(p2.np_0 == 0);
    CHECK(p2.np_ab == 2);
    CHECK(point_multiplicity(three, standard_condition(3), 2.0).np_ab == 0);
}

TEST_CASE("(D4) is required") {
    ComplexMatrix a(3, 3), b(3, 3);
    a << 1, -1, 0, 0, 0, 0, 0, 0, 1;
    b << 0, 0, 0, 1, 1, 0, 0, 0, 1;
    CHECK_THROWS_AS(point_multiplicity(fixture("three_pi.json"), validate(a, b), 1.0), Error);
}

TEST_CASE("closed forms and bounds over every class assignment") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> mdist(-3.0, 3.0);
    int instances = 0;
    for (int n = 2; n <= 4; ++n) {
        for (int r = 0; r <= n; ++r) {
            const InterfaceCondition ic = random_interface_condition(n, r, rng);
            if (!satisfies_d4(ic)) continue;
            int total = 1;
            for (int i = 0; i < n; ++i) total *= 4;
            for (int code = 0; code < total; ++code) {
                std::vector<EdgeClass> cls;
                std::vector<double> m;
                int c = code;
                for (int i = 0; i < n; ++i, c /= 4) {
                    cls.push_back(static_cast<EdgeClass>(c % 4));
                    m.push_back(mdist(rng));
                }
                const GammaProblem g = build_gamma(ic, classes_of(cls, m));
                CHECK_NOTHROW(check_point_theorems(g, r));
                ++instances;
            }
        }
    }
    CHECK(instances > 200);
}

TEST_CASE("table output") {
    std::ostringstream out;
    write_point_table(out, {point_multiplicity(fixture("three_pi.json"), standard_condition(3), 1.0)});
    CHECK(out.str() == "x,J_p,J_p*,J_m,Np_0,Np_AB,lemma5_case\n1,{1 2 3},{1 2 3},{},3,2,1\n");
}

}
