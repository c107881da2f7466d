// Acceptance runner: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>

#include <fmt/format.h>

#include "oracles.hpp"
#include "qgraph/boundary_limits.hpp"
#include "qgraph/discrete_oracle.hpp"
#include "qgraph/point_spectrum.hpp"
#include "test_support.hpp"

using namespace qgraph;

namespace {

// Collects failures with a short reason; the first few are printed.
struct Tally {
    int checks = 0;
    int failures = 0;
    std::string first;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (ok) return;
        if (failures == 0) first = what;
        ++failures;
    }
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<void(Tally&)> body;
};

// Clusters in [lo, hi] must be exactly `expected` (center -> multiplicity), each within tol.
void expect_clusters(Tally& t, const SpectrumReport& rep, const std::map<double, int>& expected, double tol) {
    t.expect(rep.clusters.size() == expected.size(),
             fmt::format("{} clusters in [{}, {}], expected {}", rep.clusters.size(), rep.window_lo, rep.window_hi,
                         expected.size()));
    for (const auto& [x, mult] : expected) {
        const Cluster* hit = nullptr;
        for (const auto& c : rep.clusters) {
            if (std::abs(c.center - x) <= tol) hit = &c;
        }
        t.expect(hit != nullptr, fmt::format("no cluster near {}", x));
        if (hit) {
            t.expect(hit->multiplicity == mult,
                     fmt::format("cluster at {:.6f} has multiplicity {}, expected {}", hit->center, hit->multiplicity,
                                 mult));
        }
    }
}

GridSpec oracle_grid() {
    GridSpec g;
    g.points_per_edge = 2000;
    return g;
}

void completion(Tally& t) {
    std::mt19937_64 rng(1001);
    for (int i = 0; i < 500; ++i) {
        const int n = 1 + i % 8;
        const int r = static_cast<int>(rng() % static_cast<std::uint64_t>(n + 1));
        const JUnitaryCompletion w = complete_j_unitary(random_interface_condition(n, r, rng));
        t.expect(w.residual_star_left() <= 1e-10, fmt::format("instance {}: |w*Jw - J| = {:.3e}", i,
                                                              w.residual_star_left()));
    }
}

void d4_equivalences(Tally& t) {
    std::mt19937_64 rng(1002);
    auto compare = [&](const ComplexMatrix& b, int r, bool planted, int i) {
        const bool c1 = d4_by_columns(b, r);
        const bool c2 = d4_by_coordinate_planes(b, r);
        const bool c3 = d4_by_projection_ranks(b, r);
        const bool det = oracle::d4_by_determinants(b, r);
        t.expect(c1 == c2 && c2 == c3 && c3 == det, fmt::format("D4 routes disagree on instance {}", i));
        if (planted) t.expect(!c1, fmt::format("planted D4 failure {} not detected", i));
    };
    auto compare_minors = [&](const ComplexMatrix& b1, bool planted, int i) {
        const MinorCriteria m = minor_criteria(b1);
        t.expect(m.agree(), fmt::format("minor criteria disagree on instance {}", i));
        if (planted) t.expect(!m.b1_minors, fmt::format("planted vanishing minor {} not detected", i));
    };
    for (int i = 0; i < 500; ++i) {
        const int n = 2 + i % 7;
        const int r = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
        if (i % 2 == 0) {
            compare(complex_gaussian(n, r, rng) * complex_gaussian(r, n, rng), r, false, i);
        } else {
            compare_minors(complex_gaussian(r, n - r, rng), false, i);
        }
    }
    for (int i = 0; i < 50; ++i) {
        const int n = 3 + i % 6;
        const int r = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 2));
        if (i % 2 == 0) {
            ComplexMatrix b = complex_gaussian(n, r, rng) * complex_gaussian(r, n, rng);
            // Two columns become parallel; r >= 2 needed for that to break (D4), else a zero column.
            if (r >= 2) {
                b.col(n - 1) = Complex(0.3, 1.1) * b.col(0);
            } else {
                b.col(n - 1).setZero();
            }
            compare(b, r, true, 500 + i);
        } else {
            ComplexMatrix b1 = complex_gaussian(r, n - r, rng);
            if (r >= 2 && n - r >= 2) {
                // Vanishing 2x2 minor on rows/columns {0, 1}.
                b1(1, 1) = b1(0, 1) * b1(1, 0) / b1(0, 0);
            } else {
                b1(0, 0) = 0.0;
            }
            compare_minors(b1, true, 500 + i);
        }
    }
}

void schur_rank(Tally& t) {
    std::mt19937_64 rng(1003);
    std::uniform_real_distribution<double> weight(0.1, 2.0);
    const RankTolerance tol(1e-8);
    int done = 0;
    while (done < 1000) {
        const int n = 2 + done % 7;
        const int r = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
        const ComplexMatrix b1 = complex_gaussian(r, n - r, rng);
        if (!all_minors_nonzero(b1)) continue;
        ComplexMatrix x1 = ComplexMatrix::Zero(n - r, n - r);
        ComplexMatrix x2 = ComplexMatrix::Zero(r, r);
        int rank1 = 0, rank2 = 0;
        for (int i = 0; i < n - r; ++i) {
            if (rng() % 3 != 0) x1(i, i) = weight(rng), ++rank1;
        }
        for (int i = 0; i < r; ++i) {
            if (rng() % 3 != 0) x2(i, i) = weight(rng), ++rank2;
        }
        if (rank1 + rank2 < r) continue;

        const ComplexMatrix s = b1 * x1 * b1.adjoint() + x2;
        t.expect(oracle::lu_rank(s, 1e-10) == r, fmt::format("instance {}: B1 X1 B1* + X2 singular", done));
        const ComplexMatrix schur = x1 - x1 * b1.adjoint() * s.partialPivLu().solve(b1 * x1);
        const double scale = std::max(x1.norm(), 1.0);
        const int expected = rank1 + rank2 - r;
        t.expect(static_cast<int>(rank_tol(schur, tol, scale)) == expected,
                 fmt::format("instance {}: rank {} != {}", done, rank_tol(schur, tol, scale), expected));

        // Same identity through the library's limit formula (alpha = diag(X1, X2)).
        if (rank1 + rank2 > r) {
            LimitSample sample;
            sample.alpha = ComplexMatrix::Zero(n, n);
            sample.alpha.topLeftCorner(n - r, n - r) = x1;
            sample.alpha.bottomRightCorner(r, r) = x2;
            sample.alpha /= sample.alpha.trace().real();
            sample.alpha_rank = rank1 + rank2;
            LimitOptions opts;
            opts.limit_rank = tol;
            const Lemma9Prediction p =
                lemma9_predict(normal_form_from_blocks(-b1.adjoint(), ComplexMatrix::Zero(r, r)), sample, opts);
            t.expect(p.rank == expected, fmt::format("instance {}: predicted rank {} != {}", done, p.rank, expected));
        }
        ++done;
    }
}

void normal_form(Tally& t) {
    std::mt19937_64 rng(1004);
    int done = 0;
    while (done < 200) {
        const int n = 1 + done % 8;
        const int r = static_cast<int>(rng() % static_cast<std::uint64_t>(n + 1));
        const InterfaceCondition ic = random_interface_condition(n, r, rng);
        if (!satisfies_d4(ic)) continue;
        const NormalForm nf = to_normal_form(ic);
        const ComplexMatrix theta = oracle::lu_plane(ic.a(), ic.b());
        const ComplexMatrix theta_nf = oracle::lu_plane(nf.assembled_a(), nf.assembled_b());
        t.expect(subspace_equal(theta, oracle::block_diag(nf.p) * theta_nf, RankTolerance(1e-9)),
                 fmt::format("instance {} (n = {}, r = {}): planes differ", done, n, r));
        t.expect(hermitian_defect(nf.a2) <= 1e-9, fmt::format("instance {}: A2 not Hermitian", done));
        ++done;
    }
}

void reduction(Tally& t) {
    for (int n = 3; n <= 6; ++n) {
        const InterfaceCondition ic = antidecoupled_condition(n);
        for (int k = 1; k <= n; ++k) {
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                const InterfaceCondition red = reduce_rank(ic, k, seed);
                const InterfaceCondition again = validate(red.a(), red.b());
                const std::string tag = fmt::format("n = {}, k = {}, seed {}", n, k, seed);
                t.expect(again.r() == k, tag + ": rank B_k != k");
                t.expect(satisfies_d4(red), tag + ": (D4) fails");
                t.expect(coupling_codim(ic, red) == n - k, tag + ": codim != n - k");
            }
        }
    }
}

void three_pi_points(Tally& t) {
    const StarGraph g = fixture("three_pi.json");
    const InterfaceCondition st = standard_condition(3);
    for (double x : {1.0, 4.0, 9.0}) {
        const GammaProblem p = point_multiplicity(g, st, x);
        t.expect(p.np_ab == 2, fmt::format("Np_AB({}) = {}", x, p.np_ab));
    }
    // Besides k^2 (double), cot(k pi) = 0 gives simple eigenvalues (k + 1/2)^2.
    const SpectrumReport rep = eig_clusters(assemble(g, st, oracle_grid()), 0.5, 9.5, 2e-3);
    expect_clusters(t, rep, {{1.0, 2}, {2.25, 1}, {4.0, 2}, {6.25, 1}, {9.0, 2}}, 2e-3);
}

void asymmetric_points(Tally& t) {
    const StarGraph g = fixture("pi_pi_halfpi.json");
    const InterfaceCondition st = standard_condition(3);
    const GammaProblem p1 = point_multiplicity(g, st, 1.0);
    const GammaProblem p4 = point_multiplicity(g, st, 4.0);
    t.expect(p1.np_ab == 1, fmt::format("Np_AB(1) = {}", p1.np_ab));
    t.expect(p4.np_ab == 2, fmt::format("Np_AB(4) = {}", p4.np_ab));
    // Other eigenvalues: 2 cot(k pi) + cot(k pi / 2) = 0, i.e. cot(k pi / 2) = +-1/sqrt 2.
    const double k = 2.0 / M_PI * (M_PI - std::atan(std::sqrt(2.0)));
    const SpectrumReport rep = eig_clusters(assemble(g, st, oracle_grid()), 0.5, 4.5, 2e-3);
    expect_clusters(t, rep, {{1.0, 1}, {k * k, 1}, {4.0, 2}}, 2e-3);
}

void neumann_points(Tally& t) {
    const StarGraph g = fixture("two_pi.json");
    const InterfaceCondition ic = antidecoupled_condition(2);
    const GammaProblem p = point_multiplicity(g, ic, 0.25);
    t.expect(p.np_0 == 0, fmt::format("Np_0(0.25) = {}", p.np_0));
    t.expect(p.np_ab == 2, fmt::format("Np_AB(0.25) = {}", p.np_ab));
    t.expect(point_multiplicity(g, ic, 1.0).np_ab == 0, "Np_AB(1) != 0");
    const SpectrumReport rep = eig_clusters(assemble(g, ic, oracle_grid()), 0.1, 2.4, 2e-3);
    expect_clusters(t, rep, {{0.25, 2}, {2.25, 2}}, 2e-3);
}

void boundary_multiplicity(Tally& t) {
    const NabEstimate e =
        estimate_nab(Coupling(fixture("three_pi.json"), standard_condition(3)), 1.0, EpsSchedule::down_to(1e-6));
    t.expect(e.nab == 2, fmt::format("nab = {}", e.nab));
    t.expect(e.prediction_error.has_value(), "no prediction");
    if (e.prediction_error) {
        t.expect(*e.prediction_error <= 1e-4, fmt::format("prediction error {:.3e}", *e.prediction_error));
    }
    const MultiplicityProfile p = scan(Coupling(fixture("three_pi.json"), standard_condition(3)), {1.0, 2.25, 4.0, 9.0});
    t.expect(!p.any_violation(), "scan flags a regime violation");
}

void vanishing(Tally& t) {
    const StarGraph g = fixture("two_pi.json");
    const EpsSchedule sched = EpsSchedule::down_to(1e-6);
    const LimitSample a = estimate_alpha(g, 1.0, sched);
    t.expect(a.alpha_rank == 2, fmt::format("alpha_rank = {}", a.alpha_rank));
    const NabEstimate e = estimate_nab(Coupling(g, antidecoupled_condition(2)), 1.0, sched);
    const double norm = e.ratio_to_m.norm();
    t.expect(norm < 1e-3, fmt::format("|Im M_w / Im tr M0| = {:.3e}", norm));
    t.expect(e.nab == 0, fmt::format("nab = {}", e.nab));
    const MultiplicityProfile p = scan(Coupling(g, antidecoupled_condition(2)), {0.25, 1.0, 4.0});
    t.expect(!p.any_violation(), "scan flags a regime violation");
}

void ac_preservation(Tally& t) {
    const StarGraph g = fixture("two_half_lines.json");
    std::mt19937_64 rng(1011);
    for (int i = 0; i < 20; ++i) {
        const Coupling c(g, random_interface_condition(2, i % 3, rng));
        for (double x : {0.5, 1.0, 2.0, 5.0}) {
            const CoupledSample s = c.eval(Complex(x, 1e-4));
            const auto rank = rank_tol(s.im_mw);
            t.expect(rank == 2, fmt::format("condition {}, x = {}: rank Im M_w = {}", i, x, rank));
        }
    }
}

void resolvent_bound(Tally& t) {
    const StarGraph g = fixture("three_pi.json");
    GridSpec grid;
    grid.points_per_edge = 120;
    const Complex z(0.0, 1.0);
    std::mt19937_64 rng(1012);
    for (int i = 0; i < 50; ++i) {
        const InterfaceCondition ic1 = random_interface_condition(3, static_cast<int>(rng() % 4), rng);
        const InterfaceCondition ic2 = random_interface_condition(3, static_cast<int>(rng() % 4), rng);
        const int codim = coupling_codim(ic1, ic2);
        const int rank = resolvent_rank_diff(g, ic1, ic2, z, grid);
        t.expect(rank <= codim, fmt::format("pair {}: rank {} > codim {}", i, rank, codim));
    }
    const int codim = coupling_codim(standard_condition(3), decoupled_condition(3));
    const int rank = resolvent_rank_diff(g, standard_condition(3), decoupled_condition(3), z, grid);
    t.expect(rank == codim && codim == 1, fmt::format("standard vs decoupled: rank {}, codim {}", rank, codim));
}

void synthetic_exhaustion(Tally& t) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        std::mt19937_64 rng(2000 + seed);
        std::uniform_real_distribution<double> mdist(-3.0, 3.0);
        for (int n = 1; n <= 5; ++n) {
            for (int r = 0; r <= n; ++r) {
                InterfaceCondition ic = random_interface_condition(n, r, rng);
                while (!satisfies_d4(ic)) ic = random_interface_condition(n, r, rng);
                int total = 1;
                for (int i = 0; i < n; ++i) total *= 4;
                for (int code = 0; code < total; ++code) {
                    std::vector<EdgeClassification> classes;
                    int c = code;
                    for (int i = 0; i < n; ++i, c /= 4) {
                        EdgeClassification e;
                        e.edge_index = i;
                        e.cls = static_cast<EdgeClass>(c % 4);
                        // Seed 2 plants zeros of m so that (1, 0) boundary data occur.
                        e.m_value = (seed == 2 && rng() % 2 == 0) ? 0.0 : mdist(rng);
                        classes.push_back(e);
                    }
                    const std::string tag = fmt::format("seed {}, n = {}, r = {}, code {}", seed, n, r, code);
                    try {
                        const GammaProblem g = build_gamma(ic, classes);
                        check_point_theorems(g, r);
                        const int ker = n - oracle::lu_rank(g.gamma, 1e-9 * std::max(1.0, g.gamma.norm()));
                        t.expect(ker == g.ker_gamma_dim, tag + ": dim ker gamma differs from LU");
                    } catch (const Error& e) {
                        t.expect(false, tag + ": " + e.what());
                    }
                }
            }
        }
    }
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "J-unitary completion", 5, completion},
        {2, "(D4) and minor criteria agree", 10, d4_equivalences},
        {3, "Schur-complement rank identity", 10, schur_rank},
        {4, "normal form reassembles the plane", 5, normal_form},
        {5, "rank reduction", 30, reduction},
        {6, "point spectrum, three equal edges", 120, three_pi_points},
        {7, "point spectrum, unequal edges", 120, asymmetric_points},
        {8, "point spectrum, Neumann pair", 60, neumann_points},
        {9, "boundary-limit multiplicity", 30, boundary_multiplicity},
        {10, "vanishing regime", 30, vanishing},
        {11, "ac preservation", 30, ac_preservation},
        {12, "resolvent rank bound", 180, resolvent_bound},
        {13, "synthetic exhaustion", 60, synthetic_exhaustion},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Tally t;
        const auto start = std::chrono::steady_clock::now();
        try {
            c.body(t);
        } catch (const std::exception& e) {
            t.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool slow = secs > c.budget_s;
        const bool ok = t.failures == 0 && !slow;
        if (!ok) ++failed;
        std::string line = fmt::format("{} {:2d} {:<38} {:7.2f}s (budget {:g}s) {} checks", ok ? "PASS" : "FAIL", c.id,
                                       c.name, secs, c.budget_s, t.checks);
        if (t.failures > 0) line += fmt::format(", {} failed; first: {}", t.failures, t.first);
        if (slow) line += ", over budget";
        std::puts(line.c_str());
        std::fflush(stdout);
    }
    std::puts(failed == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failed).c_str());
    return failed == 0 ? 0 : 1;
}
