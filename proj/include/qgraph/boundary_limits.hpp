#pragma once

// Boundary limits z = x + i*eps, eps -> 0, of ratios of imaginary parts of
// Weyl functions. These stand in for the Radon-Nikodym derivatives of the
// spectral measures, which cannot be represented directly.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qgraph/coupling.hpp"

namespace qgraph {

struct EpsSchedule {
    std::vector<double> eps_values{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    int stability_window = 3;

    /// Decades from 1e-2 down to `smallest` (inclusive).
    static EpsSchedule down_to(double smallest);
    void validate() const;
};

struct LimitOptions {
    /// Frobenius distance allowed between trailing iterates.
    double stability_tol = 1e-3;
    /// Relative rank threshold for limit matrices (their trace is 1).
    RankTolerance limit_rank{1e-4};
    /// Growth exponent of Im tr below this marks a singular point.
    double singular_exponent = -0.5;
    /// Above this the imaginary part decays: x is outside the spectrum.
    double decay_exponent = 0.5;
};

struct LimitSample {
    double x = 0.0;
    ComplexMatrix alpha;          // Im M0 / Im tr M0 at the smallest eps
    int alpha_rank = 0;
    bool stable = false;
    double growth_exponent = 0.0; // of Im tr M0(x + i eps)
    /// Largest |tr(ratio) - 1| over the schedule.
    double trace_defect = 0.0;
};

LimitSample estimate_alpha(const StarGraph& graph, double x, const EpsSchedule& sched = {},
                           const LimitOptions& opts = {});

struct Lemma9Prediction {
    ComplexMatrix h;      // r x r; empty when not formed
    ComplexMatrix limit;  // n x n, normal-form coordinates
    int rank = 0;
};

/// Predicted limit of Im M_w / Im tr M0 in normal-form coordinates.
/// Zero with rank 0 when alpha_rank equals r. Throws degenerate when
/// alpha_rank < r, and theorem_violation when H is singular.
Lemma9Prediction lemma9_predict(const NormalForm& nf, const LimitSample& sample,
                                const LimitOptions& opts = {});

struct NabEstimate {
    int nab = 0;
    bool in_spectrum = false;
    bool stable = false;
    double growth_exponent = 0.0;  // of Im tr M_w(x + i eps)
    ComplexMatrix ratio;           // Im M_w / Im tr M_w at the smallest eps
    ComplexMatrix ratio_to_m;      // Im M_w / Im tr M0 at the smallest eps
    LimitSample alpha;
    std::optional<Lemma9Prediction> prediction;
    /// Frobenius distance between the prediction and Im M_w' / Im tr M0 in normal-form coordinates.
    std::optional<double> prediction_error;
};

NabEstimate estimate_nab(const Coupling& coupling, double x, const EpsSchedule& sched = {},
                         const LimitOptions& opts = {});

enum class Regime { ac, n0_zero, n0_above_r, n0_equal_r, n0_below_r };

const char* to_string(Regime regime);

struct ProfilePoint {
    double x = 0.0;
    NabEstimate estimate;
    Regime regime = Regime::ac;
    /// The integer relation expected in this regime failed.
    bool violation = false;
};

struct MultiplicityProfile {
    int r = 0;
    std::vector<ProfilePoint> points;

    bool any_violation() const noexcept;
};

MultiplicityProfile scan(const Coupling& coupling, const std::vector<double>& grid,
                         const EpsSchedule& sched = {}, const LimitOptions& opts = {});

/// x, alpha_rank, nab, regime, stable, growth_exponent
void write_profile_csv(std::ostream& out, const MultiplicityProfile& profile);

}  // namespace qgraph
