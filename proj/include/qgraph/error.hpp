#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace qgraph {

enum class ErrorCode {
    io,                 // file missing, unreadable, or not parseable
    input,              // malformed or non-finite input
    d3_violation,       // AB* != BA* or rank(A,B) < n
    d4_violation,       // some rank(B) columns of B are dependent
    d5_violation,       // fewer non-artificial edges than rank(B)
    conditioning,       // numerically singular Gram matrix or block
    invertibility,      // A + B M0(z) or D(z) numerically singular
    pole,               // Weyl function evaluated at a Dirichlet eigenvalue
    solver,             // ODE or eigensolver failure
    randomization,      // randomized construction failed after all retries
    unsupported,        // input outside what the module models
    degenerate,         // boundary limit cannot be formed
    theorem_violation,  // a proven identity or bound failed numerically
    internal,           // cross-check between two computations disagreed
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message,
          double detail = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(message), code_(code), detail_(detail) {}

    ErrorCode code() const noexcept { return code_; }

    /// Residual norm, residue estimate, or condition number, depending on `code()`.
    double detail() const noexcept { return detail_; }

    std::optional<std::size_t> edge_index() const noexcept { return edge_; }
    Error& with_edge(std::size_t index) {
        edge_ = index;
        return *this;
    }

private:
    ErrorCode code_;
    double detail_;
    std::optional<std::size_t> edge_;
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::input: return "input";
    case ErrorCode::d3_violation: return "d3_violation";
    case ErrorCode::d4_violation: return "d4_violation";
    case ErrorCode::d5_violation: return "d5_violation";
    case ErrorCode::conditioning: return "conditioning";
    case ErrorCode::invertibility: return "invertibility";
    case ErrorCode::pole: return "pole";
    case ErrorCode::solver: return "solver";
    case ErrorCode::randomization: return "randomization";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::theorem_violation: return "theorem_violation";
    case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

}  // namespace qgraph
