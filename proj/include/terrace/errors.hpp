#pragma once

#include <stdexcept>
#include <string>

namespace terrace {

// Base class for all failures raised by the laboratory.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A parameter quadruple left the monostable regime (d>0, r>0, 0<a<1, b>1).
struct OutOfRegime : Error {
    std::string field;
    OutOfRegime(std::string f, const std::string& detail)
        : Error("out of regime: " + f + " (" + detail + ")"), field(std::move(f)) {}
};

// An argument fell outside the domain of a closed-form function.
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error("domain error: " + what) {}
};

// Two states live on different grids or at different times.
struct GridMismatch : Error {
    explicit GridMismatch(const std::string& what) : Error("grid mismatch: " + what) {}
};

// A classification landed on a boundary equality that the theory treats strictly.
struct BoundaryCase : Error {
    explicit BoundaryCase(const std::string& what) : Error("boundary case: " + what) {}
};

// The requested perturbation size violates one of the construction's conditions.
struct DeltaTooLarge : Error {
    explicit DeltaTooLarge(const std::string& what) : Error("delta too large: " + what) {}
};

struct CflViolation : Error {
    explicit CflViolation(const std::string& what) : Error("CFL violation: " + what) {}
};

// A tracked front came too close to the truncated boundary.
struct DomainEscape : Error {
    explicit DomainEscape(const std::string& what) : Error("domain escape: " + what) {}
};

struct TooFewSamples : Error {
    explicit TooFewSamples(const std::string& what) : Error("too few samples: " + what) {}
};

struct SupportOutsideGrid : Error {
    explicit SupportOutsideGrid(const std::string& what)
        : Error("support outside grid: " + what) {}
};

struct NotAdmissible : Error {
    explicit NotAdmissible(const std::string& what) : Error("not admissible: " + what) {}
};

struct NoConvergence : Error {
    double last_residual;
    NoConvergence(const std::string& what, double res)
        : Error("no convergence: " + what + " (residual " + std::to_string(res) + ")"),
          last_residual(res) {}
};

struct SubcriticalSpeed : Error {
    explicit SubcriticalSpeed(const std::string& what) : Error("subcritical speed: " + what) {}
};

struct BandTooNarrow : Error {
    explicit BandTooNarrow(const std::string& what) : Error("band too narrow: " + what) {}
};

// No sign change inside the bracket a lemma promises for an interface root.
struct NoBracket : Error {
    explicit NoBracket(const std::string& what) : Error("no bracket: " + what) {}
};

struct HypothesisViolated : Error {
    std::string condition;
    explicit HypothesisViolated(std::string cond)
        : Error("hypothesis violated: " + cond), condition(std::move(cond)) {}
};

struct CertificationFailed : Error {
    explicit CertificationFailed(const std::string& what)
        : Error("certification failed: " + what) {}
};

struct EmptyWedge : Error {
    explicit EmptyWedge(const std::string& what) : Error("empty wedge: " + what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("config error: " + what) {}
};

}  // namespace terrace
