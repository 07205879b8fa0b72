#pragma once

#include <stdexcept>
#include <string>

namespace selfsim {

// Parameter outside the admissible ranges (m, p, sigma or derived exponents).
struct DomainError : std::invalid_argument {
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Phase-space coordinate fed to a chart that does not admit it.
struct ChartError : std::invalid_argument {
    explicit ChartError(const std::string& what) : std::invalid_argument(what) {}
};

// Chart transition requested at a point where the map degenerates.
struct SingularMapError : std::runtime_error {
    explicit SingularMapError(const std::string& what) : std::runtime_error(what) {}
};

// Critical point id that carries no usable linearization.
struct UnsupportedPoint : std::invalid_argument {
    explicit UnsupportedPoint(const std::string& what) : std::invalid_argument(what) {}
};

// Family parameter (k, gamma, eta) outside its admissible range.
struct BadFamilyParam : std::invalid_argument {
    explicit BadFamilyParam(const std::string& what) : std::invalid_argument(what) {}
};

// Starter offset delta outside (0, 1e-3].
struct BadDelta : std::invalid_argument {
    explicit BadDelta(const std::string& what) : std::invalid_argument(what) {}
};

// Local asymptotic form evaluated outside its validity window.
struct OutOfValidity : std::runtime_error {
    explicit OutOfValidity(const std::string& what) : std::runtime_error(what) {}
};

// Bisection endpoints do not certify opposite classes.
struct BracketError : std::runtime_error {
    explicit BracketError(const std::string& what) : std::runtime_error(what) {}
};

// Requested event kind has no sign change on the recorded trace.
struct NoSuchEvent : std::runtime_error {
    explicit NoSuchEvent(const std::string& what) : std::runtime_error(what) {}
};

// Bisection narrowed to tolerance without certifying either good class.
struct AmbiguousLimit : std::runtime_error {
    explicit AmbiguousLimit(const std::string& what) : std::runtime_error(what) {}
};

// Parameter bisection midpoint resolves to neither side at tolerance.
struct CertificationFailure : std::runtime_error {
    explicit CertificationFailure(const std::string& what) : std::runtime_error(what) {}
};

// Planar connection check left its trapping region.
struct TrapViolation : std::runtime_error {
    explicit TrapViolation(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace selfsim
