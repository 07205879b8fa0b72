#pragma once

#include <optional>

#include "selfsim/critical_points.hpp"

namespace selfsim {

// Local behavior a starter (or a shot endpoint) represents.
enum class LocalForm {
    Case1,       // f ~ c1^{1/(m-1)} xi^{2/(m-1)}, orbit out of P2
    Case2,       // f ~ k^{-1/(m-p)} xi^{(sigma+2)/(m-p)}, orbit out of P0
    Interface,   // f^{m-1} ~ beta(m-1)(eta^2 - xi^2)/(2m) near xi = eta
    Tail,        // f ~ (1/(p-1))^{1/(p-1)} xi^{-sigma/(p-1)}
    PositiveA,   // f(0) = a > 0, f'(0) = 0: f^{m-1} ~ a^{m-1} + alpha(m-1) xi^2/(2m)
    SignChange,  // f ~ [c (xi^{2m/(m-1)} - theta^{2m/(m-1)})]^{1/m} past a zero
};

const char* local_form_name(LocalForm f);

// =========================================================================
// Starter: a state displaced by delta from a critical point along the
// manifold the wanted orbit leaves (or enters) on, together with the local
// profile form valid around it.
// =========================================================================
struct Starter {
    CriticalPointInfo origin;
    std::optional<double> family_param;  // k for P0, eta for InterfaceLine
    double delta = 0.0;
    PhaseState state;
    LocalForm expected_form = LocalForm::Case1;
    double validity_lo = 0.0;  // xi window where local_profile applies
    double validity_hi = 0.0;
    double aux = 0.0;  // extra coefficient for PositiveA / SignChange forms
};

// Builds the starter for P2 (unstable eigendirection), P0 (center family,
// family_param = k > 0), InterfaceLine (stable eigendirection at eta > 0) or
// Pgamma (tail reference state, not meant for integration).
// Requires 0 < delta <= 1e-3.
Starter make_starter(const Params& prm, PointId id, std::optional<double> family_param,
                     double delta);

// Evaluates the starter's local asymptotic form at xi.  Throws OutOfValidity
// outside [validity_lo, validity_hi] unless extrapolate is set.
ProfileSample local_profile(const Params& prm, const Starter& st, double xi,
                            bool extrapolate = false);

// Largest relative defect of the two-scale consistency check: the starter at
// delta and at delta/2 must induce the same orbit, so integrating both over a
// short arc and comparing against each other bounds the truncation error.
double starter_consistency_defect(const Params& prm, const Starter& st);

}  // namespace selfsim
