#pragma once

#include <cstdint>

#include "selfsim/errors.hpp"

namespace selfsim {

// One point of a radial profile f(xi) together with the derivative data the
// pipelines need.  fm_prime is (f^m)'(xi), which stays finite at interfaces
// where df itself blows up.
struct ProfileSample {
    double xi = 0.0;
    double f = 0.0;
    double df = 0.0;
    double fm_prime = 0.0;
};

// Relaxations of the admissible parameter box used by the validation suites.
enum class Allow : std::uint8_t {
    none = 0,
    p_one = 1,        // p = 1 (exact-solution suite)
    sigma_zero = 2,   // sigma = 0 (spatially homogeneous suite)
    both = 3,
};

constexpr bool allows(Allow a, Allow bit) {
    return (static_cast<std::uint8_t>(a) & static_cast<std::uint8_t>(bit)) != 0;
}

// =========================================================================
// Parameter pack: (m, p, sigma) plus the self-similar exponents they induce.
// Invariants: m > 1, 1 <= p < m (p = 1 only in p_one mode), sigma >= 0
// (sigma = 0 only in sigma_zero mode), alpha, beta > 0 and
// alpha * (m - p) == beta * (sigma + 2).
// =========================================================================
struct Params {
    double m = 0.0;
    double p = 0.0;
    double sigma = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    bool p_one_mode = false;
    bool sigma_zero_mode = false;

    // Coordinates of the finite critical points in the rescaled chart.
    double x_p2() const { return (m - 1.0) / (2.0 * m * (m + 1.0)); }
    double y_p2() const { return 1.0 / (m * (m + 1.0)); }
    double y_p1() const { return -beta / m; }

    // Attracting end state of the constant-in-space tail, f -> gamma0^{1/(p-1)}
    // only exists for p > 1.
    double gamma0() const {
        if (p <= 1.0) throw DomainError("gamma0 undefined for p = 1");
        return 1.0 / (p - 1.0);
    }

    // Lower barrier level for Y used by the non-reentry monitor.
    double y0_barrier() const {
        return (m - 1.0) * (sigma + 2.0) / (2.0 * m * (sigma * (m - 1.0) + 2.0 * (p - 1.0)));
    }

    // f = case1_coeff()^{1/(m-1)} xi^{2/(m-1)} leading behavior at the origin.
    double case1_coeff() const { return x_p2(); }
    double case1_exponent() const { return 2.0 / (m - 1.0); }
    // f ~ k xi^{case2_exponent()} family at the origin; equals alpha/beta.
    double case2_exponent() const { return (sigma + 2.0) / (m - p); }

    // Global pointwise bound: f^{m-1} <= grow_bound() * xi^2 for profiles
    // vanishing at the origin.
    double grow_bound() const { return alpha * (m - 1.0) / (2.0 * m); }

    // Smallest location a local maximum of a good profile can occupy.
    double min_max_location() const;
};

// Derives (alpha, beta) from (m, p, sigma) and validates the box.
Params derive_exponents(double m, double p, double sigma, Allow allow = Allow::none);

// Residual of the profile ODE at one sample, given (f^m)'' at that point.
double ode_residual(const Params& prm, const ProfileSample& s, double d2fm);

// =========================================================================
// Closed-form compactly supported profile available at p = 1 for the single
// weight exponent sigma = sqrt(2(m+1)):
//   f(xi) = xi^{2/(m-1)} * ( a - b xi^sigma )_+^{1/(m-1)},
// with a = (m-1)/(2m(m+1)) and b = (m-1)^2 / (m (sigma+2)(m sigma + m + 1)).
// Used as the end-to-end oracle for charts, starters and backward shooting.
// =========================================================================
struct ExactSolution {
    double m = 0.0;
    double sigma = 0.0;
    double a_coeff = 0.0;
    double b_coeff = 0.0;
    double xi0 = 0.0;   // interface location

    static ExactSolution make(double m);

    Params params() const;
    ProfileSample sample(double xi) const;
    // Analytic (f^m)''(xi) on the support interior; pairs with ode_residual.
    double fm_second(double xi) const;
};

}  // namespace selfsim
