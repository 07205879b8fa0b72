#include "selfsim/params.hpp"

#include <cmath>
#include <string>

namespace selfsim {

double Params::min_max_location() const {
    // alpha^beta * (2m/(m-1))^{(p-1) beta/(m-p)}; sigma-uniform lower bound
    // for the position of any local maximum of a good profile.
    const double e2 = (p - 1.0) * beta / (m - p);
    return std::pow(alpha, beta) * std::pow(2.0 * m / (m - 1.0), e2);
}

Params derive_exponents(double m, double p, double sigma, Allow allow) {
    if (!(std::isfinite(m) && std::isfinite(p) && std::isfinite(sigma)))
        throw DomainError("parameters must be finite");
    if (!(m > 1.0)) throw DomainError("m must exceed 1, got " + std::to_string(m));

    const bool p_one = (p == 1.0) && allows(allow, Allow::p_one);
    if (!p_one && !(p > 1.0))
        throw DomainError("p must exceed 1 (p = 1 only in the exact-solution mode)");
    if (!(p < m)) throw DomainError("p must be below m, got p = " + std::to_string(p));

    const bool sigma_zero = (sigma == 0.0) && allows(allow, Allow::sigma_zero);
    if (!sigma_zero && !(sigma > 0.0))
        throw DomainError("sigma must be positive (sigma = 0 only in the homogeneous mode)");
    if (p_one && sigma_zero)
        throw DomainError("p = 1 with sigma = 0 leaves the exponents undefined");

    const double denom = 2.0 * (p - 1.0) + sigma * (m - 1.0);
    // denom > 0 whenever p >= 1 and sigma >= 0 excluding p = 1 & sigma = 0.
    Params prm;
    prm.m = m;
    prm.p = p;
    prm.sigma = sigma;
    prm.alpha = (sigma + 2.0) / denom;
    prm.beta = (m - p) / denom;
    prm.p_one_mode = p_one;
    prm.sigma_zero_mode = sigma_zero;
    return prm;
}

double ode_residual(const Params& prm, const ProfileSample& s, double d2fm) {
    if (!(s.f >= 0.0)) throw DomainError("ode_residual needs f >= 0");
    if (!(s.xi >= 0.0)) throw DomainError("ode_residual needs xi >= 0");
    const double weight = prm.sigma_zero_mode ? 1.0 : std::pow(s.xi, prm.sigma);
    return d2fm - prm.alpha * s.f + prm.beta * s.xi * s.df + weight * std::pow(s.f, prm.p);
}

// =========================================================================
// Exact compactly supported solution at p = 1, sigma = sqrt(2(m+1)).
// =========================================================================

ExactSolution ExactSolution::make(double m) {
    if (!(m > 1.0)) throw DomainError("ExactSolution needs m > 1");
    ExactSolution s;
    s.m = m;
    s.sigma = std::sqrt(2.0 * (m + 1.0));
    s.a_coeff = (m - 1.0) / (2.0 * m * (m + 1.0));
    s.b_coeff = (m - 1.0) * (m - 1.0) / (m * (s.sigma + 2.0) * (m * s.sigma + m + 1.0));
    s.xi0 = std::pow(s.a_coeff / s.b_coeff, 1.0 / s.sigma);
    return s;
}

Params ExactSolution::params() const {
    return derive_exponents(m, 1.0, sigma, Allow::p_one);
}

ProfileSample ExactSolution::sample(double xi) const {
    if (!(xi >= 0.0)) throw DomainError("ExactSolution sample needs xi >= 0");
    ProfileSample out;
    out.xi = xi;
    const double g = a_coeff - b_coeff * std::pow(xi, sigma);
    if (g <= 0.0 || xi == 0.0) return out;  // beyond the interface or at the tip

    const double q = 1.0 / (m - 1.0);
    const double xq = std::pow(xi, 2.0 * q);
    const double dg = -sigma * b_coeff * std::pow(xi, sigma - 1.0);
    out.f = xq * std::pow(g, q);
    out.df = 2.0 * q * out.f / xi + xq * q * std::pow(g, q - 1.0) * dg;
    out.fm_prime = m * std::pow(out.f, m - 1.0) * out.df;
    return out;
}

double ExactSolution::fm_second(double xi) const {
    const double g = a_coeff - b_coeff * std::pow(xi, sigma);
    if (!(xi > 0.0) || g <= 0.0)
        throw OutOfValidity("fm_second needs a point inside the support");

    // f^m = xi^{2m/(m-1)} g^{m/(m-1)}; differentiate the product twice.
    const double q = m / (m - 1.0);
    const double e = 2.0 * q;
    const double xe = std::pow(xi, e);
    const double dg = -sigma * b_coeff * std::pow(xi, sigma - 1.0);
    const double d2g = -sigma * (sigma - 1.0) * b_coeff * std::pow(xi, sigma - 2.0);
    const double gq = std::pow(g, q);
    const double gq1 = std::pow(g, q - 1.0);
    const double gq2 = std::pow(g, q - 2.0);
    return e * (e - 1.0) * std::pow(xi, e - 2.0) * gq
         + 2.0 * e * std::pow(xi, e - 1.0) * q * gq1 * dg
         + xe * q * ((q - 1.0) * gq2 * dg * dg + gq1 * d2g);
}

}  // namespace selfsim
