#include "selfsim/phase.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace selfsim {

namespace {

double clamp0(double v) { return v > 0.0 ? v : 0.0; }

// Exponent of the reaction term in the Lower chart; lies in (1, 2] for
// 1 <= p < m, so x^e and its x-derivative both vanish at x = 0.
double reaction_exponent(const Params& prm) {
    return (prm.m + prm.p - 2.0) / (prm.m - 1.0);
}

}  // namespace

const char* chart_name(Chart c) {
    switch (c) {
        case Chart::Lower: return "lower";
        case Chart::Upper: return "upper";
        case Chart::BarZ: return "barz";
    }
    return "?";
}

double PhaseState::xi() const {
    return chart == Chart::Lower ? c[2] : std::exp(logxi);
}

FieldValue vector_field_raw(const Params& prm, Chart chart, const std::array<double, 3>& c) {
    const double m = prm.m;
    const double p = prm.p;
    const double al = prm.alpha;
    const double be = prm.beta;
    FieldValue out;
    switch (chart) {
        case Chart::Lower: {
            const double x = clamp0(c[0]), y = c[1], z = clamp0(c[2]);
            const double weight = prm.sigma_zero_mode ? 1.0 : std::pow(z, prm.sigma);
            out.f[0] = m * (m - 1.0) * x * y;
            out.f[1] = -m * y * y - be * y * z + al * x
                       - weight * std::pow(x, reaction_exponent(prm));
            out.f[2] = m * x;
            out.dlogxi = z > 0.0 ? m * x / z : 0.0;
            break;
        }
        case Chart::Upper: {
            const double X = clamp0(c[0]), Y = c[1], Z = clamp0(c[2]);
            out.f[0] = m * X * ((m - 1.0) * Y - 2.0 * X);
            out.f[1] = -m * Y * Y - be * Y + al * X - m * X * Y - X * Z;
            out.f[2] = m * Z * ((p - 1.0) * Y + prm.sigma * X);
            out.dlogxi = m * X;
            break;
        }
        case Chart::BarZ: {
            const double X = clamp0(c[0]), Y = c[1], Zb = clamp0(c[2]);
            out.f[0] = m * X * ((m - 1.0) * Y - 2.0 * X);
            out.f[1] = -m * Y * Y - be * Y + al * X - m * X * Y - Zb;
            out.f[2] = m * Zb * ((m + p - 2.0) * Y + (prm.sigma - 2.0) * X);
            out.dlogxi = m * X;
            break;
        }
    }
    return out;
}

FieldValue vector_field(const Params& prm, const PhaseState& s) {
    const bool first_neg = s.c[0] < 0.0;
    const bool third_neg = s.c[2] < 0.0;
    if (first_neg || third_neg)
        throw ChartError(std::string("negative coordinate in chart ") + chart_name(s.chart));
    return vector_field_raw(prm, s.chart, s.c);
}

Mat3 field_jacobian(const Params& prm, Chart chart, const std::array<double, 3>& c) {
    const double m = prm.m;
    const double p = prm.p;
    const double al = prm.alpha;
    const double be = prm.beta;
    Mat3 J{};
    switch (chart) {
        case Chart::Lower: {
            const double x = clamp0(c[0]), y = c[1], z = clamp0(c[2]);
            const double e = reaction_exponent(prm);
            const double weight = prm.sigma_zero_mode ? 1.0 : std::pow(z, prm.sigma);
            const double dweight =
                prm.sigma_zero_mode ? 0.0 : prm.sigma * std::pow(z, prm.sigma - 1.0);
            J[0] = {m * (m - 1.0) * y, m * (m - 1.0) * x, 0.0};
            J[1] = {al - weight * e * std::pow(x, e - 1.0),
                    -2.0 * m * y - be * z,
                    -be * y - dweight * std::pow(x, e)};
            J[2] = {m, 0.0, 0.0};
            break;
        }
        case Chart::Upper: {
            const double X = c[0], Y = c[1], Z = c[2];
            J[0] = {m * (m - 1.0) * Y - 4.0 * m * X, m * (m - 1.0) * X, 0.0};
            J[1] = {al - m * Y - Z, -2.0 * m * Y - be - m * X, -X};
            J[2] = {m * prm.sigma * Z, m * (p - 1.0) * Z, m * ((p - 1.0) * Y + prm.sigma * X)};
            break;
        }
        case Chart::BarZ: {
            const double X = c[0], Y = c[1], Zb = c[2];
            J[0] = {m * (m - 1.0) * Y - 4.0 * m * X, m * (m - 1.0) * X, 0.0};
            J[1] = {al - m * Y, -2.0 * m * Y - be - m * X, -1.0};
            J[2] = {m * (prm.sigma - 2.0) * Zb, m * (m + p - 2.0) * Zb,
                    m * ((m + p - 2.0) * Y + (prm.sigma - 2.0) * X)};
            break;
        }
    }
    return J;
}

// =========================================================================
// Chart transitions.  All three charts determine (xi, f, f') on their
// interior, so the transitions are closed-form; logxi is recomputed from the
// target coordinates rather than copied.
// =========================================================================

namespace {

struct XiF {
    double xi, x, y;  // xi, f^{m-1}, f^{m-2} f'
};

// Common interior representation (xi, f^{m-1}, f^{m-2} f') of a state.
XiF unpack(const Params& prm, const PhaseState& s) {
    const double r = (prm.p - 1.0) / (prm.m - 1.0);
    switch (s.chart) {
        case Chart::Lower: {
            if (!(s.c[0] > 0.0) || !(s.c[2] > 0.0))
                throw SingularMapError("lower-chart map needs x > 0 and z > 0");
            return {s.c[2], s.c[0], s.c[1]};
        }
        case Chart::Upper: {
            if (!(s.c[0] > 0.0) || !(s.c[2] > 0.0))
                throw SingularMapError("upper-chart map needs X > 0 and Z > 0");
            // Z = X^r xi^{sigma + 2r}  =>  xi from (X, Z).
            const double xi = std::pow(s.c[2] / std::pow(s.c[0], r), 1.0 / (prm.sigma + 2.0 * r));
            return {xi, s.c[0] * xi * xi, s.c[1] * xi};
        }
        case Chart::BarZ: {
            if (!(s.c[0] > 0.0) || !(s.c[2] > 0.0))
                throw SingularMapError("barz-chart map needs X > 0 and Zb > 0");
            const double e = 1.0 + r;  // Zb = X^e xi^{sigma + 2r}
            const double xi = std::pow(s.c[2] / std::pow(s.c[0], e), 1.0 / (prm.sigma + 2.0 * r));
            return {xi, s.c[0] * xi * xi, s.c[1] * xi};
        }
    }
    throw SingularMapError("unknown chart");
}

}  // namespace

PhaseState chart_map(const Params& prm, const PhaseState& s, Chart target) {
    const XiF v = unpack(prm, s);
    const double r = (prm.p - 1.0) / (prm.m - 1.0);
    PhaseState out;
    out.chart = target;
    out.logxi = std::log(v.xi);
    switch (target) {
        case Chart::Lower:
            out.c = {v.x, v.y, v.xi};
            break;
        case Chart::Upper:
            out.c = {v.x / (v.xi * v.xi), v.y / v.xi,
                     std::pow(v.x, r) * std::pow(v.xi, prm.sigma)};
            break;
        case Chart::BarZ:
            out.c = {v.x / (v.xi * v.xi), v.y / v.xi,
                     std::pow(v.x, 1.0 + r) * std::pow(v.xi, prm.sigma - 2.0)};
            break;
    }
    return out;
}

ProfileSample to_profile(const Params& prm, const PhaseState& s) {
    const double m = prm.m;
    double xi, x, y;
    if (s.chart == Chart::Lower) {
        xi = s.c[2];
        x = s.c[0];
        y = s.c[1];
    } else {
        xi = std::exp(s.logxi);
        x = s.c[0] * xi * xi;
        y = s.c[1] * xi;
    }
    if (!(x > 0.0)) throw SingularMapError("to_profile needs a positive f-coordinate");
    ProfileSample out;
    out.xi = xi;
    out.f = std::pow(x, 1.0 / (m - 1.0));
    out.df = y * std::pow(x, (2.0 - m) / (m - 1.0));
    out.fm_prime = m * y * out.f;  // m f^{m-1} f' = m y f
    return out;
}

}  // namespace selfsim
