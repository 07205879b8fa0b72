#pragma once

#include <array>

#include "selfsim/params.hpp"

namespace selfsim {

// =========================================================================
// Three overlapping charts for the profile ODE as a quadratic 3D flow.
//
//   Lower:  (x, y, z)   = (f^{m-1}, f^{m-2} f', xi)            near interfaces
//   Upper:  (X, Y, Z)   = (xi^-2 f^{m-1}, xi^-1 f^{m-2} f', xi^sigma f^{p-1})
//   BarZ:   (X, Y, Zb)  = (X, Y, X*Z)                          sigma < 2 origin
//
// Each chart runs on its own orbit time; the reparameterizations are
// positive, so orbits and their orientations agree.  logxi tracks log(xi)
// alongside the Upper/BarZ coordinates (Lower carries xi directly as z).
// =========================================================================
enum class Chart { Lower, Upper, BarZ };

const char* chart_name(Chart c);

struct PhaseState {
    Chart chart = Chart::Upper;
    std::array<double, 3> c{0.0, 0.0, 0.0};
    double logxi = 0.0;

    double xi() const;   // exp(logxi), or c[2] in the Lower chart
};

struct FieldValue {
    std::array<double, 3> f{0.0, 0.0, 0.0};
    double dlogxi = 0.0;
};

using Mat3 = std::array<std::array<double, 3>, 3>;

// Chart vector field at a state.  Throws ChartError when a coordinate that
// the chart requires nonnegative is negative.
FieldValue vector_field(const Params& prm, const PhaseState& s);

// Same field with nonnegative coordinates clamped instead of rejected; the
// integrator uses this for internal Runge-Kutta stages that may undershoot
// an invariant plane by a rounding error.
FieldValue vector_field_raw(const Params& prm, Chart chart, const std::array<double, 3>& c);

// Analytic Jacobian of the chart field (the dlogxi row is not included).
Mat3 field_jacobian(const Params& prm, Chart chart, const std::array<double, 3>& c);

// Transition between charts.  Throws SingularMapError when the source state
// sits on a boundary where the map degenerates (x = 0, z = 0, X = 0, ...).
PhaseState chart_map(const Params& prm, const PhaseState& s, Chart target);

// Profile data carried by a state; requires positive f-coordinate.
ProfileSample to_profile(const Params& prm, const PhaseState& s);

}  // namespace selfsim
