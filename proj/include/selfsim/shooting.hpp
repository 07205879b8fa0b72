#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "selfsim/integrate.hpp"
#include "selfsim/starters.hpp"

namespace selfsim {

// =========================================================================
// Backward shooting from a trial interface location eta: the orbit entering
// the interface line at (0, -beta eta / m, eta) is unique, so following it
// in reverse system time reveals the left endpoint of the profile f_eta.
// Classes partition eta by that endpoint.
// =========================================================================

enum class ShotClass {
    AMinus,        // f(0) = a > 0 with f'(0) < 0
    GoodP1,        // f(0) = a > 0 with f'(0) = 0 (within p1_tol)
    GoodP2Case1,   // f(0) = 0, f ~ [(m-1)/(2m(m+1))]^{1/(m-1)} xi^{2/(m-1)}
    GoodP2Case2,   // f(0) = 0, f ~ k xi^{(sigma+2)/(m-p)}
    APlus,         // f vanishes backward at some theta in (0, eta)
    PositiveSlope, // f(0) = a > 0 with f'(0) > 0; not part of the trichotomy,
                   // kept separate so it cannot masquerade as a good profile
    Unresolved,
};

const char* shot_class_name(ShotClass c);

enum class ProfileKind { P1, P2Case1, P2Case2 };

const char* profile_kind_name(ProfileKind k);

struct ShootOutcome {
    double eta = 0.0;
    ShotClass cls = ShotClass::Unresolved;
    std::optional<double> a0;      // endpoint value f(0) when it exists
    std::optional<double> theta;   // backward sign-change location
    double y0 = 0.0;               // endpoint limit of y = f^{m-2} f'
    double x_limit = 0.0;          // coefficient of the head law x ~ C xi^q,
                                   // with q = fitted_exponent * (m-1)
    double fitted_exponent = 0.0;  // d log f / d log xi over the fit window
    OrbitTrace trace;
};

struct GoodProfile {
    Params params;
    double eta0 = 0.0;
    ProfileKind kind = ProfileKind::P1;
    // Ascending xi. P1 profiles sample the certified backward shot; P2
    // profiles sample the forward orbit launched from the certified head law,
    // which stays clean where the backward endpoint is noise-dominated.
    std::vector<ProfileSample> samples;
    std::optional<double> a0;
    std::pair<double, double> bracket{0.0, 0.0};
    int iterations = 0;
    ShootOutcome shot;  // the certified backward shot, trace included
};

// Knobs of the endpoint classifier; defaults follow the module contract.
struct ShootingConfig {
    // Starter offset; the backward orbit inherits an O(delta^2) error, which
    // must stay below x at the endpoint fit window (~xi_floor^2 for P2 shots).
    double delta = 1e-8;
    double p1_tol = 1e-4;           // |y0| band certifying a flat endpoint
    double case_band = 0.10;        // relative band on the X limit for CASE1
    double xi_floor_factor = 1e-6;  // stop at xi = factor * eta
    double x_floor = 1e-13;         // sign-change detection level for x
    double fit_decades = 1.0;       // width of the endpoint fit window in log xi
    double max_step = 25.0;         // overrides IntegrationConfig::max_step
    double min_arc = 1e7;           // raises IntegrationConfig::max_arc to this
    // Power-law window detection for near-critical shots: minimum clean span
    // in decades, cap on the log-log fit RMS, and slope band around the two
    // admissible head exponents.
    double window_decades = 1.0;
    double window_rms = 0.02;
    double window_band = 0.25;
    // The critical orbit is a separatrix: in reverse time the integration
    // error is amplified near the origin and reads back as a spurious a > 0
    // endpoint at the noise scale. When a shot ends a-like below a clean
    // power-law window, re-shoot at 100x tighter tolerance; if the endpoint
    // moves with the tolerance it is noise and the window law is certified
    // instead. Internal re-runs disable this to avoid recursion.
    bool classify_refine = true;
    // P1 / P2 discrimination at the bisection limit uses the endpoint angle
    // r = |y0| / sqrt(x): it collapses to zero along a P1 transition and
    // locks at a nonzero constant along a P2 one, where the endpoint a keeps
    // creeping at every resolvable bracket width.
    double angle_lock = 1e-2;
    // P2 certification is forward: an orbit launched from an admissible head
    // law must reproduce the interface location within head_match_rel * eta.
    // Heads launch at z0 = frac * eta; the steep family needs a larger z0 so
    // its start stays resolvable above x_floor.
    double head_match_rel = 2e-3;
    double head_z0_parabolic = 0.03;
    double head_z0_steep = 0.2;
};

// Scan output: one outcome per grid point plus the inferred transition
// bracket (largest A- point, smallest A+ above it), when present.
struct EtaScan {
    std::vector<ShootOutcome> outcomes;
    std::optional<std::pair<double, double>> bracket;
    int transitions = 0;  // adjacent class changes; > 1 flags multiplicity
};

ShootOutcome shoot_from_interface(const Params& prm, double eta, const IntegrationConfig& cfg,
                                  const ShootingConfig& scfg = {});

// Bisection on eta between an A- point and an A+ point; converges onto
// sup A- and returns the certified good profile there.  Throws BracketError
// when the endpoints do not classify as required and AmbiguousLimit when no
// good class certifies within the iteration budget.
GoodProfile bisect_eta(const Params& prm, std::pair<double, double> bracket,
                       const IntegrationConfig& cfg, double tol_eta,
                       const ShootingConfig& scfg = {});

EtaScan scan_eta(const Params& prm, const std::vector<double>& grid,
                 const IntegrationConfig& cfg, const ShootingConfig& scfg = {}, int jobs = 1);

// Geometric expansion from the seed bracket (0.1, 20) until the endpoints
// classify A- / A+.
std::pair<double, double> default_bracket(const Params& prm, const IntegrationConfig& cfg,
                                          const ShootingConfig& scfg = {});

// Profile sample at a requested xi on a Lower-chart trace (z is monotone
// along such orbits); dense data required.
ProfileSample profile_at_xi(const OrbitTrace& trace, double xi);

// Least-squares slope of log f against log xi over profile samples with
// xi in [xi_lo, xi_hi].  Used to certify origin exponents.
double fit_log_slope(const std::vector<ProfileSample>& samples, double xi_lo, double xi_hi);

}  // namespace selfsim
