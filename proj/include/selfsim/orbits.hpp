#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "selfsim/integrate.hpp"
#include "selfsim/starters.hpp"

namespace selfsim {

// =========================================================================
// Forward classification of the orbits that can carry a vanishing-head
// profile: the unique orbit out of P2 and the one-parameter family out of
// P0 (Z ~ k X).  Each orbit ends in exactly one of three ways:
//
//   EntersPGamma0  tail profile, f xi^{sigma/(p-1)} -> (1/(p-1))^{1/(p-1)}
//   EntersP1       interface at finite eta (detail = eta estimate)
//   EntersQ3       sign change at finite xi (detail = crossing estimate)
//
// plus the Q4 exclusion diagnostic (Z beyond the divergence cap carries no
// profile) and Unresolved for budget exhaustion.
// =========================================================================

enum class TerminalTag {
    EntersPGamma0,
    EntersP1,
    EntersQ3,
    Q4Diagnostic,
    Unresolved,
};

const char* terminal_tag_name(TerminalTag t);

struct TerminalClass {
    TerminalTag tag = TerminalTag::Unresolved;
    std::optional<double> detail;  // eta for P1 entry, crossing xi for Q3
};

struct ClassifiedOrbit {
    TerminalClass cls;
    OrbitTrace trace;
};

struct OrbitsConfig {
    double delta = 1e-5;      // starter offset along the outgoing manifold
    // P1 entry band: distance of the Lower-chart image to the interface
    // line {x = 0, m y + beta z = 0}.  The line is approached with
    // Y -> -beta/m, so the detector arms only past Y < -beta/(2m); near the
    // starters the image also sits on the line (at z = 0) and must not
    // trigger.
    double p1_band = 1e-3;
    // Tail commitment: the {X = Y = 0} axis is a line of equilibria and the
    // approach to (0, 0, gamma0) is only algebraic, so waiting for a small
    // ball is hopeless.  Once Z has climbed past (alpha + gamma0)/2 while
    // X < x_c := min(tail_x_cap, beta^2 / (8 m gamma0)) and Y sits in the
    // slaved sliver (-2 gamma0 x_c / beta, 0), the sliver is attracting at
    // rate beta, X decays monotonically and Z -> gamma0 is forced.
    // Disabling the early stop makes the run continue into the gamma0 ball
    // itself (slow; used to certify the accumulation level directly).
    bool tail_commit = true;
    double tail_x_cap = 1e-4;
    // Near-critical orbits shadow the equilibrium axis at small Z where the
    // drift is O(X) with X ~ 1e-8; resolving them needs long smooth arcs, so
    // classification raises the integrator's step cap and budget to these.
    double max_step = 1e3;
    double min_arc = 1e8;
    bool refine_unresolved = true;  // one rel_tol/10 re-run near the boundary
    double trap_tol = 1e-9;         // monitor slack for the planar connection
};

// Distance of the Lower-chart image of an Upper-chart state to the
// interface line {x = 0, m y + beta z = 0}.
double interface_distance(const Params& prm, const PhaseState& s);

// Smallest interface-line distance over the armed (Y < -beta/2m) states of
// a trace, with the index of the closest state; distance is DBL_MAX and the
// index one past the end when the trace never arms.
std::pair<double, std::size_t> closest_interface_approach(const Params& prm,
                                                          const OrbitTrace& tr);

ClassifiedOrbit classify_from_P2(const Params& prm, const IntegrationConfig& cfg,
                                 const OrbitsConfig& ocfg = {});

ClassifiedOrbit classify_from_P0(const Params& prm, double k, const IntegrationConfig& cfg,
                                 const OrbitsConfig& ocfg = {});

// One classification per k plus the brackets where the fate flips between
// the tail class and the sign-change class; a critical family member (the
// steep-head good profile candidate) lies inside each bracket.
struct FamilyScan {
    Params params;
    std::vector<double> ks;
    std::vector<TerminalClass> classes;
    std::vector<std::pair<double, double>> b0_brackets;
};

FamilyScan scan_family(const Params& prm, const std::vector<double>& k_grid,
                       const IntegrationConfig& cfg, const OrbitsConfig& ocfg = {},
                       int jobs = 1);

// 64 log-spaced points over [1e-4, 1e4].
std::vector<double> default_k_grid();

// Bisection on log k inside a fate-flip bracket down to relative width
// tol_rel; the endpoint orbits certify the flip.  Throws BracketError when
// the endpoints do not show the tail / sign-change dichotomy.  A midpoint
// caught inside the P1 detection band is re-run at tighter bands and the
// deepest such run is kept in `critical`; once a midpoint can no longer be
// resolved within budget (the critical creep limit) bisection stops at the
// width reached.
struct FamilyBand {
    std::pair<double, double> bracket{0.0, 0.0};
    ClassifiedOrbit tail_side;   // EntersPGamma0 endpoint
    ClassifiedOrbit cross_side;  // EntersQ3 endpoint
    // A midpoint that entered the P1 band sits inside the critical set; it
    // is kept as the certificate and the bisection stops there.
    std::optional<ClassifiedOrbit> critical;
    int iterations = 0;
};

FamilyBand refine_family_bracket(const Params& prm, std::pair<double, double> bracket,
                                 const IntegrationConfig& cfg, double tol_rel,
                                 const OrbitsConfig& ocfg = {});

// Integrates the reduced two-dimensional system on the invariant plane
// {Z = 0} from the P0 starter and certifies entry into the P2 attractor
// ball, monitoring the trapping region between the chord {(m-1) Y = 2 X}
// and the dY/dX = 0 curve.  Throws TrapViolation when a monitor fails.
OrbitTrace check_Z0_connection(const Params& prm, const IntegrationConfig& cfg,
                               const OrbitsConfig& ocfg = {});

// Minimum of the flow component across the two P2 barrier planes
//   plane 1: Z = E - D Y,  D = 2m(m+1)^2/(m-1),  E = 2(m+1)/(m-1)
//   plane 2: X = B Y + C,  B = m(m-1)/(2m^2+5m+1),
//            C = (2m+1)(m-1)/(2m(2m^2+5m+1))
// sampled over the patch {-Y0 < Y < Y(P2)} with the other coordinate
// between the planes' intersection and its cap.  Positive values certify
// the planes deflect the P2 orbit for the given sigma (the large-sigma
// confinement mechanism); normals point into the region holding the orbit.
double barrier_plane_min_flow(const Params& prm, int which, std::size_t n_grid = 32);

}  // namespace selfsim
