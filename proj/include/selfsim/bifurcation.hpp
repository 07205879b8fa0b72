#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "selfsim/orbits.hpp"
#include "selfsim/shooting.hpp"

namespace selfsim {

// =========================================================================
// Structure in sigma at fixed (m, p).  The steep-saddle orbit reaches the
// constant tail for small sigma and leaves through a sign change for large
// sigma; at the flip the orbit grazes the interface line, which is the
// parabolic-head good profile with an interface.  sigma_star is located by
// bisection against that dichotomy; the regime map surveys a sigma grid.
// =========================================================================

struct BifurcationConfig {
    std::pair<double, double> bracket0{0.5, 8.0};
    double expand_cap = 64.0;  // geometric x2 endpoint expansion limit
    double tol = 2e-4;         // final bracket width in sigma
    // Certification: the orbit at the returned midpoint must approach the
    // interface line within this distance (entry into the detection band
    // counts a fortiori).
    double cert_band = 5e-3;
    int max_iter = 60;
    double eta_tol = 1e-4;  // forwarded to bisect_eta by the regime map
    OrbitsConfig orbits;    // forwarded to every classification
};

struct BifurcationResult {
    Params params;  // exponents at sigma_star
    double sigma_star = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    int iterations = 0;
    // Re-verified endpoint classes: tail at bracket.first, sign change at
    // bracket.second, both re-run at rel_tol / 10.
    TerminalClass low_certificate;
    TerminalClass high_certificate;
    double grazing_distance = 0.0;  // closest interface-line approach at sigma_star
    GoodProfile critical_profile;   // parabolic head, interface at eta0
};

// Bisection on sigma inside a tail / sign-change bracket.  Endpoints that
// do not certify are expanded geometrically (x2) up to expand_cap before
// BracketError is thrown.  A midpoint that can no longer be resolved while
// the bracket is still wider than tol raises CertificationFailure, except
// when it sits inside the interface detection band at the band floor: that
// midpoint is the connection to working precision and is returned with its
// grazing certificate.  tol and cert_band must be positive.
BifurcationResult find_sigma_star(double m, double p, const IntegrationConfig& cfg,
                                  const BifurcationConfig& bcfg = {});

// Per-sigma survey row.  The family summary classifies a fixed k grid; the
// profile kind comes from eta bisection over an auto-detected bracket.
// Failures are recorded in `error` and never thrown.
struct RegimeRow {
    double sigma = 0.0;
    TerminalClass p2_class;
    bool family_has_tail = false;  // some k reaches the constant tail
    bool family_has_flip = false;  // a fate-flip bracket exists in k
    std::optional<ProfileKind> profile_kind;
    std::string error;
};

struct RegimeMap {
    double m = 0.0, p = 0.0;
    std::vector<RegimeRow> rows;
    // Grid read-offs (absent when the grid does not straddle them): largest
    // sigma whose saddle orbit still reaches the tail, and smallest sigma
    // whose k family shows a fate flip.
    std::optional<double> sigma_tail_end;
    std::optional<double> sigma_flip_start;
};

// Grid must be positive and strictly ascending.  Rows are computed
// concurrently (jobs > 1) and merged in sigma order.
RegimeMap regime_map(double m, double p, const std::vector<double>& sigma_grid,
                     const IntegrationConfig& cfg, const BifurcationConfig& bcfg = {},
                     int jobs = 1);

}  // namespace selfsim
