#pragma once

#include <complex>
#include <optional>
#include <string>

#include "selfsim/phase.hpp"

namespace selfsim {

// =========================================================================
// Catalog of the critical points of the phase-space flow.
//
//   P0, P1, P2, Pgamma(gamma)  finite points of the Upper chart
//   InterfaceLine(eta)         half-line of interface points, Lower chart
//   Q1..Q5                     points at space infinity (projected system)
//
// Q4 admits no useful linearization; classify_point reports it as excluded
// (no admissible orbit reaches it) and refuses to fabricate a Jacobian.
// =========================================================================
enum class PointId { P0, P1, P2, Pgamma, Q1, Q2, Q3, Q4, Q5, InterfaceLine };

const char* point_name(PointId id);

struct CriticalPointInfo {
    PointId id = PointId::P0;
    Chart chart = Chart::Upper;
    bool at_infinity = false;
    std::array<double, 3> coords{0.0, 0.0, 0.0};
    Mat3 jacobian{};
    std::array<std::complex<double>, 3> eigenvalues{};
    // Unit eigenvector columns; for a complex pair the real part is stored.
    Mat3 eigenvectors{};
    int stable_dim = 0;
    int unstable_dim = 0;
    int center_dim = 0;
    double family_param = 0.0;  // gamma for Pgamma, eta for InterfaceLine
    std::string note;
};

// Eigenvalues below this magnitude (relative to the matrix scale) count as
// center directions.
inline constexpr double kCenterTol = 1e-10;

struct EigenDecomp {
    std::array<std::complex<double>, 3> values{};
    Mat3 vectors{};  // columns match values; real parts for complex pairs
};

// Dense 3x3 eigen-decomposition (values sorted by real part, descending).
EigenDecomp eigen3(const Mat3& a);

CriticalPointInfo classify_point(const Params& prm, PointId id,
                                 std::optional<double> family_param = std::nullopt);

// Outgoing eigendirection of P2 into {Z > 0}, normalized to Y = -1, plus the
// induced second-order profile coefficient psi = |x/z|^{1/(m-p)}.
struct P2Eigenvector {
    double x = 0.0;
    double y = -1.0;
    double z = 0.0;
    double psi = 0.0;
};

P2Eigenvector p2_eigenvector(const Params& prm);

}  // namespace selfsim
