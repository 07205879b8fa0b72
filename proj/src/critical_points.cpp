#include "selfsim/critical_points.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace selfsim {

const char* point_name(PointId id) {
    switch (id) {
        case PointId::P0: return "P0";
        case PointId::P1: return "P1";
        case PointId::P2: return "P2";
        case PointId::Pgamma: return "Pgamma";
        case PointId::Q1: return "Q1";
        case PointId::Q2: return "Q2";
        case PointId::Q3: return "Q3";
        case PointId::Q4: return "Q4";
        case PointId::Q5: return "Q5";
        case PointId::InterfaceLine: return "InterfaceLine";
    }
    return "?";
}

EigenDecomp eigen3(const Mat3& a) {
    Eigen::Matrix3d mat;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) mat(i, j) = a[i][j];
    Eigen::EigenSolver<Eigen::Matrix3d> solver(mat, true);

    std::array<int, 3> order{0, 1, 2};
    const auto& vals = solver.eigenvalues();
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        if (vals[i].real() != vals[j].real()) return vals[i].real() > vals[j].real();
        return vals[i].imag() > vals[j].imag();
    });

    EigenDecomp out;
    for (int c = 0; c < 3; ++c) {
        const int k = order[c];
        out.values[c] = vals[k];
        Eigen::Vector3d v = solver.eigenvectors().col(k).real();
        if (v.norm() < 1e-12)  // purely imaginary eigenvector: fall back to imag part
            v = solver.eigenvectors().col(k).imag();
        v.normalize();
        // Deterministic sign: largest-magnitude component positive.
        int imax = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
        if (v[imax] < 0.0) v = -v;
        for (int i = 0; i < 3; ++i) out.vectors[i][c] = v[i];
    }
    return out;
}

namespace {

double matrix_scale(const Mat3& a) {
    double s = 0.0;
    for (const auto& row : a)
        for (double v : row) s = std::max(s, std::abs(v));
    return s > 0.0 ? s : 1.0;
}

void fill_eigen_data(CriticalPointInfo& info) {
    const EigenDecomp ed = eigen3(info.jacobian);
    info.eigenvalues = ed.values;
    info.eigenvectors = ed.vectors;
    const double tol = kCenterTol * matrix_scale(info.jacobian);
    info.stable_dim = info.unstable_dim = info.center_dim = 0;
    for (const auto& ev : ed.values) {
        if (ev.real() < -tol)
            ++info.stable_dim;
        else if (ev.real() > tol)
            ++info.unstable_dim;
        else
            ++info.center_dim;
    }
}

}  // namespace

CriticalPointInfo classify_point(const Params& prm, PointId id,
                                 std::optional<double> family_param) {
    const double m = prm.m;
    const double p = prm.p;
    const double al = prm.alpha;
    const double be = prm.beta;

    CriticalPointInfo info;
    info.id = id;
    info.chart = Chart::Upper;

    switch (id) {
        case PointId::P0:
            info.coords = {0.0, 0.0, 0.0};
            info.jacobian = field_jacobian(prm, Chart::Upper, info.coords);
            info.note = "one-dimensional stable manifold; two-dimensional center manifold "
                        "carrying the origin family";
            break;
        case PointId::P1:
            info.coords = {0.0, -be / m, 0.0};
            info.jacobian = field_jacobian(prm, Chart::Upper, info.coords);
            info.note = "saddle; two-dimensional stable manifold inside {X = 0}";
            break;
        case PointId::P2:
            info.coords = {prm.x_p2(), prm.y_p2(), 0.0};
            info.jacobian = field_jacobian(prm, Chart::Upper, info.coords);
            info.note = "unique orbit leaves into {Z > 0} along the third eigendirection";
            break;
        case PointId::Pgamma: {
            double gamma;
            if (family_param) {
                gamma = *family_param;
                if (!(gamma > 0.0)) throw BadFamilyParam("Pgamma needs gamma > 0");
            } else {
                gamma = prm.gamma0();
            }
            info.coords = {0.0, 0.0, gamma};
            info.jacobian = field_jacobian(prm, Chart::Upper, info.coords);
            info.family_param = gamma;
            info.note = "non-hyperbolic point of the Z-axis family";
            break;
        }
        case PointId::InterfaceLine: {
            const double eta = family_param.value_or(1.0);
            if (!(eta > 0.0)) throw BadFamilyParam("InterfaceLine needs eta > 0");
            info.chart = Chart::Lower;
            info.coords = {0.0, -be * eta / m, eta};
            info.jacobian = field_jacobian(prm, Chart::Lower, info.coords);
            info.family_param = eta;
            info.note = "interface point; unique orbit enters from {x > 0} along the "
                        "stable eigendirection";
            break;
        }
        case PointId::Q1:
            info.at_infinity = true;
            info.coords = {1.0, 0.0, 0.0};
            info.jacobian = {{{m, -1.0, al}, {0.0, m * (prm.sigma + 2.0), 0.0}, {0.0, 0.0, 2.0 * m}}};
            info.note = "unstable node at infinity; orbits of profiles with f(0) = a > 0";
            break;
        case PointId::Q2:
            info.at_infinity = true;
            info.coords = {0.0, 1.0, 0.0};
            // Flow-oriented linearization (orientation chosen so the orbit leaves).
            info.jacobian = {{{m * m, 0.0, 0.0}, {0.0, m * p, 0.0}, {0.0, 0.0, m}}};
            info.note = "unstable node at infinity; profiles emerging from a sign change";
            break;
        case PointId::Q3:
            info.at_infinity = true;
            info.coords = {0.0, -1.0, 0.0};
            info.jacobian = {{{-m * m, 0.0, 0.0}, {0.0, -m * p, 0.0}, {0.0, 0.0, -m}}};
            info.note = "stable node at infinity; profiles vanishing with negative slope";
            break;
        case PointId::Q4:
            throw UnsupportedPoint(
                "Q4 carries no linearization; no admissible profile orbit reaches it "
                "(the weighted reaction xi^sigma f^{p-1} stays bounded on profiles)");
        case PointId::Q5: {
            info.at_infinity = true;
            const double n = std::sqrt(1.0 + m * m);
            info.coords = {m / n, 1.0 / n, 0.0};
            info.jacobian = {{{-m, -1.0, al - be / m},
                             {0.0, m * (prm.sigma + 1.0) + p, 0.0},
                             {0.0, 0.0, m + 1.0}}};
            info.note = "saddle at infinity; f ~ K xi^{1/m} orbits";
            break;
        }
    }

    fill_eigen_data(info);
    return info;
}

P2Eigenvector p2_eigenvector(const Params& prm) {
    const double m = prm.m;
    const double p = prm.p;
    const double s = prm.sigma;
    const double denom = 2.0 * (m + p - 2.0) + s * (m - 1.0);

    P2Eigenvector v;
    v.x = -(m - 1.0) * (m - 1.0) / denom;
    v.y = -1.0;
    v.z = (2.0 * m / (m - 1.0)) *
          (-(prm.alpha * (m + 1.0) - 1.0) * (m - 1.0) * (m - 1.0) / denom +
           (2.0 * (m + 1.0) * prm.beta + m + 2.0 * p + 1.0 + s * (m - 1.0)) / 2.0);
    if (!(v.z > 0.0))
        throw DomainError("P2 outgoing eigendirection lost its positive Z component");
    v.psi = std::pow(std::abs(v.x / v.z), 1.0 / (m - p));
    return v;
}

}  // namespace selfsim
