#include <cmath>
#include <complex>

#include "doctest.h"
#include "selfsim/critical_points.hpp"
#include "selfsim/starters.hpp"

using namespace selfsim;

namespace {

Params base() { return derive_exponents(3.0, 2.0, 1.0); }

}  // namespace

TEST_SUITE("local") {

TEST_CASE("generic eigen decomposition") {
    Mat3 A{{{2.0, 1.0, 0.0}, {1.0, 2.0, 0.0}, {0.0, 0.0, 5.0}}};
    const EigenDecomp d = eigen3(A);
    CHECK(d.values[0].real() == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(d.values[1].real() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(d.values[2].real() == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k < 3; ++k) {
        double nrm = 0.0, res = 0.0;
        for (int i = 0; i < 3; ++i) {
            double Av = 0.0;
            for (int j = 0; j < 3; ++j) Av += A[i][j] * d.vectors[j][k];
            res = std::max(res, std::abs(Av - d.values[k].real() * d.vectors[i][k]));
            nrm += d.vectors[i][k] * d.vectors[i][k];
        }
        CHECK(nrm == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(res <= 1e-12);
    }
}

TEST_CASE("hyperbolic saddle on the invariant axis") {
    const CriticalPointInfo p1 = classify_point(base(), PointId::P1);
    CHECK(p1.coords[0] == 0.0);
    CHECK(p1.coords[1] == doctest::Approx(-1.0 / 12.0).epsilon(1e-14));
    CHECK(p1.coords[2] == 0.0);
    CHECK(p1.eigenvalues[0].real() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p1.eigenvalues[1].real() == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(p1.eigenvalues[2].real() == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(p1.stable_dim == 2);
    CHECK(p1.unstable_dim == 1);
    CHECK(p1.center_dim == 0);
}

TEST_CASE("origin point carries a two-dimensional center") {
    const CriticalPointInfo p0 = classify_point(base(), PointId::P0);
    CHECK(p0.center_dim == 2);
    CHECK(p0.stable_dim == 1);
    bool saw_beta = false;
    for (auto& ev : p0.eigenvalues)
        if (std::abs(ev.real() + 0.25) < 1e-12) saw_beta = true;
    CHECK(saw_beta);
}

TEST_CASE("positive-slope point spectrum") {
    const Params prm = base();
    const CriticalPointInfo p2 = classify_point(prm, PointId::P2);
    CHECK(p2.coords[0] == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    CHECK(p2.coords[1] == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    CHECK(p2.coords[2] == 0.0);
    CHECK(p2.stable_dim == 2);
    CHECK(p2.unstable_dim == 1);
    // Unstable direction grows with the weight coordinate.
    CHECK(p2.eigenvalues[0].real() == doctest::Approx(0.5).epsilon(1e-10));
    // Product of the in-plane pair is parameter-independent of sigma.
    const std::complex<double> prod = p2.eigenvalues[1] * p2.eigenvalues[2];
    CHECK(prod.real() == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(std::abs(prod.imag()) <= 1e-12);
}

TEST_CASE("outgoing eigendirection in closed form") {
    const P2Eigenvector ev = p2_eigenvector(base());
    CHECK(ev.x == doctest::Approx(-0.5).epsilon(1e-13));
    CHECK(ev.y == -1.0);
    CHECK(ev.z == doctest::Approx(15.0).epsilon(1e-13));
    CHECK(ev.psi == doctest::Approx(1.0 / 30.0).epsilon(1e-13));

    // Must actually be an eigenvector for the leading eigenvalue.
    const Params prm = base();
    const CriticalPointInfo p2 = classify_point(prm, PointId::P2);
    const Mat3 J = p2.jacobian;
    const double lam = p2.eigenvalues[0].real();
    const std::array<double, 3> v{ev.x, ev.y, ev.z};
    for (int i = 0; i < 3; ++i) {
        double Jv = 0.0;
        for (int j = 0; j < 3; ++j) Jv += J[i][j] * v[j];
        CHECK(Jv == doctest::Approx(lam * v[i]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("tail point family") {
    const Params prm = base();
    const CriticalPointInfo pg = classify_point(prm, PointId::Pgamma);
    CHECK(pg.coords[2] == doctest::Approx(1.0).epsilon(1e-14));  // gamma0 = 1/(p-1)
    CHECK(pg.center_dim == 2);
    CHECK(pg.stable_dim == 1);
    const CriticalPointInfo pg2 = classify_point(prm, PointId::Pgamma, 2.5);
    CHECK(pg2.coords[2] == doctest::Approx(2.5).epsilon(1e-14));
    CHECK_THROWS_AS(classify_point(prm, PointId::Pgamma, -1.0), BadFamilyParam);
}

TEST_CASE("interface line spectrum") {
    const Params prm = base();
    const CriticalPointInfo il = classify_point(prm, PointId::InterfaceLine, 1.0);
    CHECK(il.chart == Chart::Lower);
    CHECK(il.coords[1] == doctest::Approx(-1.0 / 12.0).epsilon(1e-14));
    CHECK(il.coords[2] == 1.0);
    CHECK(il.eigenvalues[0].real() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(il.eigenvalues[1]) <= 1e-12);  // direction along the line
    CHECK(il.eigenvalues[2].real() == doctest::Approx(-0.5).epsilon(1e-12));
    // Scales linearly with the interface location.
    const CriticalPointInfo il2 = classify_point(prm, PointId::InterfaceLine, 2.0);
    CHECK(il2.eigenvalues[2].real() == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("points at infinity") {
    const Params prm = base();
    const CriticalPointInfo q2 = classify_point(prm, PointId::Q2);
    CHECK(q2.at_infinity);
    CHECK(q2.eigenvalues[0].real() == doctest::Approx(9.0).epsilon(1e-12));
    CHECK(q2.eigenvalues[1].real() == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(q2.eigenvalues[2].real() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(q2.unstable_dim == 3);

    const CriticalPointInfo q3 = classify_point(prm, PointId::Q3);
    CHECK(q3.stable_dim == 3);
    CHECK(q3.eigenvalues[2].real() == doctest::Approx(-9.0).epsilon(1e-12));

    const CriticalPointInfo q5 = classify_point(prm, PointId::Q5);
    CHECK(q5.eigenvalues[0].real() == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(q5.eigenvalues[1].real() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(q5.eigenvalues[2].real() == doctest::Approx(-3.0).epsilon(1e-12));

    CHECK_THROWS_AS(classify_point(prm, PointId::Q4), UnsupportedPoint);
}

TEST_CASE("starter leaving the positive-slope point") {
    const Params prm = base();
    const Starter st = make_starter(prm, PointId::P2, {}, 1e-4);
    CHECK(st.state.chart == Chart::Upper);
    CHECK(st.state.c[2] > 0.0);
    const double xi_s = st.state.xi();
    CHECK(xi_s > 0.0);
    CHECK(st.validity_lo == doctest::Approx(0.5 * xi_s));
    CHECK(st.validity_hi == doctest::Approx(2.0 * xi_s));

    // Local profile and chart readout agree inside the window.
    const ProfileSample chart = to_profile(prm, st.state);
    const ProfileSample form = local_profile(prm, st, xi_s);
    CHECK(form.f == doctest::Approx(chart.f).epsilon(1e-3));
    CHECK(form.df == doctest::Approx(chart.df).epsilon(1e-2));
    CHECK_THROWS_AS(local_profile(prm, st, 3.0 * xi_s), OutOfValidity);
    CHECK_NOTHROW(local_profile(prm, st, 3.0 * xi_s, true));
}

TEST_CASE("starter on the origin center family") {
    // Gentle parameters keep the quadratic correction below the check band.
    const Params prm = derive_exponents(3.0, 1.2, 0.2);
    const double delta = 1e-6;
    const Starter st = make_starter(prm, PointId::P0, 1.0, delta);
    CHECK(st.state.c[0] == delta);
    CHECK(st.state.c[2] == delta);  // k = 1
    CHECK(std::abs(st.state.c[1] - (prm.alpha / prm.beta) * delta) <= 1e-11);
    CHECK(st.state.logxi == doctest::Approx(prm.beta * std::log(delta)).epsilon(1e-12));

    CHECK_THROWS_AS(make_starter(prm, PointId::P0, {}, delta), BadFamilyParam);
    CHECK_THROWS_AS(make_starter(prm, PointId::P0, 1.0, 1e-2), BadDelta);
}

TEST_CASE("starter against the interface line") {
    const Params prm = base();
    const Starter st = make_starter(prm, PointId::InterfaceLine, 1.0, 1e-4);
    CHECK(st.state.chart == Chart::Lower);
    CHECK(st.state.c[0] > 0.0);
    CHECK(st.state.c[2] < 1.0);  // support lies inside the interface
    // Parabolic local form underneath.
    const ProfileSample s = local_profile(prm, st, 0.95);
    const double c = prm.beta * (prm.m - 1.0) / (2.0 * prm.m);
    CHECK(std::pow(s.f, prm.m - 1.0) == doctest::Approx(c * (1.0 - 0.95 * 0.95)).epsilon(1e-12));
    CHECK(s.fm_prime == doctest::Approx(-prm.beta * 0.95 * s.f).epsilon(1e-12));
    // Vanishes identically beyond the interface.
    CHECK(local_profile(prm, st, 1.2, true).f == 0.0);
}

TEST_CASE("tail reference form balances the first-order terms") {
    const Params prm = base();
    const Starter st = make_starter(prm, PointId::Pgamma, {}, 1e-4);
    for (double xi : {20.0, 50.0}) {
        const ProfileSample s = local_profile(prm, st, xi);
        // Residual without diffusion: -alpha f + beta xi f' + xi^sigma f^p.
        const double first = -prm.alpha * s.f + prm.beta * xi * s.df +
                             std::pow(xi, prm.sigma) * std::pow(s.f, prm.p);
        CHECK(std::abs(first) <= 1e-12 * prm.alpha * s.f + 1e-15);
    }
}

TEST_CASE("starters converge to their orbits") {
    const Params prm = base();
    for (PointId id : {PointId::P2, PointId::InterfaceLine, PointId::P0}) {
        const std::optional<double> fam =
            id == PointId::P2 ? std::nullopt : std::optional<double>(1.0);
        const double d1 = starter_consistency_defect(prm, make_starter(prm, id, fam, 1e-3));
        const double d2 = starter_consistency_defect(prm, make_starter(prm, id, fam, 5e-4));
        CHECK(d1 <= 1e-3);
        CHECK(d2 <= d1 / 2.5);  // quadratic truncation: halving delta quarters it
    }
}

}  // TEST_SUITE
