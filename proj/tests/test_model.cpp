#include <cmath>
#include <random>

#include "doctest.h"
#include "selfsim/params.hpp"
#include "selfsim/phase.hpp"

using namespace selfsim;

namespace {

Params base() { return derive_exponents(3.0, 2.0, 1.0); }

// Central-difference directional derivative of a chart map component.
std::array<double, 3> fd_column(const Params& prm, const PhaseState& s, Chart target,
                                int j, double h) {
    PhaseState sp = s, sm = s;
    sp.c[j] += h;
    sm.c[j] -= h;
    const PhaseState up = chart_map(prm, sp, target);
    const PhaseState um = chart_map(prm, sm, target);
    return {(up.c[0] - um.c[0]) / (2.0 * h), (up.c[1] - um.c[1]) / (2.0 * h),
            (up.c[2] - um.c[2]) / (2.0 * h)};
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("exponents at the reference parameters") {
    const Params prm = base();
    CHECK(prm.alpha == 0.75);
    CHECK(prm.beta == 0.25);
    CHECK(prm.x_p2() == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(prm.y_p2() == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(prm.y_p1() == doctest::Approx(-1.0 / 12.0).epsilon(1e-15));
    CHECK(prm.gamma0() == 1.0);
    CHECK(prm.y0_barrier() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(prm.case2_exponent() == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(prm.grow_bound() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(prm.min_max_location() == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));
}

TEST_CASE("exponent identity over the parameter box") {
    for (double m : {1.5, 2.0, 3.0, 4.5})
        for (double p : {1.0 + 0.3 * (m - 1.0), 1.0 + 0.7 * (m - 1.0)})
            for (double s : {0.1, 1.0, 2.5, 7.0}) {
                const Params prm = derive_exponents(m, p, s);
                CHECK(prm.alpha * (m - p) ==
                      doctest::Approx(prm.beta * (s + 2.0)).epsilon(1e-14));
                CHECK(prm.alpha > 0.0);
                CHECK(prm.beta > 0.0);
            }
}

TEST_CASE("parameter box rejections") {
    CHECK_THROWS_AS(derive_exponents(1.0, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(derive_exponents(3.0, 3.0, 1.0), DomainError);
    CHECK_THROWS_AS(derive_exponents(3.0, 3.5, 1.0), DomainError);
    CHECK_THROWS_AS(derive_exponents(3.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(derive_exponents(3.0, 2.0, -0.5), DomainError);
    CHECK_THROWS_AS(derive_exponents(3.0, 2.0, 0.0), DomainError);
    CHECK_THROWS_AS(derive_exponents(3.0, 1.0, 0.0, Allow::both), DomainError);
    CHECK_NOTHROW(derive_exponents(3.0, 1.0, 1.0, Allow::p_one));
    CHECK_NOTHROW(derive_exponents(3.0, 2.0, 0.0, Allow::sigma_zero));
}

TEST_CASE("relaxed modes set the advertised exponents") {
    const Params p1 = derive_exponents(3.0, 1.0, 2.0, Allow::p_one);
    CHECK(p1.p_one_mode);
    CHECK(p1.beta == doctest::Approx(0.5).epsilon(1e-15));        // 1/sigma
    CHECK(p1.alpha == doctest::Approx(1.0).epsilon(1e-15));       // (sigma+2)/(sigma(m-1))
    CHECK_THROWS_AS(p1.gamma0(), DomainError);

    const Params s0 = derive_exponents(3.0, 2.0, 0.0, Allow::sigma_zero);
    CHECK(s0.sigma_zero_mode);
    CHECK(s0.beta == doctest::Approx(0.5).epsilon(1e-15));        // (m-p)/(2(p-1))
    CHECK(s0.alpha == doctest::Approx(1.0).epsilon(1e-15));       // 1/(p-1)
}

TEST_CASE("closed-form profile satisfies the ODE") {
    const ExactSolution ex = ExactSolution::make(3.0);
    CHECK(ex.sigma == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));
    CHECK(ex.a_coeff == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(ex.xi0 == doctest::Approx(1.5984).epsilon(3e-3));
    const Params prm = ex.params();
    for (double xi : {0.2, 0.5, 1.0, 1.4, 1.59}) {
        const ProfileSample s = ex.sample(xi);
        CHECK(s.f > 0.0);
        CHECK(std::abs(ode_residual(prm, s, ex.fm_second(xi))) <= 1e-9);
    }
    // Beyond the interface the profile and its fluxes vanish.
    const ProfileSample out = ex.sample(ex.xi0 + 0.5);
    CHECK(out.f == 0.0);
    CHECK(out.fm_prime == 0.0);
}

TEST_CASE("chart fields at pinned states") {
    const Params prm = base();
    PhaseState s;
    s.chart = Chart::Lower;
    s.c = {1.0, 1.0, 1.0};
    FieldValue v = vector_field(prm, s);
    CHECK(v.f[0] == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(v.f[1] == doctest::Approx(-3.5).epsilon(1e-15));
    CHECK(v.f[2] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(v.dlogxi == doctest::Approx(3.0).epsilon(1e-15));

    s.chart = Chart::Upper;
    v = vector_field(prm, s);
    CHECK(v.f[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v.f[1] == doctest::Approx(-6.5).epsilon(1e-15));
    CHECK(v.f[2] == doctest::Approx(6.0).epsilon(1e-15));

    s.chart = Chart::BarZ;
    v = vector_field(prm, s);
    CHECK(v.f[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(v.f[1] == doctest::Approx(-6.5).epsilon(1e-15));
    CHECK(v.f[2] == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("negative coordinates rejected, raw path clamps") {
    const Params prm = base();
    PhaseState s;
    s.chart = Chart::Upper;
    s.c = {-1e-12, 0.5, 0.3};
    CHECK_THROWS_AS(vector_field(prm, s), ChartError);
    const FieldValue v = vector_field_raw(prm, Chart::Upper, s.c);
    CHECK(v.f[0] == 0.0);  // clamped X = 0 kills the X row
}

TEST_CASE("chart transition against hand-computed values") {
    const Params prm = base();
    PhaseState lo;
    lo.chart = Chart::Lower;
    lo.c = {4.0, 1.0, 2.0};
    lo.logxi = std::log(2.0);
    const PhaseState up = chart_map(prm, lo, Chart::Upper);
    CHECK(up.c[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(up.c[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(up.c[2] == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(up.logxi == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    const PhaseState back = chart_map(prm, up, Chart::Lower);
    for (int i = 0; i < 3; ++i) CHECK(back.c[i] == doctest::Approx(lo.c[i]).epsilon(1e-12));

    const PhaseState bz = chart_map(prm, up, Chart::BarZ);
    CHECK(bz.c[2] == doctest::Approx(up.c[0] * up.c[2]).epsilon(1e-14));
    const PhaseState up2 = chart_map(prm, bz, Chart::Upper);
    for (int i = 0; i < 3; ++i) CHECK(up2.c[i] == doctest::Approx(up.c[i]).epsilon(1e-12));
}

TEST_CASE("boundary states have no chart image") {
    const Params prm = base();
    PhaseState s;
    s.chart = Chart::Lower;
    s.c = {0.0, 0.3, 1.0};
    CHECK_THROWS_AS(chart_map(prm, s, Chart::Upper), SingularMapError);
    s.c = {0.5, 0.3, 0.0};
    CHECK_THROWS_AS(chart_map(prm, s, Chart::Upper), SingularMapError);
}

TEST_CASE("profile readout from both charts") {
    const Params prm = base();
    PhaseState lo;
    lo.chart = Chart::Lower;
    lo.c = {4.0, 1.0, 2.0};
    lo.logxi = std::log(2.0);
    const ProfileSample a = to_profile(prm, lo);
    CHECK(a.xi == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(a.f == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(a.df == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(a.fm_prime == doctest::Approx(6.0).epsilon(1e-14));

    const ProfileSample b = to_profile(prm, chart_map(prm, lo, Chart::Upper));
    CHECK(b.f == doctest::Approx(a.f).epsilon(1e-12));
    CHECK(b.df == doctest::Approx(a.df).epsilon(1e-12));
}

TEST_CASE("analytic Jacobians match finite differences") {
    const Params prm = derive_exponents(2.5, 1.7, 1.3);
    std::mt19937 rng(20240817u);
    std::uniform_real_distribution<double> U(0.1, 1.5);
    for (Chart ch : {Chart::Lower, Chart::Upper, Chart::BarZ}) {
        for (int trial = 0; trial < 50; ++trial) {
            const std::array<double, 3> c{U(rng), U(rng) - 0.8, U(rng)};
            const Mat3 J = field_jacobian(prm, ch, c);
            for (int j = 0; j < 3; ++j) {
                const double h = 1e-6 * std::max(1.0, std::abs(c[j]));
                std::array<double, 3> cp = c, cm = c;
                cp[j] += h;
                cm[j] -= h;
                const FieldValue fp = vector_field_raw(prm, ch, cp);
                const FieldValue fm = vector_field_raw(prm, ch, cm);
                for (int i = 0; i < 3; ++i) {
                    const double fd = (fp.f[i] - fm.f[i]) / (2.0 * h);
                    CHECK(J[i][j] == doctest::Approx(fd).epsilon(5e-7).scale(1.0));
                }
            }
        }
    }
}

TEST_CASE("chart transition conjugates the fields") {
    // d(upper)/d(lower-time) = Jacobian(map) * F_lower must equal z * F_upper:
    // the two orbit times differ by the factor z = xi.
    const Params prm = base();
    std::mt19937 rng(20240818u);
    std::uniform_real_distribution<double> U(0.2, 2.0);
    std::uniform_real_distribution<double> V(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        PhaseState s;
        s.chart = Chart::Lower;
        s.c = {U(rng), V(rng), U(rng)};
        s.logxi = std::log(s.c[2]);
        const FieldValue fl = vector_field(prm, s);
        const PhaseState up = chart_map(prm, s, Chart::Upper);
        const FieldValue fu = vector_field(prm, up);
        const std::array<double, 3> col0 = fd_column(prm, s, Chart::Upper, 0, 1e-7 * s.c[0]);
        const std::array<double, 3> col1 = fd_column(prm, s, Chart::Upper, 1, 1e-7);
        const std::array<double, 3> col2 = fd_column(prm, s, Chart::Upper, 2, 1e-7 * s.c[2]);
        for (int i = 0; i < 3; ++i) {
            const double push = col0[i] * fl.f[0] + col1[i] * fl.f[1] + col2[i] * fl.f[2];
            const double want = s.c[2] * fu.f[i];
            CHECK(push == doctest::Approx(want).epsilon(1e-6).scale(1.0 + std::abs(want)));
        }
    }
}

TEST_CASE("homogeneous-mode field drops the weight") {
    const Params s0 = derive_exponents(3.0, 2.0, 0.0, Allow::sigma_zero);
    PhaseState s;
    s.chart = Chart::Lower;
    s.c = {1.0, 1.0, 2.0};
    // Reaction term enters with weight 1 instead of z^sigma.
    const FieldValue v = vector_field(s0, s);
    CHECK(v.f[1] == doctest::Approx(-3.0 * 1.0 - s0.beta * 2.0 + s0.alpha - 1.0).epsilon(1e-14));
}

}  // TEST_SUITE
