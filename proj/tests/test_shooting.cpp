#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "selfsim/shooting.hpp"

using namespace selfsim;

namespace {

IntegrationConfig quiet() {
    IntegrationConfig cfg;
    cfg.record_dense = false;
    return cfg;
}

IntegrationConfig dense() { return IntegrationConfig{}; }

// Shared profile sanity: strictly ascending xi, nonnegative f, interior
// positivity, and the pointwise head bound x <= grow_bound * xi^2 away from
// the interface.
void check_profile_shape(const GoodProfile& gp) {
    REQUIRE(gp.samples.size() >= 50);
    bool ascending = true, positive = true;
    double worst_bound = 0.0;
    for (std::size_t i = 0; i < gp.samples.size(); ++i) {
        const ProfileSample& s = gp.samples[i];
        if (i && !(s.xi > gp.samples[i - 1].xi)) ascending = false;
        if (s.f < 0.0) positive = false;
        if (s.xi > 0.0 && s.xi < 0.99 * gp.eta0 && !(gp.a0 && *gp.a0 > 0.0))
            worst_bound = std::max(worst_bound, std::pow(s.f, gp.params.m - 1.0) /
                                                    (s.xi * s.xi * gp.params.grow_bound()));
    }
    CHECK(ascending);
    CHECK(positive);
    CHECK(worst_bound <= 1.0);
    CHECK(gp.samples.back().xi <= 1.01 * gp.eta0);
    // somewhere in the middle the profile is solidly positive
    const ProfileSample& mid = gp.samples[gp.samples.size() / 2];
    CHECK(mid.f > 0.0);
}

}  // namespace

TEST_SUITE("shooting") {

// ---- closed-form oracle: p = 1 profile with a known interface ----------

TEST_CASE("single shot at the exact interface certifies the parabolic head") {
    const ExactSolution ex = ExactSolution::make(3.0);
    const ShootOutcome o = shoot_from_interface(ex.params(), ex.xi0, quiet());
    CHECK(o.cls == ShotClass::GoodP2Case1);
    CHECK(o.x_limit == doctest::Approx(1.0 / 12.0).epsilon(0.02));
    CHECK(o.fitted_exponent == doctest::Approx(1.0).epsilon(0.05));
    CHECK(o.a0.has_value());
    CHECK(*o.a0 == 0.0);
}

TEST_CASE("single shots off the exact interface classify to either side") {
    const ExactSolution ex = ExactSolution::make(3.0);
    const ShootOutcome below = shoot_from_interface(ex.params(), 0.9 * ex.xi0, quiet());
    CHECK(below.cls == ShotClass::AMinus);
    REQUIRE(below.a0.has_value());
    CHECK(*below.a0 > 0.0);
    CHECK(below.y0 < 0.0);

    const ShootOutcome above = shoot_from_interface(ex.params(), 1.1 * ex.xi0, quiet());
    CHECK(above.cls == ShotClass::APlus);
    REQUIRE(above.theta.has_value());
    CHECK(*above.theta > 0.0);
    CHECK(*above.theta < 1.1 * ex.xi0);
}

TEST_CASE("bisection at p = 1 recovers the closed-form interface location") {
    const ExactSolution ex = ExactSolution::make(3.0);
    const GoodProfile gp =
        bisect_eta(ex.params(), {0.8 * ex.xi0, 1.3 * ex.xi0}, dense(), 1e-6);
    CHECK(gp.kind == ProfileKind::P2Case1);
    CHECK(gp.eta0 == doctest::Approx(ex.xi0).epsilon(1e-9));
    CHECK(gp.shot.x_limit == doctest::Approx(1.0 / 12.0).epsilon(0.02));
    CHECK(gp.shot.fitted_exponent == doctest::Approx(1.0).epsilon(0.05));
    REQUIRE(gp.a0.has_value());
    CHECK(*gp.a0 == 0.0);
    check_profile_shape(gp);
    // the sampled profile must lie on the closed-form solution
    double worst = 0.0;
    for (const ProfileSample& s : gp.samples)
        if (s.xi < 0.999 * ex.xi0)
            worst = std::max(worst, std::abs(s.f - ex.sample(s.xi).f));
    CHECK(worst <= 1e-4);
}

// ---- flat-endpoint limits ----------------------------------------------

TEST_CASE("bisection certifies a flat endpoint at sigma = 1") {
    const Params prm = derive_exponents(3.0, 2.0, 1.0);
    const GoodProfile gp = bisect_eta(prm, {3.0, 5.0}, dense(), 1e-6);
    CHECK(gp.kind == ProfileKind::P1);
    CHECK(gp.eta0 == doctest::Approx(3.4299).epsilon(3e-4));
    REQUIRE(gp.a0.has_value());
    CHECK(*gp.a0 == doctest::Approx(0.3743).epsilon(5e-3));
    CHECK(std::abs(gp.shot.y0) <= 2e-4);
    CHECK(gp.bracket.second - gp.bracket.first <= 1e-5);
    check_profile_shape(gp);
    // flat endpoint: x_limit reports the head coefficient a0^{m-1}
    CHECK(gp.shot.x_limit ==
          doctest::Approx(std::pow(*gp.a0, prm.m - 1.0)).epsilon(0.05));
}

TEST_CASE("bisection certifies a flat endpoint at sigma = 1.5") {
    // Close to the regime boundary the endpoint value is small but still
    // pins down; the certified value agrees with an independent forward
    // sweep of center starts to 4 digits.
    const Params prm = derive_exponents(3.0, 2.0, 1.5);
    const GoodProfile gp = bisect_eta(prm, {2.0, 5.0}, dense(), 1e-6);
    CHECK(gp.kind == ProfileKind::P1);
    CHECK(gp.eta0 == doctest::Approx(2.94283).epsilon(1e-4));
    REQUIRE(gp.a0.has_value());
    CHECK(*gp.a0 == doctest::Approx(0.05721).epsilon(0.02));
    check_profile_shape(gp);
}

// ---- vanishing limits ---------------------------------------------------

TEST_CASE("bisection certifies a steep vanishing head at sigma = 5") {
    const Params prm = derive_exponents(3.0, 2.0, 5.0);
    const GoodProfile gp = bisect_eta(prm, {1.4, 2.5}, dense(), 1e-6);
    CHECK(gp.kind == ProfileKind::P2Case2);
    CHECK(gp.eta0 == doctest::Approx(1.807771).epsilon(1e-4));
    REQUIRE(gp.a0.has_value());
    CHECK(*gp.a0 == 0.0);
    CHECK(gp.shot.fitted_exponent ==
          doctest::Approx(prm.case2_exponent()).epsilon(0.05));
    CHECK(prm.case2_exponent() == doctest::Approx(7.0));
    check_profile_shape(gp);
    // the sampled head follows the steep law, not the parabolic one
    const double slope =
        fit_log_slope(gp.samples, gp.samples.front().xi, 0.05 * gp.eta0);
    CHECK(slope == doctest::Approx(7.0).epsilon(0.02));
}

// ---- the eta scan -------------------------------------------------------

TEST_CASE("scan over eta brackets the single transition") {
    const Params prm = derive_exponents(3.0, 2.0, 1.0);
    const std::vector<double> grid{2.0, 2.8, 3.2, 3.429, 3.44, 3.8, 4.5};
    const EtaScan scan = scan_eta(prm, grid, quiet(), {}, 4);
    REQUIRE(scan.outcomes.size() == grid.size());
    REQUIRE(scan.bracket.has_value());
    CHECK(scan.bracket->first == doctest::Approx(3.429));
    CHECK(scan.bracket->second == doctest::Approx(3.44));
    for (std::size_t i = 0; i < 4; ++i) CHECK(scan.outcomes[i].cls == ShotClass::AMinus);
    // Just above the transition the endpoint lifts with positive slope
    // before genuine interior sign changes take over; both are high-side.
    for (std::size_t i = 4; i < grid.size(); ++i) {
        const ShotClass c = scan.outcomes[i].cls;
        CHECK((c == ShotClass::APlus || c == ShotClass::PositiveSlope));
    }
    CHECK(scan.transitions <= 2);
    // endpoint values decrease toward the transition from the left
    CHECK(*scan.outcomes[0].a0 > *scan.outcomes[3].a0);
}

TEST_CASE("default bracket expansion straddles the transition") {
    const Params prm = derive_exponents(3.0, 2.0, 1.0);
    const auto [lo, hi] = default_bracket(prm, quiet());
    CHECK(lo < 3.4299);
    CHECK(hi > 3.4299);
}

// ---- error paths --------------------------------------------------------

TEST_CASE("bisection validates its bracket and inputs") {
    const Params prm = derive_exponents(3.0, 2.0, 1.0);
    CHECK_THROWS_AS(bisect_eta(prm, {4.0, 5.0}, quiet(), 1e-6), BracketError);
    CHECK_THROWS_AS(bisect_eta(prm, {1.0, 2.0}, quiet(), 1e-6), BracketError);
    CHECK_THROWS_AS(bisect_eta(prm, {3.0, 5.0}, quiet(), 0.0), DomainError);
    CHECK_THROWS_AS(bisect_eta(prm, {-1.0, 5.0}, quiet(), 1e-6), BracketError);
    CHECK_THROWS_AS(shoot_from_interface(prm, 0.0, quiet()), DomainError);
}

TEST_CASE("scan rejects a non-ascending grid") {
    const Params prm = derive_exponents(3.0, 2.0, 1.0);
    CHECK_THROWS_AS(scan_eta(prm, {3.0, 2.0}, quiet()), DomainError);
    CHECK_THROWS_AS(scan_eta(prm, {-1.0, 2.0}, quiet()), DomainError);
}

}  // TEST_SUITE
