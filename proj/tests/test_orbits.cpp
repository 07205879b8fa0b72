#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "selfsim/orbits.hpp"

using namespace selfsim;

namespace {

IntegrationConfig quiet() {
    IntegrationConfig cfg;
    cfg.record_dense = false;
    return cfg;
}

// Max of the second coordinate over the recorded states.
double max_y(const OrbitTrace& tr) {
    double best = -1e300;
    for (const PhaseState& s : tr.states) best = std::max(best, s.c[1]);
    return best;
}

// Number of recorded crossings of the plane {Y = -Y0} (passive plane id 2).
int y0_crossings(const OrbitTrace& tr) {
    int n = 0;
    for (const Event& e : tr.events)
        if (e.kind == EventKind::PlaneCross && e.id == 2) ++n;
    return n;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> ks(n);
    for (std::size_t i = 0; i < n; ++i)
        ks[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    return ks;
}

}  // namespace

TEST_SUITE("orbits") {

// ---- forward classification of the steep-saddle orbit ------------------

TEST_CASE("small sigma sends the saddle orbit to the constant tail") {
    const Params prm = derive_exponents(3.0, 1.5, 1.5);
    const ClassifiedOrbit co = classify_from_P2(prm, quiet());
    CHECK(co.cls.tag == TerminalTag::EntersPGamma0);

    const Params prm2 = derive_exponents(3.0, 2.0, 1.0);
    CHECK(classify_from_P2(prm2, quiet()).cls.tag == TerminalTag::EntersPGamma0);
}

TEST_CASE("large sigma drives the saddle orbit through a sign change") {
    const Params prm = derive_exponents(3.0, 1.5, 3.0);
    IntegrationConfig cfg;  // dense: the profile shape is inspected below
    const ClassifiedOrbit co = classify_from_P2(prm, cfg);
    CHECK(co.cls.tag == TerminalTag::EntersQ3);
    REQUIRE(co.cls.detail.has_value());
    // crossing location, frozen from a converged run
    CHECK(*co.cls.detail == doctest::Approx(1.86552).epsilon(1e-3));

    // the profile rises, turns over, and vanishes with steep negative slope
    REQUIRE(co.trace.profile.size() >= 100);
    double fmax = 0.0;
    for (const ProfileSample& s : co.trace.profile) fmax = std::max(fmax, s.f);
    CHECK(fmax == doctest::Approx(0.3207).epsilon(5e-3));
    const ProfileSample& last = co.trace.profile.back();
    CHECK(last.f <= 1e-6);
    CHECK(last.df < -1e3);
    CHECK(last.xi == doctest::Approx(*co.cls.detail).epsilon(1e-6));

    const Params prm2 = derive_exponents(3.0, 2.0, 2.0);
    CHECK(classify_from_P2(prm2, quiet()).cls.tag == TerminalTag::EntersQ3);
}

TEST_CASE("near the fate flip the orbit lands in the interface band") {
    const Params prm = derive_exponents(3.0, 1.5, 2.3218);
    OrbitsConfig ocfg;
    ocfg.p1_band = 5e-3;  // four-digit sigma: closest approach is ~1.7e-3
    const ClassifiedOrbit co = classify_from_P2(prm, quiet(), ocfg);
    CHECK(co.cls.tag == TerminalTag::EntersP1);
    REQUIRE(co.cls.detail.has_value());
    CHECK(*co.cls.detail == doctest::Approx(2.0603).epsilon(5e-3));
    CHECK(co.trace.terminal.kind == EventKind::EnterBall);
}

// ---- trace-level monitors ----------------------------------------------

TEST_CASE("recorded orbits respect the vertical velocity ceiling") {
    // Y stays below alpha/m everywhere; the {Y = -Y0} plane is crossed at
    // most once (no re-entry into the positive-slope region).
    {
        const Params prm = derive_exponents(3.0, 1.5, 3.0);
        const ClassifiedOrbit co = classify_from_P2(prm, quiet());
        CHECK(max_y(co.trace) <= prm.alpha / prm.m + 1e-9);
        CHECK(y0_crossings(co.trace) == 1);
    }
    {
        const Params prm = derive_exponents(3.0, 2.0, 5.0);
        const ClassifiedOrbit co = classify_from_P0(prm, 1.0, quiet());
        CHECK(co.cls.tag == TerminalTag::EntersQ3);
        CHECK(max_y(co.trace) <= prm.alpha / prm.m + 1e-9);
        CHECK(y0_crossings(co.trace) == 1);
    }
}

// ---- homogeneous medium ------------------------------------------------

TEST_CASE("zero sigma sends every family member to the constant tail") {
    const Params prm = derive_exponents(3.0, 2.0, 0.0, Allow::sigma_zero);
    IntegrationConfig cfg;
    for (double k : {1e-3, 1.0, 1e3}) {
        const ClassifiedOrbit co = classify_from_P0(prm, k, cfg);
        CHECK(co.cls.tag == TerminalTag::EntersPGamma0);
        REQUIRE(!co.trace.profile.empty());
        // profile limit is gamma0^(1/(p-1)) = 1 for every k
        CHECK(std::abs(co.trace.profile.back().f - 1.0) <= 1e-3);
    }
}

// ---- family scan and bracket refinement --------------------------------

TEST_CASE("family scan flips exactly once from sign change to tail") {
    const Params prm = derive_exponents(3.0, 2.0, 5.0);
    const FamilyScan fs = scan_family(prm, log_grid(1e-2, 1e3, 16), quiet(), {}, 2);
    REQUIRE(fs.ks.size() == 16);
    REQUIRE(fs.classes.size() == 16);
    CHECK(fs.classes.front().tag == TerminalTag::EntersQ3);
    CHECK(fs.classes.back().tag == TerminalTag::EntersPGamma0);
    REQUIRE(fs.b0_brackets.size() == 1);
    CHECK(fs.b0_brackets[0].first < 10.76);
    CHECK(fs.b0_brackets[0].second > 10.76);
}

TEST_CASE("bracket refinement pins the critical family member") {
    const Params prm = derive_exponents(3.0, 2.0, 5.0);
    const FamilyBand fb = refine_family_bracket(prm, {8.0, 16.0}, quiet(), 1e-10);
    CHECK(fb.iterations >= 3);
    CHECK(fb.tail_side.cls.tag == TerminalTag::EntersPGamma0);
    CHECK(fb.cross_side.cls.tag == TerminalTag::EntersQ3);
    CHECK(fb.bracket.first < fb.bracket.second);

    // frozen critical parameter: geometric midpoint of the final bracket
    const double k_star = std::sqrt(fb.bracket.first * fb.bracket.second);
    CHECK(fb.bracket.first < 10.7604);
    CHECK(fb.bracket.second > 10.7604);
    CHECK(k_star == doctest::Approx(10.7604).epsilon(1e-2));

    // the critical member grazes the interface line; its entry location
    // matches the interface position of the steep-head good profile
    REQUIRE(fb.critical.has_value());
    CHECK(fb.critical->cls.tag == TerminalTag::EntersP1);
    REQUIRE(fb.critical->cls.detail.has_value());
    CHECK(*fb.critical->cls.detail == doctest::Approx(1.80777).epsilon(2e-3));

    // head coefficient consistency: c = k^(-1/(m-p)) for m - p = 1
    CHECK(1.0 / k_star == doctest::Approx(0.0934).epsilon(1e-2));
}

TEST_CASE("bracket endpoints with equal fates are rejected") {
    const Params prm = derive_exponents(3.0, 2.0, 5.0);
    CHECK_THROWS_AS(refine_family_bracket(prm, {1.0, 2.0}, quiet(), 1e-6), BracketError);
}

TEST_CASE("nonpositive family parameters are rejected") {
    const Params prm = derive_exponents(3.0, 2.0, 5.0);
    CHECK_THROWS_AS(classify_from_P0(prm, 0.0, quiet()), BadFamilyParam);
    CHECK_THROWS_AS(classify_from_P0(prm, -2.0, quiet()), BadFamilyParam);
    CHECK_THROWS_AS(scan_family(prm, {1.0, -1.0}, quiet()), BadFamilyParam);
}

TEST_CASE("default family grid is log uniform across eight decades") {
    const std::vector<double> ks = default_k_grid();
    REQUIRE(ks.size() == 64);
    CHECK(ks.front() == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(ks.back() == doctest::Approx(1e4).epsilon(1e-12));
    const double ratio = ks[1] / ks[0];
    for (std::size_t i = 2; i < ks.size(); ++i)
        CHECK(ks[i] / ks[i - 1] == doctest::Approx(ratio).epsilon(1e-10));
}

// ---- planar connection on {Z = 0} --------------------------------------

TEST_CASE("planar connection from the origin saddle reaches the stable node") {
    for (auto [m, p, sg] : {std::array<double, 3>{3.0, 2.0, 1.0},
                            std::array<double, 3>{2.0, 1.5, 3.0}}) {
        const Params prm = derive_exponents(m, p, sg);
        const OrbitTrace tr = check_Z0_connection(prm, quiet());
        CHECK(tr.terminal.kind == EventKind::EnterBall);
        const PhaseState& end = tr.terminal.state;
        CHECK(std::abs(end.c[0] - prm.x_p2()) <= 2e-4);
        CHECK(std::abs(end.c[1] - prm.y_p2()) <= 2e-4);
        // trapping region: above the chord, below the dY/dX = 0 curve
        for (const PhaseState& s : tr.states) {
            const double g1 = (prm.m - 1.0) * s.c[1] - 2.0 * s.c[0];
            const double g2 = -prm.m * s.c[1] * s.c[1] - prm.beta * s.c[1] +
                              prm.alpha * s.c[0] - prm.m * s.c[0] * s.c[1];
            CHECK(g1 >= -1e-9);
            CHECK(g2 >= -1e-9);
        }
    }
}

// ---- barrier planes ----------------------------------------------------

TEST_CASE("barrier planes deflect the flow outward where they apply") {
    // plane 2 holds from moderate sigma on; plane 1 needs sigma large
    CHECK(barrier_plane_min_flow(derive_exponents(3.0, 2.0, 5.0), 2) > 0.0);
    CHECK(barrier_plane_min_flow(derive_exponents(3.0, 2.0, 30.0), 2) > 0.0);
    CHECK(barrier_plane_min_flow(derive_exponents(3.0, 2.0, 30.0), 1) > 0.0);
    CHECK(barrier_plane_min_flow(derive_exponents(2.0, 1.5, 30.0), 1) > 0.0);
    CHECK(barrier_plane_min_flow(derive_exponents(4.0, 2.0, 40.0), 1) > 0.0);
}

TEST_CASE("bad barrier requests are rejected") {
    const Params prm = derive_exponents(3.0, 2.0, 5.0);
    CHECK_THROWS_AS(barrier_plane_min_flow(prm, 3), DomainError);
    CHECK_THROWS_AS(barrier_plane_min_flow(prm, 1, 1), DomainError);
}

}  // TEST_SUITE
