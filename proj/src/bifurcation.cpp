#include "selfsim/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "selfsim/util.hpp"

namespace selfsim {

namespace {

constexpr double kBandFloor = 1e-9;

// Candidate critical orbit: the run whose armed approach to the interface
// line is the closest seen so far.
struct Graze {
    double dist = std::numeric_limits<double>::max();
    double sigma = 0.0;
    std::size_t idx = 0;
    ClassifiedOrbit orbit;
};

void track_graze(Graze& g, const Params& prm, const ClassifiedOrbit& co) {
    const auto [d, i] = closest_interface_approach(prm, co.trace);
    if (d < g.dist) g = {d, prm.sigma, i, co};
}

// Classification that always resolves a side when one is resolvable: a
// detection-band hit is re-run at tighter bands until the orbit commits to
// the tail or the sign change.  The deepest in-band run is kept; when no
// band resolves, `final` carries the unresolvable run.
struct Resolved {
    ClassifiedOrbit final;
    std::optional<ClassifiedOrbit> band_hit;
    Graze graze;
};

Resolved resolve_side(const Params& prm, const IntegrationConfig& cfg,
                      const OrbitsConfig& base) {
    Resolved r;
    ClassifiedOrbit cm = classify_from_P2(prm, cfg, base);
    track_graze(r.graze, prm, cm);
    OrbitsConfig tight = base;
    while (cm.cls.tag == TerminalTag::EntersP1 && tight.p1_band > kBandFloor) {
        r.band_hit = cm;
        tight.p1_band /= 10.0;
        cm = classify_from_P2(prm, cfg, tight);
        track_graze(r.graze, prm, cm);
    }
    r.final = cm;
    return r;
}

// Builds the exported profile from the grazing orbit: samples up to the
// closest-approach state, interface estimate from its xi, and the head law
// carried by the steep-saddle start.
GoodProfile make_critical_profile(const Params& prm, const Graze& g, int iterations,
                                  std::pair<double, double> sigma_bracket) {
    GoodProfile gp;
    gp.params = prm;
    gp.kind = ProfileKind::P2Case1;
    gp.a0 = 0.0;
    gp.iterations = iterations;

    const OrbitTrace& tr = g.orbit.trace;
    double eta = 0.0;
    if (g.orbit.cls.tag == TerminalTag::EntersP1 && g.orbit.cls.detail) {
        eta = *g.orbit.cls.detail;
    } else if (g.idx < tr.states.size()) {
        eta = std::exp(tr.states[g.idx].logxi);
    }
    gp.eta0 = eta;
    for (const ProfileSample& s : tr.profile) {
        if (s.xi > eta) break;  // drop any post-graze continuation
        gp.samples.push_back(s);
    }

    gp.shot.eta = eta;
    gp.shot.cls = ShotClass::GoodP2Case2;  // steep-saddle head
    gp.shot.a0 = 0.0;
    gp.shot.x_limit = prm.x_p2();
    gp.shot.fitted_exponent = 2.0 / (prm.m - 1.0);
    gp.shot.trace = tr;
    gp.bracket = sigma_bracket;  // the certifying bracket lives in sigma
    return gp;
}

}  // namespace

BifurcationResult find_sigma_star(double m, double p, const IntegrationConfig& cfg,
                                  const BifurcationConfig& bcfg) {
    if (!(bcfg.tol > 0.0)) throw DomainError("tol must be > 0");
    if (!(bcfg.cert_band > 0.0)) throw DomainError("cert_band must be > 0");
    double lo = bcfg.bracket0.first, hi = bcfg.bracket0.second;
    if (!(lo > 0.0) || !(hi > lo)) throw DomainError("need 0 < sigma_lo < sigma_hi");

    auto classify = [&](double sigma, const OrbitsConfig& ocfg) {
        return classify_from_P2(derive_exponents(m, p, sigma), cfg, ocfg);
    };

    Graze graze;

    // Endpoint certification with geometric expansion.
    ClassifiedOrbit co_lo = classify(lo, bcfg.orbits);
    while (co_lo.cls.tag != TerminalTag::EntersPGamma0 && lo > 1.0 / bcfg.expand_cap) {
        lo = std::max(lo / 2.0, 1.0 / bcfg.expand_cap);
        co_lo = classify(lo, bcfg.orbits);
    }
    ClassifiedOrbit co_hi = classify(hi, bcfg.orbits);
    while (co_hi.cls.tag != TerminalTag::EntersQ3 && hi < bcfg.expand_cap) {
        hi = std::min(hi * 2.0, bcfg.expand_cap);
        co_hi = classify(hi, bcfg.orbits);
    }
    if (co_lo.cls.tag != TerminalTag::EntersPGamma0 || co_hi.cls.tag != TerminalTag::EntersQ3) {
        std::ostringstream msg;
        msg << "endpoints do not bracket the fate flip: sigma = " << lo << " -> "
            << terminal_tag_name(co_lo.cls.tag) << ", sigma = " << hi << " -> "
            << terminal_tag_name(co_hi.cls.tag);
        throw BracketError(msg.str());
    }
    track_graze(graze, derive_exponents(m, p, lo), co_lo);
    track_graze(graze, derive_exponents(m, p, hi), co_hi);

    int iterations = 0;
    bool collapsed = false;
    double collapsed_at = 0.0;
    while (hi - lo > bcfg.tol && iterations < bcfg.max_iter && !collapsed) {
        ++iterations;
        const double mid = 0.5 * (lo + hi);
        const Params pmid = derive_exponents(m, p, mid);
        Resolved r = resolve_side(pmid, cfg, bcfg.orbits);

        switch (r.final.cls.tag) {
            case TerminalTag::EntersPGamma0:
                lo = mid;
                co_lo = r.final;
                break;
            case TerminalTag::EntersQ3:
                hi = mid;
                co_hi = r.final;
                break;
            case TerminalTag::EntersP1:
                // still in band at the band floor
                collapsed = true;
                collapsed_at = mid;
                r.graze.orbit = r.final;
                break;
            default:
                if (r.band_hit) {
                    // unresolvable under the band, but a detector hit stands:
                    // the connection at working precision
                    collapsed = true;
                    collapsed_at = mid;
                    r.graze.orbit = *r.band_hit;
                } else if (r.graze.dist <= bcfg.cert_band) {
                    // passed inside the certification band, then crept along
                    // the axis past the resolution budget
                    collapsed = true;
                    collapsed_at = mid;
                } else {
                    std::ostringstream msg;
                    msg << "midpoint sigma = " << mid << " resolved to neither side ("
                        << terminal_tag_name(r.final.cls.tag) << ") with bracket (" << lo
                        << ", " << hi << ") still wider than tol = " << bcfg.tol
                        << "; closest interface approach " << r.graze.dist;
                    throw CertificationFailure(msg.str());
                }
        }
        if (collapsed || r.graze.dist < graze.dist) graze = r.graze;
    }

    BifurcationResult res;
    res.sigma_star = collapsed ? collapsed_at : 0.5 * (lo + hi);
    res.bracket = {lo, hi};
    res.iterations = iterations;
    res.params = derive_exponents(m, p, res.sigma_star);

    // Re-verify the endpoint certificates at a tenth of the tolerances.  A
    // tightened run may shift a near-critical endpoint into the detection
    // band; resolve_side settles it the same way the midpoints are settled.
    IntegrationConfig tight_cfg = cfg;
    tight_cfg.rel_tol /= 10.0;
    tight_cfg.abs_tol /= 10.0;
    tight_cfg.record_dense = false;
    const Resolved r_lo = resolve_side(derive_exponents(m, p, lo), tight_cfg, bcfg.orbits);
    const Resolved r_hi = resolve_side(derive_exponents(m, p, hi), tight_cfg, bcfg.orbits);
    if (r_lo.final.cls.tag != TerminalTag::EntersPGamma0 ||
        r_hi.final.cls.tag != TerminalTag::EntersQ3) {
        std::ostringstream msg;
        msg << "endpoint certificates failed re-verification at tightened tolerance: sigma = "
            << lo << " -> " << terminal_tag_name(r_lo.final.cls.tag) << ", sigma = " << hi
            << " -> " << terminal_tag_name(r_hi.final.cls.tag);
        throw CertificationFailure(msg.str());
    }
    res.low_certificate = r_lo.final.cls;
    res.high_certificate = r_hi.final.cls;

    // Grazing certificate at the returned midpoint.  The bisection-time
    // closest approach is kept when the midpoint run does not improve it.
    if (!collapsed) {
        const Params pstar = res.params;
        OrbitsConfig cert = bcfg.orbits;
        cert.p1_band = bcfg.cert_band;
        ClassifiedOrbit cs = classify_from_P2(pstar, cfg, cert);
        track_graze(graze, pstar, cs);
    }
    if (graze.dist > bcfg.cert_band) {
        std::ostringstream msg;
        msg << "no orbit approached the interface line within the certification band "
            << bcfg.cert_band << "; closest approach " << graze.dist << " at sigma = "
            << graze.sigma;
        throw CertificationFailure(msg.str());
    }
    res.grazing_distance = graze.dist;
    res.critical_profile =
        make_critical_profile(derive_exponents(m, p, graze.sigma), graze, iterations, res.bracket);
    return res;
}

RegimeMap regime_map(double m, double p, const std::vector<double>& sigma_grid,
                     const IntegrationConfig& cfg, const BifurcationConfig& bcfg, int jobs) {
    if (sigma_grid.empty()) throw DomainError("sigma grid must be nonempty");
    for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
        if (!(sigma_grid[i] > 0.0)) throw DomainError("sigma grid must be positive");
        if (i && !(sigma_grid[i] > sigma_grid[i - 1]))
            throw DomainError("sigma grid must be strictly ascending");
    }

    RegimeMap map;
    map.m = m;
    map.p = p;
    map.rows.resize(sigma_grid.size());

    // Fixed k survey per sigma; 12 points across four decades is enough to
    // witness a tail member and a fate flip wherever they exist.
    std::vector<double> ks(12);
    for (std::size_t i = 0; i < ks.size(); ++i)
        ks[i] = 1e-2 * std::pow(1e4, static_cast<double>(i) / static_cast<double>(ks.size() - 1));

    run_parallel(sigma_grid.size(), jobs, [&](std::size_t i) {
        RegimeRow& row = map.rows[i];
        row.sigma = sigma_grid[i];
        try {
            const Params prm = derive_exponents(m, p, row.sigma);
            IntegrationConfig quiet = cfg;
            quiet.record_dense = false;

            row.p2_class = classify_from_P2(prm, quiet, bcfg.orbits).cls;

            const FamilyScan fs = scan_family(prm, ks, quiet, bcfg.orbits, 1);
            row.family_has_flip = !fs.b0_brackets.empty();
            for (const TerminalClass& c : fs.classes)
                if (c.tag == TerminalTag::EntersPGamma0) {
                    row.family_has_tail = true;
                    break;
                }

            const std::pair<double, double> br = default_bracket(prm, quiet);
            row.profile_kind = bisect_eta(prm, br, quiet, bcfg.eta_tol).kind;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    for (const RegimeRow& row : map.rows) {
        if (!row.error.empty()) continue;
        if (row.p2_class.tag == TerminalTag::EntersPGamma0) map.sigma_tail_end = row.sigma;
        if (row.family_has_flip && !map.sigma_flip_start) map.sigma_flip_start = row.sigma;
    }
    return map;
}

}  // namespace selfsim
