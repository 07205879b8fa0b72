#include "selfsim/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "selfsim/util.hpp"

namespace selfsim {

const char* shot_class_name(ShotClass c) {
    switch (c) {
        case ShotClass::AMinus: return "A_MINUS";
        case ShotClass::GoodP1: return "GOOD_P1";
        case ShotClass::GoodP2Case1: return "GOOD_P2_CASE1";
        case ShotClass::GoodP2Case2: return "GOOD_P2_CASE2";
        case ShotClass::APlus: return "A_PLUS";
        case ShotClass::PositiveSlope: return "POSITIVE_SLOPE";
        case ShotClass::Unresolved: return "UNRESOLVED";
    }
    return "?";
}

const char* profile_kind_name(ProfileKind k) {
    switch (k) {
        case ProfileKind::P1: return "P1";
        case ProfileKind::P2Case1: return "P2_CASE1";
        case ProfileKind::P2Case2: return "P2_CASE2";
    }
    return "?";
}

namespace {

// Least-squares slope of log x against log z over trailing states with
// z within `decades` of the endpoint.
double endpoint_slope(const OrbitTrace& tr, double z_end, double decades) {
    const double z_hi = z_end * std::pow(10.0, decades);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (auto it = tr.states.rbegin(); it != tr.states.rend(); ++it) {
        const double z = it->c[2];
        if (z > z_hi) break;
        if (!(it->c[0] > 0.0) || !(z > 0.0)) continue;
        const double lx = std::log(z), ly = std::log(it->c[0]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return 0.0;
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (n * sxy - sx * sy) / denom;
}

// A clean power-law stretch x ~ level * z^q found above the endpoint, with q
// near one of the two admissible head exponents of a vanishing profile.
struct PowerWindow {
    double slope = 0.0;
    double level = 0.0;     // x z^{-q_target} evaluated at the window bottom
    double z_bottom = 0.0;
    double z_top = 0.0;
    int target = 0;         // 1: exponent 2 (X limit), 2: (sigma+2)(m-1)/(m-p)
};

// Slide a decade-wide window over log x vs log z, keeping the deepest one
// whose least-squares fit is straight (small RMS) with slope in band around
// an admissible exponent. The interface region z > 0.6 eta is excluded; data
// below the peel scale excludes itself through the RMS cap.
std::optional<PowerWindow> find_power_window(const OrbitTrace& tr, const Params& prm,
                                             double eta, const ShootingConfig& scfg) {
    const double q2 = (prm.sigma + 2.0) * (prm.m - 1.0) / (prm.m - prm.p);
    std::vector<std::pair<double, double>> pts;  // (log z, log x), ascending
    for (const auto& s : tr.states) {
        const double z = s.c[2], x = s.c[0];
        if (!(z > 0.0) || !(x > 0.0) || z > 0.6 * eta) continue;
        pts.emplace_back(std::log(z), std::log(x));
    }
    std::sort(pts.begin(), pts.end());
    const double span = std::log(10.0) * scfg.window_decades;
    for (std::size_t b = 0; b < pts.size(); ++b) {
        const double l0 = pts[b].first;
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        std::size_t e = b;
        for (; e < pts.size() && pts[e].first <= l0 + span; ++e) {
            sx += pts[e].first;
            sy += pts[e].second;
            sxx += pts[e].first * pts[e].first;
            sxy += pts[e].first * pts[e].second;
        }
        const double n = static_cast<double>(e - b);
        if (e - b < 6 || pts[e - 1].first - l0 < 0.9 * span) continue;
        const double det = n * sxx - sx * sx;
        if (det == 0.0) continue;
        const double slope = (n * sxy - sx * sy) / det;
        const double icept = (sy - slope * sx) / n;
        double ss = 0.0;
        for (std::size_t i = b; i < e; ++i) {
            const double r = pts[i].second - (icept + slope * pts[i].first);
            ss += r * r;
        }
        if (std::sqrt(ss / n) > scfg.window_rms) continue;
        const double d1 = std::abs(slope - 2.0);
        const double d2 = std::abs(slope - q2);
        int target = 0;
        if (d1 <= scfg.window_band && d1 <= d2)
            target = 1;
        else if (d2 <= std::max(scfg.window_band, 0.05 * q2))
            target = 2;
        if (target == 0) continue;
        PowerWindow w;
        w.slope = slope;
        w.target = target;
        w.z_bottom = std::exp(l0);
        w.z_top = std::exp(pts[e - 1].first);
        // Evaluate the level at the fit centroid, where least squares is
        // exact; at the edges the slope error leaks into the level.
        const double qt = target == 1 ? 2.0 : q2;
        w.level = std::exp(sy / n - qt * sx / n);
        return w;  // pts ascend in z, so the first hit is the deepest
    }
    return std::nullopt;
}

void classify(const Params& prm, const ShootingConfig& scfg, ShootOutcome& out) {
    const Event& term = out.trace.terminal;
    const double x_end = term.state.c[0];
    const double y_end = term.state.c[1];
    const double z_end = term.state.c[2];
    out.y0 = y_end;

    switch (term.kind) {
        case EventKind::XiFloor: {
            const double q = endpoint_slope(out.trace, z_end, scfg.fit_decades);
            out.fitted_exponent = q / (prm.m - 1.0);
            out.x_limit = q < 0.5 ? x_end : x_end / (z_end * z_end);
            if (q < 0.5) {
                out.a0 = std::pow(x_end, 1.0 / (prm.m - 1.0));
                if (y_end < -scfg.p1_tol)
                    out.cls = ShotClass::AMinus;
                else if (y_end > scfg.p1_tol)
                    out.cls = ShotClass::PositiveSlope;
                else
                    out.cls = ShotClass::GoodP1;
            } else {
                out.a0 = 0.0;
                const double xp2 = prm.x_p2();
                if (std::abs(out.x_limit - xp2) <= scfg.case_band * xp2)
                    out.cls = ShotClass::GoodP2Case1;
                else if (out.x_limit <= scfg.case_band * xp2)
                    out.cls = ShotClass::GoodP2Case2;
                else
                    out.cls = ShotClass::Unresolved;
            }
            break;
        }
        case EventKind::XZero: {
            // Deep in xi the vanishing head is indistinguishable from a tiny
            // positive endpoint value; fall back to the slope sign there.
            const double z_arm = 100.0 * scfg.xi_floor_factor * out.eta;
            if (z_end >= z_arm || y_end > scfg.p1_tol) {
                out.cls = ShotClass::APlus;
                out.theta = z_end;
            } else if (y_end < -scfg.p1_tol) {
                out.cls = ShotClass::AMinus;
                out.a0 = std::pow(x_end, 1.0 / (prm.m - 1.0));
            } else {
                out.cls = ShotClass::Unresolved;
            }
            break;
        }
        case EventKind::DivergeYPlus:
            // Backward sign changes are transversal in f^m, so y = f^{m-2} f'
            // grows like (xi - theta)^{-1/m} there and diverges first.
            out.cls = ShotClass::APlus;
            out.theta = z_end;
            break;
        default:
            out.cls = ShotClass::Unresolved;
            break;
    }
}

ShootOutcome run_shot(const Params& prm, double eta, const IntegrationConfig& cfg,
                      const ShootingConfig& scfg) {
    const Starter st = make_starter(prm, PointId::InterfaceLine, eta, scfg.delta);
    IntegrationConfig c = cfg;
    c.max_step = std::max(cfg.max_step, scfg.max_step);
    c.max_arc = std::max(cfg.max_arc, scfg.min_arc);
    EventSetup setup;
    setup.record_y_zero = true;
    setup.x_floor = scfg.x_floor;
    setup.xi_floor = scfg.xi_floor_factor * eta;
    ShootOutcome out;
    out.eta = eta;
    out.trace = integrate(prm, st.state, Direction::Reverse, c, setup);
    classify(prm, scfg, out);
    return out;
}

bool a_like(ShotClass c) {
    return c == ShotClass::AMinus || c == ShotClass::GoodP1 ||
           c == ShotClass::PositiveSlope;
}

// Rewrite the endpoint fields of `out` from a certified power-law window.
void apply_window(const Params& prm, const ShootingConfig& scfg, const PowerWindow& w,
                  ShootOutcome& out) {
    out.fitted_exponent = w.slope / (prm.m - 1.0);
    out.a0 = 0.0;
    out.theta.reset();
    if (w.target == 1) {
        out.x_limit = w.level;
        const double xp2 = prm.x_p2();
        out.cls = std::abs(w.level - xp2) <= scfg.case_band * xp2
                      ? ShotClass::GoodP2Case1
                      : ShotClass::Unresolved;
    } else {
        out.x_limit = w.level;
        out.cls = ShotClass::GoodP2Case2;
    }
}

// =========================================================================
// Forward head shots: launch from a pure power head f = c xi^e at a small
// z0 and watch the fate. A profile vanishing at the origin has exactly two
// admissible head laws, and the good one must reproduce the interface
// location found by the backward bisection.
// =========================================================================

struct HeadShot {
    enum Fate { Cross, Tail, Stall } fate = Stall;
    double z_end = 0.0;
    OrbitTrace trace;
};

HeadShot head_shot(const Params& prm, double c, double e, double z0, double z_cap,
                   const IntegrationConfig& cfg, const ShootingConfig& scfg, bool dense) {
    const double f0 = c * std::pow(z0, e);
    PhaseState s;
    s.chart = Chart::Lower;
    s.c = {std::pow(f0, prm.m - 1.0), e * std::pow(f0, prm.m - 1.0) / z0, z0};
    s.logxi = std::log(z0);
    IntegrationConfig ic = cfg;
    ic.record_dense = dense;
    ic.max_step = std::max(cfg.max_step, scfg.max_step);
    ic.max_arc = std::max(cfg.max_arc, scfg.min_arc);
    EventSetup setup;
    setup.x_floor = scfg.x_floor;
    setup.stop_when = [z_cap](double, const PhaseState& st) { return st.c[2] - z_cap; };
    setup.stop_id = -2;
    HeadShot h;
    h.trace = integrate(prm, s, Direction::Forward, ic, setup);
    const Event& t = h.trace.terminal;
    h.z_end = t.state.c[2];
    if (t.kind == EventKind::XZero || t.kind == EventKind::DivergeYMinus)
        h.fate = HeadShot::Cross;
    else if (t.kind == EventKind::EnterBall && t.id == -2)
        h.fate = HeadShot::Tail;  // escaped past the cap without a sign change
    else
        h.fate = h.z_end < 1.5 * z0 ? HeadShot::Stall : HeadShot::Tail;
    return h;
}

// The exponent-2 head has no free parameter: one shot either lands on the
// interface or misses it. Returns the landing miss through z_miss.
std::optional<HeadShot> match_parabolic(const Params& prm, double eta,
                                        const IntegrationConfig& cfg,
                                        const ShootingConfig& scfg, bool dense,
                                        double& z_miss) {
    const double c = std::pow(prm.x_p2(), 1.0 / (prm.m - 1.0));
    HeadShot h = head_shot(prm, c, prm.case1_exponent(), scfg.head_z0_parabolic * eta,
                           2.0 * eta, cfg, scfg, dense);
    z_miss = h.fate == HeadShot::Cross ? std::abs(h.z_end - eta) / eta
                                       : std::numeric_limits<double>::infinity();
    if (z_miss <= scfg.head_match_rel) return h;
    return std::nullopt;
}

// The steep head f = c xi^{(sigma+2)/(m-p)} is a one-parameter family whose
// fate map in c splits into crossing and tail regions; the good head is a
// separatrix between a crossing band and the tail side, and only the
// physical one lands on the interface. Every tail/cross flip of the coarse
// ladder is bisected and tested for the landing match; heavy-head flips
// (where the truncated start has left the head law's validity) miss by a
// factor ~10 of the match tolerance and reject themselves.
std::optional<std::pair<double, HeadShot>> match_steep(const Params& prm, double eta,
                                                       const IntegrationConfig& cfg,
                                                       const ShootingConfig& scfg, bool dense,
                                                       double& best_miss) {
    const double e2 = prm.case2_exponent();
    const double z0 = scfg.head_z0_steep * eta;
    const double z_cap = 2.0 * eta;
    // c range: from heads of height ~10 down to starts resolvable above the
    // x floor.
    const double c_hi = 10.0 / std::pow(z0, e2);
    const double c_lo = std::pow(30.0 * scfg.x_floor, 1.0 / (prm.m - 1.0)) / std::pow(z0, e2);
    best_miss = std::numeric_limits<double>::infinity();
    if (!(c_lo < c_hi)) return std::nullopt;

    auto fate = [&](double c) { return head_shot(prm, c, e2, z0, z_cap, cfg, scfg, false).fate; };
    std::vector<std::pair<double, HeadShot::Fate>> ladder;
    for (double c = c_hi; c >= c_lo; c /= 2.0) ladder.emplace_back(c, fate(c));

    std::optional<std::pair<double, HeadShot>> best;
    for (std::size_t i = 1; i < ladder.size(); ++i) {
        const auto [ca, fa] = ladder[i - 1];
        const auto [cb, fb] = ladder[i];
        if (fa == fb || fa == HeadShot::Stall || fb == HeadShot::Stall) continue;
        double c_cross = fa == HeadShot::Cross ? ca : cb;
        double c_other = fa == HeadShot::Cross ? cb : ca;
        for (int it = 0; it < 45; ++it) {
            const double cm = std::sqrt(c_cross * c_other);
            (fate(cm) == HeadShot::Cross ? c_cross : c_other) = cm;
        }
        HeadShot h = head_shot(prm, c_cross, e2, z0, z_cap, cfg, scfg, dense);
        if (h.fate != HeadShot::Cross) continue;
        const double miss = std::abs(h.z_end - eta) / eta;
        best_miss = std::min(best_miss, miss);
        if (miss <= scfg.head_match_rel && (!best || miss < std::abs(best->second.z_end - eta) / eta))
            best.emplace(c_cross, std::move(h));
    }
    return best;
}

}  // namespace

ShootOutcome shoot_from_interface(const Params& prm, double eta, const IntegrationConfig& cfg,
                                  const ShootingConfig& scfg) {
    if (!(eta > 0.0)) throw DomainError("shooting needs eta > 0");
    ShootOutcome out = run_shot(prm, eta, cfg, scfg);
    if (!scfg.classify_refine) return out;
    if (!a_like(out.cls) && out.cls != ShotClass::APlus) return out;

    // Suspect a noise-dominated endpoint only when a clean window sits well
    // above the endpoint feature (flat-a peel scale, or the sign change).
    const auto wnd = find_power_window(out.trace, prm, eta, scfg);
    if (!wnd) return out;
    const double z_end = out.trace.terminal.state.c[2];
    if (a_like(out.cls)) {
        // Endpoint must have left the window law (flattened) to be suspect.
        const double x_end = out.trace.terminal.state.c[0];
        const double qt = wnd->target == 1 ? 2.0 : wnd->slope;
        const double x_pred = wnd->level * std::pow(z_end, qt);
        if (!(wnd->z_bottom >= 3.0 * z_end) || !(x_end > 3.0 * x_pred)) return out;
    } else {  // APlus: genuine sign changes sit at O(eta), noise ones below the window
        if (!(wnd->z_bottom >= 3.0 * z_end)) return out;
    }

    IntegrationConfig tight = cfg;
    tight.rel_tol = std::max(cfg.rel_tol / 100.0, 1e-13);
    tight.abs_tol = std::max(cfg.abs_tol / 100.0, 1e-16);
    tight.record_dense = false;
    ShootingConfig plain = scfg;
    plain.classify_refine = false;
    const ShootOutcome probe = run_shot(prm, eta, tight, plain);

    bool stable;
    if (a_like(out.cls)) {
        const double x1 = out.trace.terminal.state.c[0];
        const double x2 = probe.trace.terminal.state.c[0];
        stable = probe.cls == out.cls && x1 > 0.0 && x2 > 0.0 &&
                 std::max(x1, x2) <= 1.5 * std::min(x1, x2);
    } else {
        stable = probe.cls == out.cls &&
                 std::abs(probe.trace.terminal.state.c[2] - z_end) <= 0.02 * eta;
    }
    if (stable) return out;

    // Endpoint moved with the tolerance: it is integration noise. Certify the
    // window law instead, preferring the lower-noise probe trace.
    const auto wnd2 = find_power_window(probe.trace, prm, eta, scfg);
    apply_window(prm, scfg, wnd2 ? *wnd2 : *wnd, out);
    return out;
}

namespace {

// Ascending xi, thinned to a plot-friendly size. Backward traces record xi
// descending and are reversed; forward traces copy through.
void fill_samples(GoodProfile& gp, const OrbitTrace& trace, bool backward) {
    const auto& prof = trace.profile;
    const std::size_t stride = std::max<std::size_t>(1, prof.size() / 2000);
    if (backward) {
        for (std::size_t i = prof.size(); i-- > 0;)
            if ((prof.size() - 1 - i) % stride == 0) gp.samples.push_back(prof[i]);
    } else {
        for (std::size_t i = 0; i < prof.size(); ++i)
            if (i % stride == 0) gp.samples.push_back(prof[i]);
    }
}

// Endpoint angle r = |y0| / sqrt(x) of a backward shot.
double endpoint_angle(const ShootOutcome& s) {
    const double x_end = s.trace.terminal.state.c[0];
    return x_end > 0.0 ? std::abs(s.y0) / std::sqrt(x_end)
                       : std::numeric_limits<double>::infinity();
}

}  // namespace

GoodProfile bisect_eta(const Params& prm, std::pair<double, double> bracket,
                       const IntegrationConfig& cfg, double tol_eta,
                       const ShootingConfig& scfg) {
    if (!(tol_eta > 0.0)) throw DomainError("tol_eta must be > 0");
    double lo = bracket.first, hi = bracket.second;
    if (!(lo > 0.0) || !(hi > lo)) throw BracketError("need 0 < eta_lo < eta_hi");

    IntegrationConfig light = cfg;
    light.record_dense = false;  // iteration shots only classify
    ShootingConfig sweep = scfg;
    sweep.classify_refine = false;  // drift across widths decides the kind here
    auto shoot = [&](double eta, const IntegrationConfig& ic, const ShootingConfig& sc) {
        return shoot_from_interface(prm, eta, ic, sc);
    };

    ShootOutcome slo = shoot(lo, light, sweep);
    if (slo.cls != ShotClass::AMinus)
        throw BracketError(std::string("low endpoint classifies ") +
                           shot_class_name(slo.cls) + ", need A_MINUS");
    ShootOutcome shi = shoot(hi, light, sweep);
    if (shi.cls != ShotClass::APlus && shi.cls != ShotClass::PositiveSlope)
        throw BracketError(std::string("high endpoint classifies ") +
                           shot_class_name(shi.cls) + ", need A_PLUS or POSITIVE_SLOPE");

    // The trichotomy at the transition: either a0 pins down (P1 limit with
    // f(0) = a0, f'(0) = 0) or a0 creeps to zero at every resolvable width
    // (P2 limit). The endpoint a at the lo side is recorded per width and
    // certified P1 only when stable across three decades of width; the
    // near-critical peel makes any single shot's a and y0 untrustworthy.
    struct Rec {
        double width, a0, y0;
    };
    std::vector<Rec> recs;
    auto a_of = [&](const ShootOutcome& s) {
        if (s.a0) return *s.a0;
        const double x_end = s.trace.terminal.state.c[0];
        return x_end > 0.0 ? std::pow(x_end, 1.0 / (prm.m - 1.0)) : 0.0;
    };
    recs.push_back({hi - lo, a_of(slo), slo.y0});
    double a0_lo = recs.back().a0, y0_lo = recs.back().y0;

    auto a0_settled = [&]() {
        const Rec& last = recs.back();
        for (auto it = recs.rbegin(); it != recs.rend(); ++it)
            if (it->width >= 1e3 * last.width)
                return std::abs(it->a0 - last.a0) <=
                       std::max(0.02 * std::abs(last.a0), 1e-5);
        return false;
    };

    const double width_floor = 1e-13 * hi;
    int iter = 0;
    const int max_iter = 200;
    auto refine = [&](bool to_floor) {
        while (iter < max_iter && hi - lo > width_floor) {
            if (!to_floor && hi - lo <= tol_eta && a0_settled() &&
                std::abs(y0_lo) <= scfg.p1_tol)
                break;
            const double mid = 0.5 * (lo + hi);
            if (!(mid > lo) || !(mid < hi)) break;
            ShootOutcome sm = shoot(mid, light, sweep);
            if (sm.cls == ShotClass::Unresolved) {
                IntegrationConfig tighter = light;
                tighter.rel_tol /= 10.0;
                tighter.abs_tol /= 10.0;
                sm = shoot(mid, tighter, sweep);
            }
            ++iter;
            bool low_side;
            switch (sm.cls) {
                case ShotClass::AMinus:
                    low_side = true;
                    break;
                case ShotClass::APlus:
                case ShotClass::PositiveSlope:
                    low_side = false;
                    break;
                default:  // inside the y0 band either side; split on the sign
                    low_side = sm.y0 < 0.0;
                    break;
            }
            if (low_side) {
                lo = mid;
                a0_lo = a_of(sm);
                y0_lo = sm.y0;
                recs.push_back({hi - lo, a0_lo, y0_lo});
            } else {
                hi = mid;
            }
        }
    };
    refine(false);

    GoodProfile gp;
    gp.params = prm;
    gp.bracket = {lo, hi};

    const bool try_p1 = a0_settled() && std::abs(y0_lo) <= scfg.p1_tol && a0_lo > 0.0;
    if (try_p1) {
        // Certify: the caller-tolerance shot and a tighter half-offset shot
        // must agree on the endpoint, or the stall was integration noise.
        ShootOutcome certified = shoot(lo, cfg, sweep);
        IntegrationConfig tight = light;
        tight.rel_tol = std::max(cfg.rel_tol / 100.0, 1e-13);
        tight.abs_tol = std::max(cfg.abs_tol / 100.0, 1e-16);
        ShootingConfig half = sweep;
        half.delta = scfg.delta / 2.0;
        const ShootOutcome cross = shoot(lo, tight, half);
        const double a_c = a_of(certified), a_x = a_of(cross);
        if (certified.cls == ShotClass::GoodP1 &&
            std::abs(a_c - a_x) <= std::max(0.02 * a_c, 1e-5) &&
            std::abs(cross.y0) <= 2.0 * scfg.p1_tol &&
            endpoint_angle(certified) <= scfg.angle_lock) {
            gp.eta0 = lo;
            gp.kind = ProfileKind::P1;
            gp.a0 = a_c;
            gp.bracket = {lo, hi};
            gp.iterations = iter;
            fill_samples(gp, certified.trace, true);
            gp.shot = std::move(certified);
            return gp;
        }
        // fall through: a0 stall did not survive the tolerance change
    }

    refine(true);  // P2 path: grind the bracket to the resolution floor

    // Along a P2 transition the backward endpoint never settles: a creeps at
    // every resolvable width while the angle r = |y0| / sqrt(x) locks at a
    // nonzero constant (on a P1 transition it collapses to zero instead).
    // The locked angle admits the P2 limit; the head itself is then
    // certified forward, because below the peel scale the backward data is
    // integration noise at any tolerance.
    ShootOutcome certified = shoot(lo, cfg, sweep);
    IntegrationConfig tight = light;
    tight.rel_tol = std::max(cfg.rel_tol / 100.0, 1e-13);
    tight.abs_tol = std::max(cfg.abs_tol / 100.0, 1e-16);
    ShootingConfig half = sweep;
    half.delta = scfg.delta / 2.0;
    const ShootOutcome cross = shoot(lo, tight, half);
    const double r1 = endpoint_angle(certified), r2 = endpoint_angle(cross);
    if (std::min(r1, r2) < scfg.angle_lock) {
        std::ostringstream msg;
        msg << "no certified limit at eta = " << lo << " on [" << bracket.first << ", "
            << bracket.second << "] after " << iter << " iterations: endpoint neither "
            << "settles (a0 drift " << recs.front().a0 << " -> " << a0_lo
            << ") nor keeps a locked angle (r = " << r1 << " / " << r2 << ")";
        throw AmbiguousLimit(msg.str());
    }

    const bool want_dense = cfg.record_dense;
    double miss1 = 0.0, miss2 = std::numeric_limits<double>::infinity();
    ShotClass sub = ShotClass::GoodP2Case1;
    double x_coeff = prm.x_p2();
    double f_exponent = prm.case1_exponent();
    std::optional<HeadShot> fwd = match_parabolic(prm, lo, cfg, scfg, want_dense, miss1);
    if (!fwd) {
        auto steep = match_steep(prm, lo, cfg, scfg, want_dense, miss2);
        if (steep) {
            sub = ShotClass::GoodP2Case2;
            x_coeff = std::pow(steep->first, prm.m - 1.0);
            f_exponent = prm.case2_exponent();
            fwd = std::move(steep->second);
        }
    }
    if (!fwd) {
        std::ostringstream msg;
        msg << "angle locked (r = " << r1 << ") but no head law lands on the interface at "
            << "eta = " << lo << ": parabolic head misses by " << miss1
            << ", steep family by " << miss2 << " (relative)";
        throw AmbiguousLimit(msg.str());
    }

    // A backward power-law window, when one survives above the peel scale,
    // must agree with the forward head; its fitted slope is then the better
    // exponent estimate.
    const auto wnd = find_power_window(certified.trace, prm, lo, scfg);
    if (wnd && wnd->target != (sub == ShotClass::GoodP2Case1 ? 1 : 2)) {
        std::ostringstream msg;
        msg << "backward head window (exponent target " << wnd->target
            << ") disagrees with the forward-certified head at eta = " << lo;
        throw AmbiguousLimit(msg.str());
    }
    certified.cls = sub;
    certified.a0 = 0.0;
    certified.theta.reset();
    certified.x_limit = wnd ? wnd->level : x_coeff;
    certified.fitted_exponent = wnd ? wnd->slope / (prm.m - 1.0) : f_exponent;

    gp.eta0 = lo;
    gp.kind = sub == ShotClass::GoodP2Case1 ? ProfileKind::P2Case1 : ProfileKind::P2Case2;
    gp.a0 = 0.0;
    gp.bracket = {lo, hi};
    gp.iterations = iter;
    if (want_dense) {
        // The forward orbit starts at its launch scale; below it the head
        // law itself is the profile. Three decades of it, log-spaced.
        const double z0 = fwd->trace.states.front().c[2];
        const double c_f = std::pow(x_coeff, 1.0 / (prm.m - 1.0));
        for (int i = 0; i < 60; ++i) {
            ProfileSample s;
            s.xi = z0 * std::pow(10.0, -3.0 * (1.0 - i / 60.0));
            s.f = c_f * std::pow(s.xi, f_exponent);
            s.df = f_exponent * s.f / s.xi;
            s.fm_prime = prm.m * std::pow(s.f, prm.m - 1.0) * s.df;
            gp.samples.push_back(s);
        }
        fill_samples(gp, fwd->trace, false);
    }
    gp.shot = std::move(certified);
    return gp;
}

EtaScan scan_eta(const Params& prm, const std::vector<double>& grid,
                 const IntegrationConfig& cfg, const ShootingConfig& scfg, int jobs) {
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] > 0.0) || !(grid[i] < grid[i + 1]))
            throw DomainError("eta grid must be positive and ascending");
    if (!grid.empty() && !(grid.back() > 0.0)) throw DomainError("eta grid must be positive");

    EtaScan scan;
    scan.outcomes.resize(grid.size());
    IntegrationConfig light = cfg;
    light.record_dense = false;
    run_parallel(grid.size(), jobs, [&](std::size_t i) {
        scan.outcomes[i] = shoot_from_interface(prm, grid[i], light, scfg);
    });

    for (std::size_t i = 0; i + 1 < scan.outcomes.size(); ++i)
        if (scan.outcomes[i].cls != scan.outcomes[i + 1].cls) ++scan.transitions;
    // Largest A-, then the smallest A+ beyond it.
    std::ptrdiff_t last_minus = -1;
    for (std::size_t i = 0; i < scan.outcomes.size(); ++i)
        if (scan.outcomes[i].cls == ShotClass::AMinus) last_minus = static_cast<std::ptrdiff_t>(i);
    if (last_minus >= 0) {
        for (std::size_t j = static_cast<std::size_t>(last_minus) + 1; j < scan.outcomes.size();
             ++j)
            if (scan.outcomes[j].cls == ShotClass::APlus ||
                scan.outcomes[j].cls == ShotClass::PositiveSlope) {
                scan.bracket = {grid[static_cast<std::size_t>(last_minus)], grid[j]};
                break;
            }
    }
    return scan;
}

std::pair<double, double> default_bracket(const Params& prm, const IntegrationConfig& cfg,
                                          const ShootingConfig& scfg) {
    IntegrationConfig light = cfg;
    light.record_dense = false;
    double lo = 0.1, hi = 20.0;
    bool ok_lo = false, ok_hi = false;
    for (int i = 0; i < 8 && !ok_lo; ++i) {
        if (shoot_from_interface(prm, lo, light, scfg).cls == ShotClass::AMinus)
            ok_lo = true;
        else
            lo /= 2.0;
    }
    for (int i = 0; i < 8 && !ok_hi; ++i) {
        if (shoot_from_interface(prm, hi, light, scfg).cls == ShotClass::APlus)
            ok_hi = true;
        else
            hi *= 2.0;
    }
    if (!ok_lo || !ok_hi)
        throw BracketError("geometric expansion found no A_MINUS / A_PLUS seed bracket");
    return {lo, hi};
}

ProfileSample profile_at_xi(const OrbitTrace& trace, double xi) {
    if (trace.chart != Chart::Lower)
        throw ChartError("profile_at_xi needs a Lower-chart trace");
    if (trace.dense.empty() || trace.states.size() < 2)
        throw OutOfValidity("profile_at_xi needs dense data");
    const bool decreasing = trace.states.back().c[2] < trace.states.front().c[2];
    const double z_first = trace.states.front().c[2];
    const double z_last = trace.states.back().c[2];
    const double z_min = std::min(z_first, z_last), z_max = std::max(z_first, z_last);
    if (!(xi >= z_min) || !(xi <= z_max))
        throw OutOfValidity("xi outside the traced range");

    // Binary search for the bracketing accepted step; z is monotone here.
    std::size_t lo = 0, hi = trace.states.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        const bool left = decreasing ? trace.states[mid].c[2] >= xi
                                     : trace.states[mid].c[2] <= xi;
        (left ? lo : hi) = mid;
    }
    double ta = trace.times[lo], tb = trace.times[hi];
    for (int i = 0; i < 80; ++i) {
        const double tm = 0.5 * (ta + tb);
        const double zm = trace.state_at(tm).c[2];
        const bool left = decreasing ? zm >= xi : zm <= xi;
        (left ? ta : tb) = tm;
    }
    PhaseState s = trace.state_at(0.5 * (ta + tb));
    s.c[2] = xi;  // pin the abscissa; the remaining coords carry the dense error
    return to_profile(trace.params, s);
}

double fit_log_slope(const std::vector<ProfileSample>& samples, double xi_lo, double xi_hi) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (const ProfileSample& s : samples) {
        if (s.xi < xi_lo || s.xi > xi_hi || !(s.f > 0.0) || !(s.xi > 0.0)) continue;
        const double lx = std::log(s.xi), ly = std::log(s.f);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) throw OutOfValidity("fewer than two samples in the fit window");
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw OutOfValidity("degenerate fit window");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace selfsim
