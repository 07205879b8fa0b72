#include "selfsim/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "selfsim/util.hpp"

namespace selfsim {

const char* terminal_tag_name(TerminalTag t) {
    switch (t) {
        case TerminalTag::EntersPGamma0: return "ENTERS_PGAMMA0";
        case TerminalTag::EntersP1: return "ENTERS_P1";
        case TerminalTag::EntersQ3: return "ENTERS_Q3";
        case TerminalTag::Q4Diagnostic: return "Q4_DIAGNOSTIC";
        case TerminalTag::Unresolved: return "UNRESOLVED";
    }
    return "?";
}

namespace {

constexpr int kTailBall = 1;
constexpr int kBarrierPlane = 2;
constexpr int kPlaneOne = 3;
constexpr int kPlaneTwo = 4;
constexpr int kP1Stop = 7;
constexpr int kZ0Ball = 9;

struct PlaneConstants {
    double D, E, B, C;
};

PlaneConstants plane_constants(const Params& prm) {
    const double m = prm.m;
    return {2.0 * m * (m + 1.0) * (m + 1.0) / (m - 1.0),
            2.0 * (m + 1.0) / (m - 1.0),
            m * (m - 1.0) / (2.0 * m * m + 5.0 * m + 1.0),
            (2.0 * m + 1.0) * (m - 1.0) / (2.0 * m * (2.0 * m * m + 5.0 * m + 1.0))};
}

// P1 entry indicator: distance of the Lower-chart image to the interface
// line {x = 0, m y + beta z = 0}, armed only once Y has committed to the P1
// level (so the line's z = 0 end, which every starter touches, cannot
// trigger).
double p1_indicator(const Params& prm, const OrbitsConfig& ocfg, const PhaseState& s) {
    const double armed = -prm.beta / (2.0 * prm.m) - s.c[1];
    return std::min(ocfg.p1_band - interface_distance(prm, s), armed);
}

// Tail commitment indicator (see OrbitsConfig): Z past the midpoint level
// with X under the wall-safe cap and Y inside the slaved sliver.  The
// sliver matters: an orbit descending from the high-Z region toward P1 also
// crosses the commit level with shrinking X, but carries Y near -beta/m
// there, far outside the slaved scale O(X).  At sigma = 0 the midpoint
// level degenerates (alpha = gamma0) and the orbit climbs the axis from
// below instead, Y slaved positive; the ascending branch fires close under
// gamma0 so the recorded profile already shows the constant limit.
double tail_indicator(const Params& prm, const OrbitsConfig& ocfg, const PhaseState& s) {
    const double m = prm.m, be = prm.beta, g0 = prm.gamma0();
    const double x_commit = std::min(ocfg.tail_x_cap, be * be / (8.0 * m * g0));
    if (prm.sigma == 0.0) {
        const double z_commit = g0 * (1.0 - 2e-4);
        const double s_cap = 2.0 * (g0 - z_commit) * x_commit / be;
        return std::min({s.c[2] - z_commit, x_commit - s.c[0], s.c[1], s_cap - s.c[1]});
    }
    const double z_commit = 0.5 * (prm.alpha + g0);
    const double s_cap = 2.0 * g0 * x_commit / be;
    return std::min({s.c[2] - z_commit, x_commit - s.c[0], s.c[1] + s_cap, -s.c[1]});
}

}  // namespace

double interface_distance(const Params& prm, const PhaseState& s) {
    const double m = prm.m, be = prm.beta;
    const double xi = std::exp(s.logxi);
    const double x = s.c[0] * xi * xi;
    const double line = (m * s.c[1] + be) * xi;  // m y + beta z at z = xi
    return std::sqrt(x * x + line * line / (m * m + be * be));
}

std::pair<double, std::size_t> closest_interface_approach(const Params& prm,
                                                          const OrbitTrace& tr) {
    double best = std::numeric_limits<double>::max();
    std::size_t idx = tr.states.size();
    const double y_arm = -prm.beta / (2.0 * prm.m);
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        if (tr.states[i].c[1] >= y_arm) continue;
        const double d = interface_distance(prm, tr.states[i]);
        if (d < best) {
            best = d;
            idx = i;
        }
    }
    return {best, idx};
}

namespace {

EventSetup classify_setup(const Params& prm, const OrbitsConfig& ocfg) {
    EventSetup setup;
    setup.detect_divergence = true;
    setup.gamma0_mark = prm.gamma0();

    BallSpec tail;
    tail.id = kTailBall;
    tail.center = {0.0, 0.0, prm.gamma0()};
    setup.balls.push_back(tail);

    // Passive diagnostics: the non-reentry barrier {Y = -Y0} and the two
    // large-sigma deflection planes, all through recorded crossings.
    setup.planes.push_back({kBarrierPlane, {0.0, 1.0, 0.0}, -prm.y0_barrier(), nullptr});
    const PlaneConstants pc = plane_constants(prm);
    setup.planes.push_back({kPlaneOne, {0.0, pc.D, 1.0}, pc.E, nullptr});
    setup.planes.push_back({kPlaneTwo, {1.0, -pc.B, 0.0}, pc.C, nullptr});

    if (ocfg.tail_commit) {
        setup.stop_when = [&prm, ocfg](double, const PhaseState& s) {
            return std::max(p1_indicator(prm, ocfg, s), tail_indicator(prm, ocfg, s));
        };
    } else {
        setup.stop_when = [&prm, ocfg](double, const PhaseState& s) {
            return p1_indicator(prm, ocfg, s);
        };
    }
    setup.stop_id = kP1Stop;
    return setup;
}

// Disambiguates which component of the composite stop fired.  The localized
// state sits on the zero set of exactly one indicator; the other is pushed
// far negative by the Y separation (armed needs Y < -beta/2m, the slaved
// sliver needs Y > -s_cap > -beta/4m).
bool stop_was_tail(const Params& prm, const OrbitsConfig& ocfg, const PhaseState& s) {
    return tail_indicator(prm, ocfg, s) > p1_indicator(prm, ocfg, s);
}

TerminalClass map_terminal(const Params& prm, const OrbitsConfig& ocfg, const OrbitTrace& tr) {
    const Event& t = tr.terminal;
    TerminalClass cls;
    switch (t.kind) {
        case EventKind::EnterBall:
            if (t.id == kTailBall) {
                cls.tag = TerminalTag::EntersPGamma0;
            } else if (t.id == kP1Stop) {
                if (stop_was_tail(prm, ocfg, t.state)) {
                    cls.tag = TerminalTag::EntersPGamma0;
                } else {
                    cls.tag = TerminalTag::EntersP1;
                    cls.detail = std::exp(t.state.logxi);
                }
            }
            break;
        case EventKind::DivergeYMinus:
            cls.tag = TerminalTag::EntersQ3;
            cls.detail = std::exp(t.state.logxi);
            break;
        case EventKind::DivergeZ:
            cls.tag = TerminalTag::Q4Diagnostic;
            break;
        default:
            break;  // Unresolved
    }
    return cls;
}

ClassifiedOrbit run_classify(const Params& prm, const Starter& st, const IntegrationConfig& cfg,
                             const OrbitsConfig& ocfg) {
    IntegrationConfig ic = cfg;
    ic.max_arc = std::max(cfg.max_arc, ocfg.min_arc);
    ic.max_step = std::max(cfg.max_step, ocfg.max_step);
    const EventSetup setup = classify_setup(prm, ocfg);
    ClassifiedOrbit co;
    co.trace = integrate(prm, st.state, Direction::Forward, ic, setup);
    co.cls = map_terminal(prm, ocfg, co.trace);
    if (co.cls.tag == TerminalTag::Unresolved && ocfg.refine_unresolved) {
        IntegrationConfig tight = ic;
        tight.rel_tol /= 10.0;
        tight.abs_tol /= 10.0;
        OrbitTrace probe = integrate(prm, st.state, Direction::Forward, tight, setup);
        const TerminalClass cls = map_terminal(prm, ocfg, probe);
        if (cls.tag != TerminalTag::Unresolved) {
            co.trace = std::move(probe);
            co.cls = cls;
        }
    }
    return co;
}

bool tail_like(TerminalTag t) { return t == TerminalTag::EntersPGamma0; }
bool cross_like(TerminalTag t) { return t == TerminalTag::EntersQ3; }

}  // namespace

ClassifiedOrbit classify_from_P2(const Params& prm, const IntegrationConfig& cfg,
                                 const OrbitsConfig& ocfg) {
    const Starter st = make_starter(prm, PointId::P2, std::nullopt, ocfg.delta);
    return run_classify(prm, st, cfg, ocfg);
}

ClassifiedOrbit classify_from_P0(const Params& prm, double k, const IntegrationConfig& cfg,
                                 const OrbitsConfig& ocfg) {
    if (!(k > 0.0)) throw BadFamilyParam("P0 family parameter k must be > 0");
    const Starter st = make_starter(prm, PointId::P0, k, ocfg.delta);
    return run_classify(prm, st, cfg, ocfg);
}

std::vector<double> default_k_grid() {
    std::vector<double> ks(64);
    for (std::size_t i = 0; i < ks.size(); ++i)
        ks[i] = std::pow(10.0, -4.0 + 8.0 * static_cast<double>(i) / 63.0);
    return ks;
}

FamilyScan scan_family(const Params& prm, const std::vector<double>& k_grid,
                       const IntegrationConfig& cfg, const OrbitsConfig& ocfg, int jobs) {
    for (double k : k_grid)
        if (!(k > 0.0)) throw BadFamilyParam("k grid must be positive");
    FamilyScan scan;
    scan.params = prm;
    scan.ks = k_grid;
    scan.classes.resize(k_grid.size());
    IntegrationConfig light = cfg;
    light.record_dense = false;
    run_parallel(k_grid.size(), jobs, [&](std::size_t i) {
        scan.classes[i] = classify_from_P0(prm, k_grid[i], light, ocfg).cls;
    });
    for (std::size_t i = 0; i + 1 < k_grid.size(); ++i) {
        const TerminalTag a = scan.classes[i].tag, b = scan.classes[i + 1].tag;
        if ((tail_like(a) && cross_like(b)) || (cross_like(a) && tail_like(b)))
            scan.b0_brackets.emplace_back(k_grid[i], k_grid[i + 1]);
    }
    return scan;
}

FamilyBand refine_family_bracket(const Params& prm, std::pair<double, double> bracket,
                                 const IntegrationConfig& cfg, double tol_rel,
                                 const OrbitsConfig& ocfg) {
    if (!(tol_rel > 0.0)) throw DomainError("tol_rel must be > 0");
    double lo = bracket.first, hi = bracket.second;
    if (!(lo > 0.0) || !(hi > lo)) throw BracketError("need 0 < k_lo < k_hi");
    IntegrationConfig light = cfg;
    light.record_dense = false;

    FamilyBand band;
    ClassifiedOrbit a = classify_from_P0(prm, lo, light, ocfg);
    ClassifiedOrbit b = classify_from_P0(prm, hi, light, ocfg);
    const bool lo_tail = tail_like(a.cls.tag);
    if (!((lo_tail && cross_like(b.cls.tag)) || (cross_like(a.cls.tag) && tail_like(b.cls.tag)))) {
        std::ostringstream msg;
        msg << "bracket endpoints classify " << terminal_tag_name(a.cls.tag) << " / "
            << terminal_tag_name(b.cls.tag) << ", need the tail / sign-change dichotomy";
        throw BracketError(msg.str());
    }
    band.tail_side = lo_tail ? std::move(a) : std::move(b);
    band.cross_side = lo_tail ? std::move(b) : std::move(a);

    // A midpoint inside the P1 detection band is re-run with the band
    // tightened tenfold, shrinking the plateau around the critical k.  When
    // tightening runs into the resolution limit (the orbit shadows the
    // equilibrium axis for longer than the budget and stays Unresolved), the
    // deepest in-band run is kept as the certificate and bisection stops;
    // an Unresolved midpoint without in-band evidence also stops it.
    double p1_band = ocfg.p1_band;
    bool done = false;
    while (!done && hi - lo > tol_rel * hi && band.iterations < 200) {
        const double mid = std::sqrt(lo * hi);
        if (!(mid > lo) || !(mid < hi)) break;
        std::optional<ClassifiedOrbit> in_band;
        for (;;) {
            OrbitsConfig oc = ocfg;
            oc.p1_band = p1_band;
            ClassifiedOrbit cm = classify_from_P0(prm, mid, light, oc);
            ++band.iterations;
            if (tail_like(cm.cls.tag)) {
                (lo_tail ? lo : hi) = mid;
                band.tail_side = std::move(cm);
            } else if (cross_like(cm.cls.tag)) {
                (lo_tail ? hi : lo) = mid;
                band.cross_side = std::move(cm);
            } else if (cm.cls.tag == TerminalTag::EntersP1 && p1_band > 1e-9) {
                in_band = std::move(cm);
                p1_band /= 10.0;
                continue;
            } else if (cm.cls.tag == TerminalTag::EntersP1) {
                band.critical = std::move(cm);
                done = true;
            } else {
                if (in_band) band.critical = std::move(in_band);
                done = true;
            }
            break;
        }
    }
    band.bracket = {lo, hi};
    return band;
}

// =========================================================================
// The {Z = 0} planar connection, integrated as a genuine 2D system.
// =========================================================================

OrbitTrace check_Z0_connection(const Params& prm, const IntegrationConfig& cfg,
                               const OrbitsConfig& ocfg) {
    const double m = prm.m, al = prm.alpha, be = prm.beta;
    const double Xp = prm.x_p2(), Yp = prm.y_p2();
    const double radius = cfg.attractor_radius;

    // P0 starter restricted to the plane: the center-manifold correction
    // with Z = 0.
    const double X0 = ocfg.delta;
    const double h = -(m * al * (al + be + 1.0) / (be * be)) * X0 * X0;
    std::array<double, 3> y{X0, (al * X0 + h) / be, 0.0};  // (X, Y, logxi)

    auto field = [&](const double* s, double* out) {
        out[0] = m * s[0] * ((m - 1.0) * s[1] - 2.0 * s[0]);
        out[1] = -m * s[1] * s[1] - be * s[1] + al * s[0] - m * s[0] * s[1];
        out[2] = m * s[0];  // d logxi; carried for completeness
    };

    OrbitTrace tr;
    tr.params = prm;
    tr.chart = Chart::Upper;
    tr.direction = Direction::Forward;
    tr.config = cfg;

    auto push_state = [&](double t) {
        PhaseState s;
        s.chart = Chart::Upper;
        s.c = {y[0], y[1], 0.0};
        s.logxi = y[2];
        tr.times.push_back(t);
        tr.states.push_back(s);
    };

    auto in_ball = [&]() {
        return std::max(std::abs(y[0] - Xp), std::abs(y[1] - Yp)) <= radius;
    };
    auto check_trap = [&](double t) {
        const double g1 = (m - 1.0) * y[1] - 2.0 * y[0];
        const double g2 = -m * y[1] * y[1] - be * y[1] + al * y[0] - m * y[0] * y[1];
        if (g1 < -ocfg.trap_tol || g2 < -ocfg.trap_tol) {
            std::ostringstream msg;
            msg << "planar connection left its trapping region at t = " << t
                << ": chord margin " << g1 << ", slope margin " << g2;
            throw TrapViolation(msg.str());
        }
    };

    double t = 0.0, hstep = cfg.init_step;
    push_state(t);
    check_trap(t);
    const double budget = std::max(cfg.max_arc, ocfg.min_arc);
    while (!in_ball()) {
        if (t >= budget)
            throw TrapViolation("planar connection missed the attractor ball within budget");
        std::array<double, 3> y1{}, err{};
        rk45_step(field, y.data(), hstep, 3, y1.data(), err.data());
        double norm = 0.0;
        for (int i = 0; i < 3; ++i)
            norm = std::max(norm, std::abs(err[i]) /
                                      (cfg.abs_tol + cfg.rel_tol * std::abs(y1[i])));
        if (norm <= 1.0) {
            t += hstep;
            y = y1;
            push_state(t);
            check_trap(t);
        }
        const double scale = norm > 0.0 ? 0.9 * std::pow(norm, -0.2) : 5.0;
        hstep *= std::clamp(scale, 0.2, 5.0);
        hstep = std::min(hstep, cfg.max_step);
    }
    tr.terminal.kind = EventKind::EnterBall;
    tr.terminal.id = kZ0Ball;
    tr.terminal.t = t;
    tr.terminal.state = tr.states.back();
    tr.events.push_back(tr.terminal);
    return tr;
}

double barrier_plane_min_flow(const Params& prm, int which, std::size_t n_grid) {
    if (which != 1 && which != 2) throw DomainError("barrier plane index must be 1 or 2");
    if (n_grid < 2) throw DomainError("need at least a 2x2 patch grid");
    const PlaneConstants pc = plane_constants(prm);
    const double Y0 = prm.y0_barrier(), Yp = prm.y_p2();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_grid; ++i) {
        // open interval in Y: endpoints sit on the patch boundary
        const double fy = (static_cast<double>(i) + 0.5) / static_cast<double>(n_grid);
        const double Y = -Y0 + fy * (Yp + Y0);
        for (std::size_t j = 0; j < n_grid; ++j) {
            const double fj = (static_cast<double>(j) + 0.5) / static_cast<double>(n_grid);
            PhaseState s;
            s.chart = Chart::Upper;
            double dot;
            if (which == 1) {
                // plane {Z = E - D Y}, patch X between the plane2 line and
                // X(P2); normal into {Z > E - D Y}, the side holding the
                // outgoing orbit.
                const double x_lo = pc.B * Y + pc.C;
                if (!(x_lo < prm.x_p2())) continue;
                const double X = x_lo + fj * (prm.x_p2() - x_lo);
                const double Z = pc.E - pc.D * Y;
                if (Z < 0.0) continue;
                s.c = {X, Y, Z};
                const FieldValue f = vector_field(prm, s);
                dot = pc.D * f.f[1] + f.f[2];
            } else {
                // plane {X = B Y + C}, patch Z above the plane1 line up to
                // twice its value at Y = -Y0; normal into {X > B Y + C}.
                const double z_lo = std::max(pc.E - pc.D * Y, 0.0);
                const double z_hi = 2.0 * (pc.E + pc.D * Y0);
                if (!(z_lo < z_hi)) continue;
                const double Z = z_lo + fj * (z_hi - z_lo);
                s.c = {pc.B * Y + pc.C, Y, Z};
                const FieldValue f = vector_field(prm, s);
                dot = f.f[0] - pc.B * f.f[1];
            }
            best = std::min(best, dot);
        }
    }
    return best;
}

}  // namespace selfsim
