#include "selfsim/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace selfsim {

namespace {

// ------------------------------------------------------------------------
// Dormand-Prince 5(4) tableau with the quartic dense-output weights.
// ------------------------------------------------------------------------
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0,
                 A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0,
                 A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0;
constexpr double A71 = 35.0 / 384.0, A73 = 500.0 / 1113.0, A74 = 125.0 / 192.0,
                 A75 = -2187.0 / 6784.0, A76 = 11.0 / 84.0;
constexpr double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0,
                 E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0;
constexpr double D1 = -12715105075.0 / 11282082432.0, D3 = 87487479700.0 / 32700410799.0,
                 D4 = -10690763975.0 / 1880347072.0, D5 = 701980252875.0 / 199316789632.0,
                 D6 = -1453857185.0 / 822651844.0, D7 = 69997945.0 / 29380423.0;

constexpr std::size_t kDim = 4;  // chart coordinates + logxi

struct StageData {
    std::array<std::array<double, kDim>, 7> k{};
    std::array<double, kDim> y1{};
    std::array<double, kDim> err{};
};

template <typename F>
void dopri5_core(const F& f, const double* y0, double h, std::size_t n, StageData& sd) {
    std::array<double, kDim> tmp{};
    auto& k = sd.k;
    f(y0, k[0].data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y0[i] + h * A21 * k[0][i];
    f(tmp.data(), k[1].data());
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y0[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
    f(tmp.data(), k[2].data());
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y0[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
    f(tmp.data(), k[3].data());
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y0[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
    f(tmp.data(), k[4].data());
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y0[i] + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] +
                              A65 * k[4][i]);
    f(tmp.data(), k[5].data());
    for (std::size_t i = 0; i < n; ++i)
        sd.y1[i] = y0[i] + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] +
                                A76 * k[5][i]);
    f(sd.y1.data(), k[6].data());
    for (std::size_t i = 0; i < n; ++i)
        sd.err[i] = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] +
                         E6 * k[5][i] + E7 * k[6][i]);
}

double dense_eval(const DenseStep& ds, int comp, double theta) {
    const auto& r = ds.rcont[comp];
    const double t1 = 1.0 - theta;
    return r[0] + theta * (r[1] + t1 * (r[2] + theta * (r[3] + t1 * r[4])));
}

}  // namespace

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::XZero: return "x-zero";
        case EventKind::YZero: return "y-zero";
        case EventKind::ZAttainsGamma0: return "z-attains-gamma0";
        case EventKind::EnterBall: return "enter-ball";
        case EventKind::DivergeYMinus: return "diverge-y-minus";
        case EventKind::DivergeYPlus: return "diverge-y-plus";
        case EventKind::DivergeX: return "diverge-x";
        case EventKind::DivergeZ: return "diverge-z";
        case EventKind::PlaneCross: return "plane-cross";
        case EventKind::XiFloor: return "xi-floor";
        case EventKind::ArcBudget: return "arc-budget";
        case EventKind::StepUnderflow: return "step-underflow";
        case EventKind::None: return "none";
    }
    return "?";
}

void rk45_step(const std::function<void(const double*, double*)>& f, const double* y0,
               double h, std::size_t n, double* y1, double* err) {
    if (n > kDim) throw DomainError("rk45_step supports up to 4 components");
    StageData sd;
    dopri5_core(f, y0, h, n, sd);
    for (std::size_t i = 0; i < n; ++i) {
        y1[i] = sd.y1[i];
        if (err) err[i] = sd.err[i];
    }
}

// =========================================================================
// Driver internals.
// =========================================================================

namespace {

struct Indicator {
    EventKind kind = EventKind::None;
    int id = -1;
    bool terminal = false;
    std::function<double(double, const PhaseState&)> g;
    double prev = std::numeric_limits<double>::quiet_NaN();
};

PhaseState make_state(Chart chart, const std::array<double, kDim>& y) {
    PhaseState s;
    s.chart = chart;
    s.c = {y[0], y[1], y[2]};
    if (chart == Chart::Lower)
        s.logxi = y[2] > 0.0 ? std::log(y[2]) : -std::numeric_limits<double>::infinity();
    else
        s.logxi = y[3];
    return s;
}

double ball_distance(const std::array<double, 3>& c, const std::array<double, 3>& center) {
    double d = 0.0;
    for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(c[i] - center[i]));
    return d;
}

std::vector<Indicator> build_indicators(const Params& prm, Chart chart,
                                        const IntegrationConfig& cfg, const EventSetup& setup) {
    std::vector<Indicator> out;
    const double cap = cfg.divergence_cap;
    if (setup.detect_divergence) {
        out.push_back({EventKind::DivergeYPlus, -1, true,
                       [cap](double, const PhaseState& s) { return s.c[1] - cap; }, 0});
        out.push_back({EventKind::DivergeYMinus, -1, true,
                       [cap](double, const PhaseState& s) { return -s.c[1] - cap; }, 0});
        out.push_back({EventKind::DivergeX, -1, true,
                       [cap](double, const PhaseState& s) { return s.c[0] - cap; }, 0});
        out.push_back({EventKind::DivergeZ, -1, true,
                       [cap](double, const PhaseState& s) { return s.c[2] - cap; }, 0});
    }
    if (setup.x_floor) {
        const double floor = *setup.x_floor;
        out.push_back({EventKind::XZero, -1, true,
                       [floor](double, const PhaseState& s) { return floor - s.c[0]; }, 0});
    }
    if (setup.xi_floor) {
        const double floor = *setup.xi_floor;
        if (chart != Chart::Lower)
            throw DomainError("xi_floor stop is only meaningful in the Lower chart");
        out.push_back({EventKind::XiFloor, -1, true,
                       [floor](double, const PhaseState& s) { return floor - s.c[2]; }, 0});
    }
    if (setup.record_y_zero) {
        out.push_back({EventKind::YZero, -1, false,
                       [](double, const PhaseState& s) { return s.c[1]; }, 0});
    }
    if (setup.gamma0_mark) {
        const double level = *setup.gamma0_mark;
        out.push_back({EventKind::ZAttainsGamma0, -1, false,
                       [level](double, const PhaseState& s) { return s.c[2] - level; }, 0});
    }
    for (const auto& ball : setup.balls) {
        const double radius = ball.radius > 0.0 ? ball.radius : cfg.attractor_radius;
        BallSpec b = ball;
        out.push_back({EventKind::EnterBall, ball.id, ball.terminal,
                       [b, radius](double, const PhaseState& s) {
                           return radius - ball_distance(s.c, b.center);
                       },
                       0});
    }
    for (const auto& plane : setup.planes) {
        PlaneSpec pl = plane;
        out.push_back({EventKind::PlaneCross, plane.id, false,
                       [pl](double, const PhaseState& s) {
                           if (pl.region && !pl.region(s.c)) return 0.0;
                           return pl.normal[0] * s.c[0] + pl.normal[1] * s.c[1] +
                                  pl.normal[2] * s.c[2] - pl.offset;
                       },
                       0});
    }
    if (setup.stop_when) {
        out.push_back({EventKind::EnterBall, setup.stop_id, true, setup.stop_when, 0});
    }
    (void)prm;
    return out;
}

}  // namespace

PhaseState OrbitTrace::state_at(double t) const {
    if (dense.empty()) throw NoSuchEvent("trace recorded without dense output");
    auto it = std::upper_bound(dense.begin(), dense.end(), t,
                               [](double v, const DenseStep& d) { return v < d.t0; });
    if (it != dense.begin()) --it;
    const DenseStep& ds = *it;
    const double theta = std::clamp(ds.h != 0.0 ? (t - ds.t0) / ds.h : 0.0, 0.0, 1.0);
    std::array<double, kDim> y{};
    for (int i = 0; i < static_cast<int>(kDim); ++i) y[i] = dense_eval(ds, i, theta);
    return make_state(chart, y);
}

OrbitTrace integrate(const Params& prm, const PhaseState& start, Direction dir,
                     const IntegrationConfig& cfg, const EventSetup& setup) {
    const Chart chart = start.chart;
    (void)vector_field(prm, start);  // validates the starting coordinates

    const double sgn = dir == Direction::Forward ? 1.0 : -1.0;
    auto rhs = [&prm, chart, sgn](const double* y, double* dy) {
        const std::array<double, 3> c{y[0], y[1], y[2]};
        const FieldValue fv = vector_field_raw(prm, chart, c);
        dy[0] = sgn * fv.f[0];
        dy[1] = sgn * fv.f[1];
        dy[2] = sgn * fv.f[2];
        dy[3] = chart == Chart::Lower ? 0.0 : sgn * fv.dlogxi;
    };

    OrbitTrace trace;
    trace.params = prm;
    trace.chart = chart;
    trace.direction = dir;
    trace.config = cfg;

    std::array<double, kDim> y{start.c[0], start.c[1], start.c[2],
                               chart == Chart::Lower ? 0.0 : start.logxi};
    double t = 0.0;
    double h = std::min(cfg.init_step, cfg.max_step);

    auto push_state = [&](double tt, const PhaseState& s) {
        trace.times.push_back(tt);
        trace.states.push_back(s);
        if (s.c[0] > 0.0 && (chart == Chart::Lower ? s.c[2] > 0.0 : std::isfinite(s.logxi)))
            trace.profile.push_back(to_profile(prm, s));
    };

    std::vector<Indicator> indicators = build_indicators(prm, chart, cfg, setup);
    {
        const PhaseState s0 = make_state(chart, y);
        push_state(0.0, s0);
        for (auto& ind : indicators) ind.prev = ind.g(0.0, s0);
    }

    auto finish = [&](EventKind kind, double tt, const PhaseState& s, int id) {
        trace.terminal = Event{kind, tt, s, id};
        trace.events.push_back(trace.terminal);
    };

    StageData sd;
    std::size_t steps = 0;
    while (true) {
        if (t >= cfg.max_arc || steps >= cfg.max_steps) {
            finish(EventKind::ArcBudget, t, trace.states.back(), -1);
            break;
        }
        h = std::min({h, cfg.max_step, cfg.max_arc - t});
        const double hmin = 1e-13 * std::max(1.0, std::abs(t));
        if (h < hmin) {
            finish(EventKind::StepUnderflow, t, trace.states.back(), -1);
            break;
        }

        dopri5_core(rhs, y.data(), h, kDim, sd);
        ++steps;

        double err_norm = 0.0;
        bool bad = false;
        for (std::size_t i = 0; i < kDim; ++i) {
            if (!std::isfinite(sd.y1[i])) {
                bad = true;
                break;
            }
            const double scale =
                cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(sd.y1[i]));
            const double q = sd.err[i] / scale;
            err_norm += q * q;
        }
        err_norm = bad ? std::numeric_limits<double>::infinity()
                       : std::sqrt(err_norm / static_cast<double>(kDim));

        if (err_norm > 1.0) {
            const double fac = bad ? 0.1 : std::max(0.1, 0.9 * std::pow(err_norm, -0.2));
            h *= fac;
            continue;
        }

        // Accepted: assemble dense coefficients for this step.
        DenseStep ds;
        ds.t0 = t;
        ds.h = h;
        for (std::size_t i = 0; i < kDim; ++i) {
            const double dy = sd.y1[i] - y[i];
            ds.rcont[i][0] = y[i];
            ds.rcont[i][1] = dy;
            ds.rcont[i][2] = h * sd.k[0][i] - dy;
            ds.rcont[i][3] = dy - h * sd.k[6][i] - ds.rcont[i][2];
            ds.rcont[i][4] = h * (D1 * sd.k[0][i] + D3 * sd.k[2][i] + D4 * sd.k[3][i] +
                                  D5 * sd.k[4][i] + D6 * sd.k[5][i] + D7 * sd.k[6][i]);
        }
        if (cfg.record_dense) trace.dense.push_back(ds);

        const double t1 = t + h;
        const PhaseState s1 = make_state(chart, sd.y1);

        // ----- event detection on [t, t1] -----
        struct Hit {
            double theta;
            Event ev;
            bool terminal;
            std::size_t ind;
        };
        std::vector<Hit> hits;
        for (std::size_t ii = 0; ii < indicators.size(); ++ii) {
            auto& ind = indicators[ii];
            const double gp = ind.prev;
            const double gn = ind.g(t1, s1);
            const bool crossed = (gp < 0.0 && gn >= 0.0) || (gp > 0.0 && gn <= 0.0);
            ind.prev = gn;
            if (!crossed || !std::isfinite(gp)) continue;

            double lo = 0.0, hi = 1.0, glo = gp;
            while ((hi - lo) * h > cfg.event_refine_tol) {
                const double mid = 0.5 * (lo + hi);
                std::array<double, kDim> ym{};
                for (int i = 0; i < static_cast<int>(kDim); ++i) ym[i] = dense_eval(ds, i, mid);
                const double gm = ind.g(t + mid * h, make_state(chart, ym));
                if ((glo < 0.0) == (gm < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            const double theta = 0.5 * (lo + hi);
            std::array<double, kDim> ystar{};
            for (int i = 0; i < static_cast<int>(kDim); ++i) ystar[i] = dense_eval(ds, i, theta);
            const PhaseState sstar = make_state(chart, ystar);
            bool terminal = ind.terminal;
            if (terminal && ind.kind == EventKind::EnterBall && ind.id >= 0) {
                // Secondary confirmation: field must point into the ball.
                const auto ball =
                    std::find_if(setup.balls.begin(), setup.balls.end(),
                                 [&](const BallSpec& b) { return b.id == ind.id; });
                if (ball != setup.balls.end() && ball->require_inward) {
                    const FieldValue fv = vector_field_raw(prm, chart, sstar.c);
                    double dot = 0.0;
                    for (int i = 0; i < 3; ++i)
                        dot += sgn * fv.f[i] * (sstar.c[i] - ball->center[i]);
                    if (dot >= 0.0) terminal = false;
                }
            }
            if (terminal) {
                const auto dv = vector_field_raw(prm, chart, sstar.c);
                // Divergence needs the matching derivative sign; otherwise passive.
                if (ind.kind == EventKind::DivergeYPlus && sgn * dv.f[1] <= 0.0) terminal = false;
                if (ind.kind == EventKind::DivergeYMinus && sgn * dv.f[1] >= 0.0) terminal = false;
                if (ind.kind == EventKind::DivergeX && sgn * dv.f[0] <= 0.0) terminal = false;
                if (ind.kind == EventKind::DivergeZ && sgn * dv.f[2] <= 0.0) terminal = false;
            }
            hits.push_back({theta, Event{ind.kind, t + theta * h, sstar, ind.id}, terminal, ii});
        }
        std::sort(hits.begin(), hits.end(),
                  [](const Hit& a, const Hit& b) { return a.theta < b.theta; });

        bool stopped = false;
        for (const Hit& hit : hits) {
            if (hit.terminal) {
                push_state(hit.ev.t, hit.ev.state);
                trace.terminal = hit.ev;
                trace.events.push_back(hit.ev);
                stopped = true;
                break;
            }
            trace.events.push_back(hit.ev);
        }
        if (stopped) break;

        y = sd.y1;
        t = t1;
        push_state(t, s1);
        h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err_norm, 1e-10), -0.2)));
    }
    return trace;
}

Event refine_event(const OrbitTrace& trace, EventKind kind, int occurrence, double level) {
    if (trace.dense.empty()) throw NoSuchEvent("trace recorded without dense output");

    auto indicator = [&](const PhaseState& s) -> double {
        switch (kind) {
            case EventKind::XZero: return level - s.c[0];
            case EventKind::YZero: return s.c[1] - level;
            case EventKind::ZAttainsGamma0: return s.c[2] - level;
            case EventKind::XiFloor: return level - s.c[2];
            default: throw NoSuchEvent("refine_event supports coordinate-level indicators");
        }
    };

    int seen = 0;
    for (const DenseStep& ds : trace.dense) {
        std::array<double, kDim> ya{}, yb{};
        for (int i = 0; i < static_cast<int>(kDim); ++i) {
            ya[i] = dense_eval(ds, i, 0.0);
            yb[i] = dense_eval(ds, i, 1.0);
        }
        double ga = indicator(make_state(trace.chart, ya));
        const double gb = indicator(make_state(trace.chart, yb));
        if (!((ga < 0.0 && gb >= 0.0) || (ga > 0.0 && gb <= 0.0))) continue;
        if (seen++ != occurrence) continue;

        double lo = 0.0, hi = 1.0;
        while ((hi - lo) * ds.h > trace.config.event_refine_tol) {
            const double mid = 0.5 * (lo + hi);
            std::array<double, kDim> ym{};
            for (int i = 0; i < static_cast<int>(kDim); ++i) ym[i] = dense_eval(ds, i, mid);
            const double gm = indicator(make_state(trace.chart, ym));
            if ((ga < 0.0) == (gm < 0.0)) {
                lo = mid;
                ga = gm;
            } else {
                hi = mid;
            }
        }
        const double theta = 0.5 * (lo + hi);
        std::array<double, kDim> ystar{};
        for (int i = 0; i < static_cast<int>(kDim); ++i) ystar[i] = dense_eval(ds, i, theta);
        return Event{kind, ds.t0 + theta * ds.h, make_state(trace.chart, ystar), -1};
    }
    throw NoSuchEvent(std::string("no crossing of ") + event_kind_name(kind) + " on this trace");
}

}  // namespace selfsim
