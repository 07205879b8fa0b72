#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "selfsim/phase.hpp"

namespace selfsim {

// =========================================================================
// Adaptive embedded Runge-Kutta 5(4) driver over the chart fields, with
// dense output, event localization and passive plane monitors.
// =========================================================================

struct IntegrationConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step = 1.0;
    double init_step = 1e-4;
    double max_arc = 1e6;           // orbit-time budget
    std::size_t max_steps = 2'000'000;
    double attractor_radius = 1e-4;  // must stay below 1e-2
    double divergence_cap = 1e6;
    double event_refine_tol = 1e-10;
    bool record_dense = true;        // keep interpolation data for refine_event
};

enum class EventKind {
    XZero,            // first coordinate falls to the configured floor
    YZero,            // second coordinate crosses zero (profile extremum)
    ZAttainsGamma0,   // third coordinate crosses the tail level 1/(p-1)
    EnterBall,        // state enters a tracked ball (max-norm), field inward
    DivergeYMinus,
    DivergeYPlus,
    DivergeX,
    DivergeZ,
    PlaneCross,       // passive plane monitor crossing
    XiFloor,          // xi dropped to the configured floor (Lower chart)
    ArcBudget,
    StepUnderflow,
    None,
};

const char* event_kind_name(EventKind k);

struct Event {
    EventKind kind = EventKind::None;
    double t = 0.0;
    PhaseState state{};
    int id = -1;  // ball / plane id when applicable
};

struct PlaneSpec {
    int id = 0;
    std::array<double, 3> normal{0.0, 0.0, 0.0};
    double offset = 0.0;  // plane is { normal . c == offset }
    std::function<bool(const std::array<double, 3>&)> region;  // optional patch restriction
};

struct BallSpec {
    int id = 0;
    std::array<double, 3> center{0.0, 0.0, 0.0};
    double radius = 0.0;       // 0: use IntegrationConfig::attractor_radius
    bool terminal = true;
    bool require_inward = true;
};

// Which detectors run for one integration.
struct EventSetup {
    std::vector<BallSpec> balls;
    std::vector<PlaneSpec> planes;
    bool detect_divergence = true;
    bool record_y_zero = false;
    std::optional<double> gamma0_mark;    // enables ZAttainsGamma0 recording
    std::optional<double> x_floor;        // enables terminal XZero
    std::optional<double> xi_floor;       // enables terminal XiFloor (Lower chart)
    // Custom terminal indicator (negative-to-positive crossing stops the run).
    std::function<double(double, const PhaseState&)> stop_when;
    int stop_id = -1;
};

enum class Direction { Forward, Reverse };

// Dense-output coefficients of one accepted step (quartic in the step-local
// variable theta in [0, 1], one polynomial per state component).
struct DenseStep {
    double t0 = 0.0;
    double h = 0.0;
    std::array<std::array<double, 5>, 4> rcont{};
};

struct OrbitTrace {
    Params params;
    Chart chart = Chart::Upper;
    Direction direction = Direction::Forward;
    IntegrationConfig config;
    std::vector<double> times;        // monotone orbit time (always increasing)
    std::vector<PhaseState> states;
    std::vector<ProfileSample> profile;  // empty entries dropped (f-coordinate <= 0)
    std::vector<Event> events;        // passive + terminal, in time order
    Event terminal;                   // ArcBudget when nothing else fired
    std::vector<DenseStep> dense;     // populated when config.record_dense

    PhaseState state_at(double t) const;  // dense evaluation, requires record_dense
};

OrbitTrace integrate(const Params& prm, const PhaseState& start, Direction dir,
                     const IntegrationConfig& cfg, const EventSetup& setup = {});

// Re-localizes the `occurrence`-th sign change of the given indicator kind on
// a recorded trace (requires dense data).  Throws NoSuchEvent when absent.
Event refine_event(const OrbitTrace& trace, EventKind kind, int occurrence = 0,
                   double level = 0.0);

// One fixed-width embedded step (exposed for the convergence-order test).
// Returns the embedded error estimate component-wise in err.
void rk45_step(const std::function<void(const double*, double*)>& f, const double* y0,
               double h, std::size_t n, double* y1, double* err);

}  // namespace selfsim
