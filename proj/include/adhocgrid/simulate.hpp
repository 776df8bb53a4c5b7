#pragma once

// Transient simulation of the network ODE with single-load switching events,
// sampling the mixed potential at every accepted integrator step.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adhocgrid/dynamics.hpp"
#include "adhocgrid/network.hpp"
#include "adhocgrid/potential.hpp"

namespace adhocgrid {

struct SwitchingEvent {
    NodeId load = 0;
    double p_before = 0.0;
    double p_after = 0.0;
    double time = 0.0;
};

/// Throws DomainError if the event is a no-op, targets a source, or
/// exceeds the load's p_max_k.
void check_event(const NetworkSpec& spec, const SwitchingEvent& event);

enum class TrajectoryVerdict { ConvergedToSep, LeftTransientDomain, Diverged, TimedOut };

std::string to_string(TrajectoryVerdict verdict);

/// Per accepted step: the potential change computed from the endpoint states
/// and the integral of the analytic dP/dt over the step (composite Simpson on
/// the integrator's dense output).
struct StepCheck {
    std::size_t from = 0;  // index into Trajectory::times
    double delta_p = 0.0;
    double integrated_p_dot = 0.0;
};

struct EventMarker {
    std::size_t index = 0;  // first sample taken with the post-switch powers
    SwitchingEvent event;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SystemState> states;
    std::vector<PotentialSample> potentials;
    std::vector<StepCheck> step_checks;
    std::vector<EventMarker> events;
    TrajectoryVerdict verdict = TrajectoryVerdict::TimedOut;

    const SystemState& final_state() const { return states.back(); }
};

struct IntegrationOptions {
    double rtol = 1e-8;
    double atol = 1e-16;     // on the deviation from x_sep, multiplied by V0
    double max_step = 0.0;   // 0 selects tau_min / 10
    double settle_rate = 1e-8;  // sup-norm of the scaled rhs, in V0 / tau_max
    int settle_steps = 5;
    double sep_tolerance = 1e-6;  // distance to x_sep for ConvergedToSep, in V0
};

/// Incremental simulation: integrate, switch, integrate again. The state is
/// carried across events unchanged; only the power vector jumps.
class Simulation {
public:
    Simulation(const NetworkSpec& spec, SystemState initial, Eigen::VectorXd p, IntegrationOptions options = {});

    /// Integrates until `t_end` or an early exit (leaving the transient
    /// domain, divergence, or settling at x_sep when `stop_when_settled`).
    /// Returns the verdict for the segment, which is also stored in the
    /// trajectory.
    TrajectoryVerdict run_until(double t_end, bool stop_when_settled = false);

    /// Applies `event` at the current time, which must equal event.time up
    /// to rounding; call `run_until(event.time)` first.
    void apply_event(const SwitchingEvent& event);

    const Trajectory& trajectory() const noexcept { return trajectory_; }
    Trajectory release() { return std::move(trajectory_); }
    const Eigen::VectorXd& powers() const noexcept { return dynamics_.powers(); }
    double time() const noexcept { return time_; }
    bool finished() const noexcept { return finished_; }

private:
    void record(const std::vector<double>& x, const std::vector<double>& dx, double t);
    bool near_sep() const;
    void refresh_sep();
    void absolute(const std::vector<double>& y, std::vector<double>& x) const;

    const NetworkSpec* spec_;
    IntegrationOptions options_;
    Dynamics dynamics_;
    BraytonMoser potential_;
    std::vector<double> x_;
    // The integrator advances y = x - origin, with origin = x_sep when it
    // exists, so tolerances act on the deviation from equilibrium.
    std::vector<double> origin_;
    std::vector<double> f_origin_;
    std::vector<double> y_;
    double time_ = 0.0;
    double max_step_ = 0.0;
    std::optional<std::vector<double>> x_sep_;
    std::vector<double> line_resistance_;
    int settled_count_ = 0;
    bool finished_ = false;
    Trajectory trajectory_;
};

/// Integrates from `initial` under constant powers `p` up to `t_end`, or
/// until settled at x_sep when `stop_when_settled`.
Trajectory integrate(const NetworkSpec& spec, const SystemState& initial, const Eigen::VectorXd& p, double t_end,
                     const IntegrationOptions& options = {}, bool stop_when_settled = false);

/// Equilibrium state for `p` (currents from the power flow, time 0).
SystemState equilibrium_state(const NetworkSpec& spec, const Eigen::VectorXd& p);

/// Starts at the equilibrium of the pre-switch powers, applies one event at
/// t = 0 and integrates until settled or `horizon` seconds.
Trajectory simulate_event(const NetworkSpec& spec, const Eigen::VectorXd& p_before, const SwitchingEvent& event,
                          double horizon, const IntegrationOptions& options = {});

struct FuzzCase {
    Eigen::VectorXd p_before;
    SwitchingEvent event;
    bool worst_case_pattern = false;
};

struct FuzzReport {
    std::size_t events = 0;
    std::size_t worst_case_events = 0;
    std::size_t accepted_steps = 0;
    double max_potential_rise = 0.0;    // largest per-step increase of P after an event
    double max_p_dot_mismatch = 0.0;    // relative, see p_dot_mismatch()
    double min_voltage = 0.0;           // over all recorded states
    std::vector<FuzzCase> cases;
};

/// Relative disagreement between the endpoint potential change and the
/// integrated analytic decay rate for one step.
double p_dot_mismatch(const StepCheck& check);

class CertificateViolation : public std::runtime_error {
public:
    CertificateViolation(std::string message, FuzzCase fuzz_case, Trajectory trajectory);
    const FuzzCase& fuzz_case() const noexcept { return case_; }
    const Trajectory& trajectory() const noexcept { return trajectory_; }

private:
    FuzzCase case_;
    Trajectory trajectory_;
};

/// Draws `n_events` admissible single-load switches (about half of them the
/// worst-case pattern: others at P_max - p_max_k, switching load 0 <-> p_max_k),
/// simulates each from equilibrium, and throws CertificateViolation on the
/// first trajectory that does not settle at x_sep, leaves the transient
/// domain, or whose potential rises by more than 1e-9.
/// Throws DomainError if the spec is not certified.
FuzzReport verify_certificate(const NetworkSpec& spec, std::size_t n_events, std::uint64_t seed);

}  // namespace adhocgrid
