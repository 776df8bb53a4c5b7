#include "adhocgrid/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include <boost/numeric/odeint.hpp>

#include "adhocgrid/certify.hpp"
#include "adhocgrid/equilibrium.hpp"
#include "adhocgrid/errors.hpp"

namespace adhocgrid {

namespace ode = boost::numeric::odeint;
using StateVector = std::vector<double>;

void check_event(const NetworkSpec& spec, const SwitchingEvent& event) {
    if (event.load >= spec.num_nodes() || !spec.node(event.load).is_load())
        throw DomainError("switching event targets node " + std::to_string(event.load) + ", which is not a load");
    const double cap = spec.node(event.load).p_max;
    if (event.p_before == event.p_after) throw DomainError("switching event does not change the load power");
    if (event.p_before < 0.0 || event.p_after < 0.0 || event.p_before > cap || event.p_after > cap)
        throw DomainError("switching event powers must lie in [0, " + std::to_string(cap) + "]");
}

std::string to_string(TrajectoryVerdict verdict) {
    switch (verdict) {
        case TrajectoryVerdict::ConvergedToSep: return "ConvergedToSep";
        case TrajectoryVerdict::LeftTransientDomain: return "LeftTransientDomain";
        case TrajectoryVerdict::Diverged: return "Diverged";
        case TrajectoryVerdict::TimedOut: return "TimedOut";
    }
    return "Unknown";
}

Simulation::Simulation(const NetworkSpec& spec, SystemState initial, Eigen::VectorXd p, IntegrationOptions options)
    : spec_(&spec), options_(options), dynamics_(spec, p), potential_(spec, p), time_(initial.time) {
    if (static_cast<std::size_t>(initial.v_loads.size()) != spec.num_loads() ||
        static_cast<std::size_t>(initial.i_lines.size()) != spec.num_lines())
        throw std::invalid_argument("initial state does not match the network dimensions");
    if ((initial.v_loads.array() <= 0.0).any()) throw DomainError("initial load voltages must be positive");
    max_step_ = options_.max_step > 0.0 ? options_.max_step : spec.min_time_constant() / 10.0;
    for (const auto& l : spec.lines()) line_resistance_.push_back(l.resistance);
    x_ = dynamics_.pack(initial);
    refresh_sep();
    StateVector dx(x_.size());
    dynamics_.deviation(origin_, f_origin_, y_, dx);
    record(x_, dx, time_);
}

void Simulation::refresh_sep() {
    try {
        const EquilibriumResult eq = solve_power_flow(*spec_, dynamics_.powers());
        x_sep_ = dynamics_.pack({spec_->restrict_to_loads(eq.v_sep), eq.i_sep, 0.0});
    } catch (const InfeasiblePower&) {
        x_sep_.reset();
    } catch (const NonConvergence&) {
        x_sep_.reset();
    }
    settled_count_ = 0;
    origin_ = x_sep_ ? *x_sep_ : x_;
    f_origin_.assign(x_.size(), 0.0);
    dynamics_(origin_, f_origin_);
    y_.resize(x_.size());
    for (std::size_t j = 0; j < x_.size(); ++j) y_[j] = x_[j] - origin_[j];
}

void Simulation::absolute(const StateVector& y, StateVector& x) const {
    for (std::size_t j = 0; j < y.size(); ++j) x[j] = origin_[j] + y[j];
}

void Simulation::record(const StateVector& x, const StateVector& dx, double t) {
    trajectory_.times.push_back(t);
    trajectory_.states.push_back(dynamics_.unpack(x, t));
    trajectory_.potentials.push_back(potential_.sample(x, dx));
}

bool Simulation::near_sep() const {
    if (!x_sep_) return false;
    const double tol = options_.sep_tolerance * spec_->params().v0;
    const std::size_t ne = dynamics_.num_lines();
    for (std::size_t a = 0; a < ne; ++a)
        if (line_resistance_[a] * std::abs(y_[a]) > tol) return false;
    for (std::size_t k = ne; k < y_.size(); ++k)
        if (std::abs(y_[k]) > tol) return false;
    return true;
}

void Simulation::apply_event(const SwitchingEvent& event) {
    check_event(*spec_, event);
    if (std::abs(event.time - time_) > 1e-9 * std::max(1.0, std::abs(time_)))
        throw std::invalid_argument("event at t=" + std::to_string(event.time) + " but simulation is at t=" +
                                    std::to_string(time_));
    const auto slot = static_cast<Eigen::Index>(*spec_->load_index(event.load));
    Eigen::VectorXd p = dynamics_.powers();
    p[slot] = event.p_after;
    dynamics_.set_powers(p);
    potential_ = BraytonMoser(*spec_, p);
    refresh_sep();
    finished_ = false;

    StateVector dx(x_.size());
    dynamics_.deviation(origin_, f_origin_, y_, dx);
    trajectory_.events.push_back({trajectory_.times.size(), event});
    record(x_, dx, time_);
}

TrajectoryVerdict Simulation::run_until(double t_end, bool stop_when_settled) {
    const auto& g = spec_->params();
    const double v0 = g.v0;
    const double settle = options_.settle_rate * v0 / g.tau_max;
    const double r_max = g.r_max;

    auto finish = [&](TrajectoryVerdict v) {
        trajectory_.verdict = v;
        finished_ = true;
        return v;
    };
    if (finished_ && trajectory_.verdict != TrajectoryVerdict::ConvergedToSep) return trajectory_.verdict;

    auto system = [this](const StateVector& y, StateVector& dy, double) {
        dynamics_.deviation(origin_, f_origin_, y, dy);
    };
    auto stepper = ode::make_dense_output(options_.atol * v0, options_.rtol, max_step_,
                                          ode::runge_kutta_dopri5<StateVector>());
    double dt = std::min(max_step_, std::max(t_end - time_, 0.0));
    if (dt > 0.0) stepper.initialize(y_, time_, dt);

    StateVector dxa(x_.size());
    StateVector dxb(x_.size());
    StateVector xb(x_.size());
    StateVector ym(x_.size());
    StateVector xm(x_.size());
    StateVector dxm(x_.size());
    StateVector step(x_.size());
    system(y_, dxa, time_);

    const double min_dt = 1e-14 * max_step_;
    while (t_end - time_ > 1e-12 * std::max(1.0, std::abs(t_end))) {
        if (stepper.current_time() + stepper.current_time_step() > t_end)
            stepper.initialize(stepper.current_state(), stepper.current_time(), t_end - stepper.current_time());

        std::pair<double, double> span;
        try {
            span = stepper.do_step(system);
        } catch (const DomainError&) {
            // A trial stage reached v <= 0; retry from the last accepted state.
            const double retry = stepper.current_time_step() / 10.0;
            if (retry < min_dt) return finish(TrajectoryVerdict::Diverged);
            stepper.initialize(y_, time_, retry);
            continue;
        } catch (const ode::step_adjustment_error& e) {
            throw StepSizeUnderflow(std::string("integrator could not meet tolerance: ") + e.what());
        }

        const StateVector& yb = stepper.current_state();
        absolute(yb, xb);
        double norm = 0.0;
        bool collapsed = false;
        for (std::size_t a = 0; a < dynamics_.num_lines(); ++a) norm = std::max(norm, r_max * std::abs(xb[a]));
        for (std::size_t k = dynamics_.num_lines(); k < xb.size(); ++k) {
            norm = std::max(norm, std::abs(xb[k]));
            collapsed = collapsed || !(xb[k] > 0.0);
        }
        if (collapsed || !(norm <= 1e6 * v0)) {
            time_ = span.second;
            x_ = xb;
            y_ = yb;
            return finish(TrajectoryVerdict::Diverged);
        }

        system(yb, dxb, span.second);
        try {
            // Composite Simpson on the dense output; four panels keep the
            // quadrature error well below the integrator's own defect.
            constexpr int panels = 4;
            const double h = span.second - span.first;
            double integral = potential_.sample(x_, dxa).p_dot + potential_.sample(xb, dxb).p_dot;
            for (int q = 1; q < panels; ++q) {
                stepper.calc_state(span.first + h * q / panels, ym);
                system(ym, dxm, 0.0);
                absolute(ym, xm);
                integral += (q % 2 ? 4.0 : 2.0) * potential_.sample(xm, dxm).p_dot;
            }
            integral *= h / (3.0 * panels);
            for (std::size_t j = 0; j < step.size(); ++j) step[j] = yb[j] - y_[j];
            trajectory_.step_checks.push_back(
                {trajectory_.times.size() - 1, potential_.increment(x_, dxa, step, dxb), integral});
        } catch (const DomainError&) {
            // Interior sample outside v > 0; the endpoint checks below still apply.
        }

        x_ = xb;
        y_ = yb;
        time_ = span.second;
        std::swap(dxa, dxb);
        record(x_, dxa, time_);

        bool left = false;
        for (std::size_t k = dynamics_.num_lines(); k < x_.size(); ++k) left = left || x_[k] <= g.v_tr;
        if (left) return finish(TrajectoryVerdict::LeftTransientDomain);

        double rate = 0.0;
        for (std::size_t a = 0; a < dynamics_.num_lines(); ++a)
            rate = std::max(rate, line_resistance_[a] * std::abs(dxa[a]));
        for (std::size_t k = dynamics_.num_lines(); k < x_.size(); ++k) rate = std::max(rate, std::abs(dxa[k]));
        settled_count_ = rate < settle ? settled_count_ + 1 : 0;
        if (stop_when_settled && settled_count_ >= options_.settle_steps && near_sep())
            return finish(TrajectoryVerdict::ConvergedToSep);
    }
    time_ = std::max(time_, t_end);
    trajectory_.verdict = near_sep() ? TrajectoryVerdict::ConvergedToSep : TrajectoryVerdict::TimedOut;
    return trajectory_.verdict;
}

Trajectory integrate(const NetworkSpec& spec, const SystemState& initial, const Eigen::VectorXd& p, double t_end,
                     const IntegrationOptions& options, bool stop_when_settled) {
    Simulation sim(spec, initial, p, options);
    sim.run_until(t_end, stop_when_settled);
    return sim.release();
}

SystemState equilibrium_state(const NetworkSpec& spec, const Eigen::VectorXd& p) {
    const EquilibriumResult eq = solve_power_flow(spec, p);
    return {spec.restrict_to_loads(eq.v_sep), eq.i_sep, 0.0};
}

Trajectory simulate_event(const NetworkSpec& spec, const Eigen::VectorXd& p_before, const SwitchingEvent& event,
                          double horizon, const IntegrationOptions& options) {
    check_event(spec, event);
    Eigen::VectorXd p = p_before;
    p[static_cast<Eigen::Index>(*spec.load_index(event.load))] = event.p_before;
    SystemState start = equilibrium_state(spec, p);
    start.time = event.time;
    Simulation sim(spec, start, p, options);
    sim.apply_event(event);
    sim.run_until(event.time + horizon, true);
    return sim.release();
}

double p_dot_mismatch(const StepCheck& check) {
    const double scale = std::max(std::abs(check.delta_p), std::abs(check.integrated_p_dot));
    if (scale == 0.0) return 0.0;
    return std::abs(check.delta_p - check.integrated_p_dot) / scale;
}

CertificateViolation::CertificateViolation(std::string message, FuzzCase fuzz_case, Trajectory trajectory)
    : std::runtime_error(std::move(message)), case_(std::move(fuzz_case)), trajectory_(std::move(trajectory)) {}

namespace {

FuzzCase draw_case(const NetworkSpec& spec, std::mt19937_64& rng, bool worst_case) {
    const auto& g = spec.params();
    const auto& loads = spec.load_nodes();
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::size_t> switchable;
    for (std::size_t j = 0; j < loads.size(); ++j)
        if (spec.node(loads[j]).p_max > 0.0) switchable.push_back(j);
    if (switchable.empty()) throw DomainError("no load can switch: every p_max_k is zero");
    const std::size_t kappa = switchable[std::uniform_int_distribution<std::size_t>(0, switchable.size() - 1)(rng)];
    const double cap = std::min(spec.node(loads[kappa]).p_max, g.p_max);

    FuzzCase c;
    c.worst_case_pattern = worst_case;
    c.p_before = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(loads.size()));
    double pb = 0.0;
    double pa = 0.0;
    if (worst_case) {
        (unit(rng) < 0.5 ? pa : pb) = cap;
    } else {
        do {
            pb = cap * unit(rng);
            pa = cap * unit(rng);
        } while (std::abs(pb - pa) < 1e-3 * cap);
    }

    const double budget = g.p_max - std::max(pb, pa);
    double drawn = 0.0;
    for (std::size_t j = 0; j < loads.size(); ++j) {
        if (j == kappa) continue;
        const double pj = spec.node(loads[j]).p_max * (worst_case ? 1.0 : unit(rng));
        c.p_before[static_cast<Eigen::Index>(j)] = pj;
        drawn += pj;
    }
    if (drawn > budget) c.p_before *= budget / drawn;
    c.p_before[static_cast<Eigen::Index>(kappa)] = pb;
    c.event = {loads[kappa], pb, pa, 0.0};
    return c;
}

}  // namespace

FuzzReport verify_certificate(const NetworkSpec& spec, std::size_t n_events, std::uint64_t seed) {
    if (!certify_network(spec).all_certified()) throw DomainError("fuzzing requires a certified network");
    const auto& g = spec.params();
    const double horizon = 1000.0 * g.tau_max;

    std::mt19937_64 rng(seed);
    FuzzReport report;
    report.min_voltage = g.v0;
    for (std::size_t e = 0; e < n_events; ++e) {
        FuzzCase c = draw_case(spec, rng, e % 2 == 0);
        Trajectory t = simulate_event(spec, c.p_before, c.event, horizon);

        ++report.events;
        if (c.worst_case_pattern) ++report.worst_case_events;
        report.accepted_steps += t.step_checks.size();
        for (const auto& s : t.states) report.min_voltage = std::min(report.min_voltage, s.v_loads.minCoeff());

        double rise = 0.0;
        for (const auto& check : t.step_checks) {
            rise = std::max(rise, check.delta_p);
            report.max_p_dot_mismatch = std::max(report.max_p_dot_mismatch, p_dot_mismatch(check));
        }
        report.max_potential_rise = std::max(report.max_potential_rise, rise);

        std::string problem;
        if (t.verdict != TrajectoryVerdict::ConvergedToSep)
            problem = "trajectory verdict " + to_string(t.verdict);
        else if (rise > 1e-9)
            problem = "potential rose by " + std::to_string(rise);
        if (!problem.empty())
            throw CertificateViolation("event " + std::to_string(e) + " on node " + std::to_string(c.event.load) +
                                           ": " + problem,
                                       std::move(c), std::move(t));
        report.cases.push_back(std::move(c));
    }
    return report;
}

}  // namespace adhocgrid
