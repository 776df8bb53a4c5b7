#include <doctest.h>

#include <cmath>

#include "adhocgrid/certify.hpp"
#include "adhocgrid/equilibrium.hpp"
#include "adhocgrid/errors.hpp"
#include "adhocgrid/random_network.hpp"
#include "adhocgrid/simulate.hpp"
#include "fixtures.hpp"

using namespace adhocgrid;
using doctest::Approx;
using fixtures::unit_grid;

namespace {

/// Two-bus network with twice the sufficient capacitance for P_max = 0.1.
NetworkSpec certified_two_bus() {
    const auto g = unit_grid(0.1, 0.8);
    const double need = std::max(c_vtr_bound(0.1, 1.0, 0.66), c_transient_bound(0.1, g).capacitance);
    return fixtures::two_bus(g, 0.0, 2.0 * need);
}

}  // namespace

TEST_CASE("events are checked") {
    const auto spec = certified_two_bus();
    CHECK_NOTHROW(check_event(spec, {1, 0.0, 0.1, 0.0}));
    CHECK_THROWS_AS(check_event(spec, {1, 0.05, 0.05, 0.0}), DomainError);
    CHECK_THROWS_AS(check_event(spec, {1, 0.0, 0.2, 0.0}), DomainError);
    CHECK_THROWS_AS(check_event(spec, {0, 0.0, 0.1, 0.0}), DomainError);
}

TEST_CASE("equilibrium is a fixed point of the integrator") {
    const auto spec = random_network({.num_nodes = 5}, 21);
    const Eigen::VectorXd p = spec.nominal_powers();
    const SystemState start = equilibrium_state(spec, p);
    const double t_end = 100.0 * spec.params().tau_max;
    const Trajectory t = integrate(spec, start, p, t_end, {});
    CHECK(t.verdict == TrajectoryVerdict::ConvergedToSep);
    CHECK(t.times.back() == Approx(t_end));
    for (const auto& s : t.states) {
        CHECK((s.v_loads - start.v_loads).lpNorm<Eigen::Infinity>() < 1e-6 * spec.params().v0);
    }
}

TEST_CASE("two-bus step settles at the closed-form equilibrium") {
    const auto spec = certified_two_bus();
    const Trajectory t = simulate_event(spec, Eigen::VectorXd::Zero(1), {1, 0.0, 0.1, 0.0}, 1000.0);
    CHECK(t.verdict == TrajectoryVerdict::ConvergedToSep);
    CHECK(std::abs(t.final_state().v_loads[0] - two_bus_v_high(0.1, 1.0, 1.0)) < 1e-6);
    CHECK(std::abs(t.final_state().v_loads[0] - 0.887298) < 1e-6);
    for (const auto& c : t.step_checks) CHECK(c.delta_p <= 1e-9);
}

TEST_CASE("halving the tolerances barely moves the endpoint") {
    const auto spec = certified_two_bus();
    const auto p = Eigen::VectorXd::Zero(1);
    const SystemState start = equilibrium_state(spec, p);
    IntegrationOptions loose;
    IntegrationOptions tight;
    tight.rtol /= 2;
    tight.atol /= 2;
    auto run = [&](const IntegrationOptions& o) {
        Simulation sim(spec, start, p, o);
        sim.apply_event({1, 0.0, 0.1, 0.0});
        sim.run_until(3.0);
        return sim.trajectory().final_state();
    };
    const SystemState a = run(loose);
    const SystemState b = run(tight);
    CHECK(std::abs(a.v_loads[0] - b.v_loads[0]) < 1e-7);
    CHECK(std::abs(a.i_lines[0] - b.i_lines[0]) < 1e-7);
}

TEST_CASE("state is continuous across an event and the potential jumps as predicted") {
    const auto spec = certified_two_bus();
    const auto& g = spec.params();
    const double c = spec.node(1).capacitance;
    const double p_minus = 0.03;
    const double p_plus = 0.1;
    const Trajectory t = simulate_event(spec, Eigen::VectorXd::Constant(1, p_minus), {1, p_minus, p_plus, 0.0}, 1.0);
    REQUIRE(t.events.size() == 1);
    const std::size_t n = t.events[0].index;
    REQUIRE(n == 1);
    CHECK(t.states[0].v_loads == t.states[1].v_loads);
    CHECK(t.states[0].i_lines == t.states[1].i_lines);

    const double vh = two_bus_v_high(p_minus, 1.0, 1.0);
    // C v'(t+) from the post-switch rhs at the pre-switch equilibrium.
    const auto d = rhs(spec, t.states[1], Eigen::VectorXd::Constant(1, p_plus));
    CHECK(c * d.dv[0] == Approx((p_minus - p_plus) / vh).epsilon(1e-12));

    const double jump = (p_minus - p_plus) / vh;
    const double bound = g_ini_plus(p_minus, p_plus, g) + g.tau_max / (2 * c) * jump * jump;
    CHECK(t.potentials[1].p_total <= bound + 1e-15);
}

TEST_CASE("apply_event requires the simulation clock to match") {
    const auto spec = certified_two_bus();
    Simulation sim(spec, equilibrium_state(spec, Eigen::VectorXd::Zero(1)), Eigen::VectorXd::Zero(1));
    CHECK_THROWS_AS(sim.apply_event({1, 0.0, 0.1, 1.0}), std::invalid_argument);
    sim.run_until(1.0);
    CHECK_NOTHROW(sim.apply_event({1, 0.0, 0.1, 1.0}));
}

TEST_CASE("capacitance below the necessary bound is unstable") {
    const double p_max = 0.1875;
    const double v_min = 0.75;
    const auto g = unit_grid(p_max, v_min);
    const double c = 0.5 * c_necessary_bound(p_max, g.tau_max, v_min);
    const auto spec = fixtures::two_bus(g, 0.0, c, 0.9);
    const Trajectory t = simulate_event(spec, Eigen::VectorXd::Zero(1), {1, 0.0, p_max, 0.0}, 1000.0);
    CHECK(t.verdict != TrajectoryVerdict::ConvergedToSep);
    CHECK(t.verdict == TrajectoryVerdict::LeftTransientDomain);
}

TEST_CASE("decay rate integrates to the potential change on every step") {
    const auto spec = random_network({.num_nodes = 6}, 4);
    const Eigen::VectorXd p = spec.nominal_powers();
    const NodeId k = spec.load_nodes().front();
    const double pk = p[0];
    const Trajectory t = simulate_event(spec, p, {k, pk, pk > 0 ? 0.0 : spec.node(k).p_max, 0.0}, 1000.0);
    REQUIRE(t.verdict == TrajectoryVerdict::ConvergedToSep);
    REQUIRE(t.step_checks.size() > 10);
    for (const auto& c : t.step_checks) CHECK(p_dot_mismatch(c) < 1e-4);
}

TEST_CASE("certified two-bus survives random switching") {
    const FuzzReport report = verify_certificate(certified_two_bus(), 100, 17);
    CHECK(report.events == 100);
    CHECK(report.worst_case_events == 50);
    CHECK(report.max_potential_rise <= 1e-9);
    CHECK(report.min_voltage > 0.66);
}

TEST_CASE("certified random trees survive random switching") {
    for (std::uint64_t seed : {101u, 102u}) {
        const auto spec = random_network({.num_nodes = 6, .extra_edge_probability = 0.0}, seed);
        CHECK(spec.num_lines() == 5);
        CHECK_NOTHROW(verify_certificate(spec, 50, seed));
    }
}

TEST_CASE("certified random meshes survive random switching") {
    for (std::uint64_t seed : {101u, 102u}) {
        const auto spec = random_network({.num_nodes = 6, .extra_edge_probability = 0.5}, seed);
        CHECK(spec.num_lines() > 5);
        CHECK_NOTHROW(verify_certificate(spec, 50, seed));
    }
}

TEST_CASE("fuzzing requires a certificate") {
    const auto g = unit_grid(0.1, 0.8);
    CHECK_THROWS_AS(verify_certificate(fixtures::two_bus(g, 0.0, 0.1), 5, 1), DomainError);
}
