#include <doctest.h>

#include <cmath>
#include <random>

#include "adhocgrid/equilibrium.hpp"
#include "adhocgrid/errors.hpp"
#include "adhocgrid/potential.hpp"
#include "adhocgrid/random_network.hpp"
#include "fixtures.hpp"

using namespace adhocgrid;
using doctest::Approx;
using fixtures::unit_grid;

TEST_CASE("two-bus closed forms") {
    CHECK(two_bus_v_high(0.0, 1.0, 1.0) == 1.0);
    CHECK(two_bus_v_low(0.0, 1.0, 1.0) == 0.0);
    CHECK(two_bus_v_high(0.25, 1.0, 1.0) == Approx(0.5).epsilon(1e-15));
    CHECK(two_bus_v_low(0.25, 1.0, 1.0) == Approx(0.5).epsilon(1e-15));

    // Oracle: root of v (1 - v) = p on either side of the apex.
    const double p = 0.1875;
    const auto f = [&](double v) { return v * (1.0 - v) - p; };
    CHECK(two_bus_v_high(p, 1.0, 1.0) == Approx(fixtures::bisect(f, 0.5, 1.0)).epsilon(1e-14));
    CHECK(two_bus_v_low(p, 1.0, 1.0) == Approx(fixtures::bisect(f, 0.0, 0.5)).epsilon(1e-14));
    CHECK(two_bus_v_high(p, 1.0, 1.0) == Approx(0.75));
    CHECK(two_bus_v_low(p, 1.0, 1.0) == Approx(0.25));
}

TEST_CASE("two-bus closed forms reject infeasible input") {
    CHECK_THROWS_AS(two_bus_v_high(-0.01, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(two_bus_v_high(0.2501, 1.0, 1.0), InfeasiblePower);
}

TEST_CASE("max loadability") {
    CHECK(max_loadability(0.5, 1.0, 1.0) == Approx(0.25));
    CHECK(max_loadability(0.75, 1.0, 1.0) == Approx(0.1875));
    CHECK(two_bus_v_high(max_loadability(0.75, 1.0, 1.0), 1.0, 1.0) == Approx(0.75));
    CHECK(max_loadability(0.66, 1.0, 1.0) == Approx(0.2244));
    CHECK_THROWS_AS(max_loadability(0.4, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(max_loadability(1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("nose curve") {
    const NoseCurve three = nose_curve(1.0, 1.0, 3);
    REQUIRE(three.samples.size() == 3);
    CHECK(three.samples[0].p == 0.0);
    CHECK(three.samples[0].v_high == 1.0);
    CHECK(three.samples[0].v_low == 0.0);
    CHECK(three.samples[1].p == Approx(0.125));
    CHECK(three.samples[1].v_high == Approx(0.8535533906));
    CHECK(three.samples[1].v_low == Approx(0.1464466094));
    CHECK(three.samples[2].p == 0.25);
    CHECK(three.samples[2].v_high == Approx(0.5));

    const NoseCurve curve = nose_curve(2.5, 48.0, 200);
    CHECK(curve.samples.back().p == curve.p0);
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
        const auto& s = curve.samples[i];
        CHECK(std::abs(s.p - s.v_high * (48.0 - s.v_high) / 2.5) < 1e-12 * curve.p0);
        CHECK(std::abs(s.p - s.v_low * (48.0 - s.v_low) / 2.5) < 1e-12 * curve.p0);
        if (i > 0) CHECK(s.v_high - s.v_low < curve.samples[i - 1].v_high - curve.samples[i - 1].v_low);
    }
    CHECK_THROWS_AS(nose_curve(1.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("power flow on the two-bus case") {
    const auto g = unit_grid(0.1875, 0.75);
    const auto spec = fixtures::two_bus(g, 0.1875, 1.0);
    const EquilibriumResult eq = solve_power_flow(spec, Eigen::VectorXd::Constant(1, 0.1875));
    CHECK(eq.converged);
    CHECK(eq.v_sep[1] == Approx(0.75).epsilon(1e-12));
    CHECK(eq.i_sep[0] == Approx(0.25).epsilon(1e-12));
    CHECK(eq.classification == EquilibriumClass::HighVoltage);
}

TEST_CASE("power flow with no load is flat") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto spec = random_network({.num_nodes = 6, .num_sources = 2}, seed);
        const auto eq = solve_power_flow(spec, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.num_loads())));
        CHECK((eq.v_sep.array() == spec.params().v0).all());
        CHECK((eq.i_sep.array() == 0.0).all());
    }
}

TEST_CASE("power flow on a path matches a grid search of the co-content") {
    const auto g = unit_grid(0.1875);
    const auto spec = fixtures::path3(g, 0.5, 0.09375, 1.0);
    const Eigen::Vector2d p(0.09375, 0.09375);
    const auto eq = solve_power_flow(spec, p);

    const auto co = [&](double v1, double v2) {
        return (1 - v1) * (1 - v1) + (v1 - v2) * (v1 - v2) + p[0] * std::log(v1) + p[1] * std::log(v2);
    };
    const auto [v1, v2] = fixtures::zoom_minimize(co, 0.5, 1.0);
    CHECK(std::abs(eq.v_sep[1] - v1) < 1e-6);
    CHECK(std::abs(eq.v_sep[2] - v2) < 1e-6);
    CHECK(eq.v_sep[1] == Approx(0.89127957).epsilon(1e-7));
    CHECK(eq.v_sep[2] == Approx(0.83515207).epsilon(1e-7));
}

TEST_CASE("power flow errors") {
    const auto spec = fixtures::two_bus(unit_grid(), 0.0, 1.0);
    CHECK_THROWS_AS(solve_power_flow(spec, Eigen::VectorXd::Constant(1, -0.1)), DomainError);
    CHECK_THROWS_AS(solve_power_flow(spec, Eigen::VectorXd::Constant(1, 0.26)), InfeasiblePower);
    CHECK_THROWS_AS(solve_power_flow(spec, Eigen::VectorXd::Zero(2)), std::invalid_argument);
    PowerFlowOptions starved;
    starved.max_iterations = 1;
    CHECK_THROWS_AS(solve_power_flow(spec, Eigen::VectorXd::Constant(1, 0.2), starved), NonConvergence);
}

TEST_CASE("power flow meets the residual tolerance on random networks") {
    std::mt19937_64 rng(7);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto spec = random_network({.num_nodes = 8, .num_sources = 1 + seed % 3, .randomize_units = true}, seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Eigen::VectorXd p = spec.max_powers();
        for (auto& x : p) x *= u(rng);
        if (p.sum() > spec.params().p_max) p *= spec.params().p_max / p.sum();
        const auto eq = solve_power_flow(spec, p);
        CHECK(power_flow_residual(spec, eq.v_sep, p).lpNorm<Eigen::Infinity>() < power_flow_tolerance(spec));
        CHECK(eq.classification == EquilibriumClass::HighVoltage);
        // Every admissible topology keeps its loads above the two-bus worst case.
        const double floor = two_bus_v_high(p.sum(), spec.params().r_max, spec.params().v0);
        CHECK(spec.restrict_to_loads(eq.v_sep).minCoeff() >= floor - 1e-9 * spec.params().v0);
    }
}

TEST_CASE("hessian of the co-content") {
    const auto g = unit_grid(0.1875);
    const auto spec = fixtures::two_bus(g, 0.1875, 1.0);
    const Eigen::MatrixXd h = hessian_g(spec, Eigen::Vector2d(1.0, 0.75), Eigen::VectorXd::Constant(1, 0.1875));
    CHECK(h(0, 0) == Approx(1.0 - 1.0 / 3.0));
    CHECK(is_convex_at(spec, Eigen::Vector2d(1.0, 0.75), Eigen::VectorXd::Constant(1, 0.1875)));
    CHECK_FALSE(is_convex_at(spec, Eigen::Vector2d(1.0, 0.25), Eigen::VectorXd::Constant(1, 0.1875)));
    CHECK_THROWS_AS(hessian_g(spec, Eigen::Vector2d(1.0, 0.0), Eigen::VectorXd::Constant(1, 0.1)), DomainError);
}

TEST_CASE("unloaded hessian is the restricted laplacian") {
    const auto spec = fixtures::path3(unit_grid(), 0.5, 0.05, 1.0);
    const Eigen::MatrixXd h = hessian_g(spec, Eigen::Vector3d(1, 0.9, 0.8), Eigen::Vector2d::Zero());
    Eigen::Matrix2d lap;
    lap << 4, -2, -2, 2;
    CHECK((h - lap).norm() < 1e-15);
    CHECK(is_convex_at(spec, Eigen::Vector3d(1, 0.9, 0.8), Eigen::Vector2d::Zero()));
}

TEST_CASE("hessian is positive definite on the admissible region") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const auto spec = random_network({.num_nodes = 5, .randomize_units = true}, seed);
        const auto& g = spec.params();
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd v(static_cast<Eigen::Index>(spec.num_loads()));
            for (auto& x : v) x = g.v0 * (0.5 + 0.5 * u(rng)) + 1e-12 * g.v0;
            Eigen::VectorXd p(v.size());
            for (auto& x : p) x = u(rng);
            p *= u(rng) * g.p0() / p.sum() * (1.0 - 1e-9);
            CHECK(is_convex_at(spec, spec.expand_voltages(v), p));
        }
    }
}
