#include <doctest.h>

#include <algorithm>

#include "adhocgrid/network.hpp"
#include "adhocgrid/random_network.hpp"
#include "fixtures.hpp"

using namespace adhocgrid;
using fixtures::two_bus;
using fixtures::unit_grid;

namespace {

bool has_kind(const std::vector<Violation>& vs, ViolationKind k) {
    return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.kind == k; });
}

}  // namespace

TEST_CASE("incidence rows follow edge orientation") {
    const auto g = unit_grid();
    const Eigen::MatrixXd two = incidence_matrix(two_bus(g, 0.0, 1.0));
    CHECK(two.rows() == 1);
    CHECK(two(0, 0) == 1.0);
    CHECK(two(0, 1) == -1.0);

    const Eigen::MatrixXd path = incidence_matrix(fixtures::path3(g, 0.5, 0.05, 1.0));
    Eigen::MatrixXd expected(2, 3);
    expected << 1, -1, 0, 0, 1, -1;
    CHECK(path == expected);
}

TEST_CASE("incidence column magnitudes count node degree") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const NetworkSpec spec = random_network({.num_nodes = 7, .num_sources = 2}, seed);
        const Eigen::MatrixXd nabla = incidence_matrix(spec);
        std::vector<double> degree(spec.num_nodes(), 0.0);
        for (const auto& l : spec.lines()) {
            degree[l.from] += 1.0;
            degree[l.to] += 1.0;
        }
        for (NodeId k = 0; k < spec.num_nodes(); ++k)
            CHECK(nabla.col(static_cast<Eigen::Index>(k)).cwiseAbs().sum() == degree[k]);
    }
}

TEST_CASE("load-space helpers") {
    const auto spec = fixtures::path3(unit_grid(), 0.5, 0.05, 1.0);
    CHECK(spec.load_nodes() == std::vector<NodeId>{1, 2});
    CHECK(spec.source_nodes() == std::vector<NodeId>{0});
    CHECK_FALSE(spec.load_index(0).has_value());
    CHECK(*spec.load_index(2) == 1);
    const Eigen::VectorXd full = spec.expand_voltages(Eigen::Vector2d(0.9, 0.8));
    CHECK(full[0] == 1.0);
    CHECK(full[2] == 0.8);
    CHECK(spec.restrict_to_loads(full) == Eigen::Vector2d(0.9, 0.8));
    CHECK(spec.total_resistance() == doctest::Approx(1.0));
    CHECK(spec.max_time_constant() == doctest::Approx(0.5));
}

TEST_CASE("valid two-bus has no violations") {
    const auto g = unit_grid();
    CHECK(validate(two_bus(g, 0.05, 1.0, 0.9)).empty());
}

TEST_CASE("disconnected load is reported") {
    const auto g = unit_grid();
    const NetworkSpec spec(g, {Node::source(), Node::load(0, 0.05, 1), Node::load(0, 0.05, 1)},
                           {{0, 1, 0.5, 0.25}});
    const auto vs = validate(spec);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].kind == ViolationKind::NotStronglyConnected);
    CHECK(vs[0].element == std::optional<std::size_t>(2));
}

TEST_CASE("resistance budget") {
    const auto g = unit_grid();
    const NetworkSpec spec(g, {Node::source(), Node::load(0, 0.05, 1), Node::load(0, 0.05, 1)},
                           {{0, 1, 0.6, 0.3}, {1, 2, 0.6, 0.3}});
    const auto vs = validate(spec);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].kind == ViolationKind::ResistanceBudgetExceeded);
}

TEST_CASE("each assumption has its own violation") {
    auto g = unit_grid();

    SUBCASE("time constant at the bound") {
        CHECK(has_kind(validate(two_bus(g, 0, 1, 1.0)), ViolationKind::TimeConstantTooLarge));
    }
    SUBCASE("voltage ordering") {
        g.v_tr = 0.8;
        CHECK(has_kind(validate(two_bus(g, 0, 1)), ViolationKind::VoltageLevelsInconsistent));
        g.v_tr = 0.5;
        CHECK(has_kind(validate(two_bus(g, 0, 1)), ViolationKind::VoltageLevelsInconsistent));
    }
    SUBCASE("loadability at the nose apex") {
        g.p_max = 0.25;
        CHECK(has_kind(validate(two_bus(g, 0, 1)), ViolationKind::LoadabilityExceedsP0));
    }
    SUBCASE("no source") {
        const NetworkSpec spec(g, {Node::load(0, 0.05, 1), Node::load(0, 0.05, 1)}, {{0, 1, 0.5, 0.25}});
        CHECK(has_kind(validate(spec), ViolationKind::NoSource));
    }
    SUBCASE("bad line") {
        const NetworkSpec spec(g, {Node::source(), Node::load(0, 0.05, 1)}, {{0, 1, -0.5, 0.25}, {1, 1, 0.1, 0.01}, {0, 4, 0.1, 0.01}});
        const auto vs = validate(spec);
        CHECK(has_kind(vs, ViolationKind::NonPositiveResistance));
        CHECK(has_kind(vs, ViolationKind::SelfLoop));
        CHECK(has_kind(vs, ViolationKind::EndpointOutOfRange));
    }
    SUBCASE("zero inductance") {
        const NetworkSpec spec(g, {Node::source(), Node::load(0, 0.05, 1)}, {{0, 1, 0.5, 0.0}});
        CHECK(has_kind(validate(spec), ViolationKind::NonPositiveInductance));
    }
    SUBCASE("load powers") {
        const NetworkSpec spec(g, {Node::source(), Node::load(0.08, 0.05, 1), Node::load(0, 0.2, 0)},
                               {{0, 1, 0.5, 0.25}, {0, 2, 0.5, 0.25}});
        const auto vs = validate(spec);
        CHECK(has_kind(vs, ViolationKind::LoadPowerOutOfRange));
        CHECK(has_kind(vs, ViolationKind::NonPositiveCapacitance));
    }
    SUBCASE("nominal sum above P_max") {
        const NetworkSpec spec(g, {Node::source(), Node::load(0.06, 0.1, 1), Node::load(0.06, 0.1, 1)},
                               {{0, 1, 0.5, 0.25}, {0, 2, 0.5, 0.25}});
        CHECK(has_kind(validate(spec), ViolationKind::NominalLoadExceedsPmax));
    }
}

TEST_CASE("source-to-source line is informational") {
    const auto g = unit_grid();
    const NetworkSpec spec(g, {Node::source(), Node::source(), Node::load(0, 0.05, 1)},
                           {{0, 1, 0.2, 0.1}, {1, 2, 0.5, 0.25}});
    const auto vs = validate(spec);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].kind == ViolationKind::SourceToSourceLine);
    CHECK(vs[0].severity == Severity::Info);
    CHECK_FALSE(has_errors(vs));
}

TEST_CASE("ValidationError keeps the list") {
    const auto g = unit_grid();
    const NetworkSpec spec(g, {Node::source(), Node::load(0, 0.05, 1)}, {{0, 1, 2.0, 1.0}});
    auto vs = validate(spec);
    const ValidationError e(vs);
    CHECK(e.violations().size() == vs.size());
    CHECK(std::string(e.what()).find("ResistanceBudgetExceeded") != std::string::npos);
}
