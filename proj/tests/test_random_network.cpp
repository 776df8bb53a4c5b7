#include <doctest.h>

#include "adhocgrid/certify.hpp"
#include "adhocgrid/random_network.hpp"

using namespace adhocgrid;

TEST_CASE("random networks are deterministic in the seed") {
    const RandomNetworkOptions options{.num_nodes = 7, .num_sources = 2, .randomize_units = true};
    CHECK(random_network(options, 9) == random_network(options, 9));
    CHECK_FALSE(random_network(options, 9) == random_network(options, 10));
}

TEST_CASE("random networks satisfy every assumption") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const RandomNetworkOptions options{
            .num_nodes = 3 + seed % 6, .num_sources = 1 + seed % 2, .randomize_units = seed % 3 == 1};
        const auto spec = random_network(options, seed);
        CHECK_FALSE(has_errors(validate(spec)));
        CHECK(spec.num_lines() >= spec.num_nodes() - 1);
        CHECK(spec.total_resistance() <= spec.params().r_max);
        CHECK(spec.max_time_constant() <= 0.9 * spec.params().tau_max);
        CHECK(spec.min_time_constant() >= 0.2 * spec.params().tau_max);
        CHECK(certify_network(spec).all_certified());
    }
}

TEST_CASE("trees have n - 1 lines") {
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        CHECK(random_network({.num_nodes = 8, .extra_edge_probability = 0.0}, seed).num_lines() == 7);
}

TEST_CASE("generator rejects impossible shapes") {
    CHECK_THROWS_AS(random_network({.num_nodes = 1}, 0), std::invalid_argument);
    CHECK_THROWS_AS(random_network({.num_nodes = 3, .num_sources = 3}, 0), std::invalid_argument);
}
