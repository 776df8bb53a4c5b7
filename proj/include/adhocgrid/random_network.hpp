#pragma once

// Seeded generator of admissible networks for property tests and fuzzing.

#include <cstddef>
#include <cstdint>

#include "adhocgrid/network.hpp"

namespace adhocgrid {

struct RandomNetworkOptions {
    std::size_t num_nodes = 6;
    std::size_t num_sources = 1;
    double extra_edge_probability = 0.3;
    /// Fraction of R_max consumed by the lines, drawn uniformly from this range.
    double budget_fill_low = 0.5;
    double budget_fill_high = 0.999;
    /// Line time constants as fractions of tau_max.
    double tau_low = 0.2;
    double tau_high = 0.9;
    /// P_max as a fraction of p_crit; V_min follows as V_high(P_max).
    double loading_low = 0.3;
    double loading_high = 0.95;
    /// Installed capacitance as a multiple of the sufficient bound.
    double margin_low = 1.2;
    double margin_high = 3.0;
    /// Draw V0, R_max and tau_max over several decades instead of using `base`.
    bool randomize_units = false;
    GridParameters base{};
};

/// Uniform spanning tree (Pruefer sequence) plus independent extra edges,
/// random orientations, resistances scaled into the budget. Capacitors are
/// sized from the certificates, so the result is certified by construction.
/// Deterministic given `seed`.
NetworkSpec random_network(const RandomNetworkOptions& options, std::uint64_t seed);

}  // namespace adhocgrid
