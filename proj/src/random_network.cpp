#include "adhocgrid/random_network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "adhocgrid/certify.hpp"
#include "adhocgrid/equilibrium.hpp"

namespace adhocgrid {

namespace {

/// Decodes a uniformly random Pruefer sequence into the edge list of a tree.
std::vector<std::pair<NodeId, NodeId>> random_tree(std::size_t n, std::mt19937_64& rng) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    if (n < 2) return edges;
    if (n == 2) return {{0, 1}};
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<std::size_t> seq(n - 2);
    for (auto& s : seq) s = pick(rng);
    std::vector<std::size_t> degree(n, 1);
    for (auto s : seq) ++degree[s];
    for (auto s : seq) {
        const auto leaf = static_cast<std::size_t>(std::find(degree.begin(), degree.end(), 1u) - degree.begin());
        edges.emplace_back(leaf, s);
        --degree[leaf];
        --degree[s];
    }
    std::vector<NodeId> last;
    for (std::size_t i = 0; i < n; ++i)
        if (degree[i] == 1) last.push_back(i);
    edges.emplace_back(last[0], last[1]);
    return edges;
}

double log_uniform(double lo, double hi, std::mt19937_64& rng) {
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

}  // namespace

NetworkSpec random_network(const RandomNetworkOptions& options, std::uint64_t seed) {
    const std::size_t n = options.num_nodes;
    if (n < 2 || options.num_sources < 1 || options.num_sources >= n)
        throw std::invalid_argument("random network needs at least one source and one load");

    std::mt19937_64 rng(seed);
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    GridParameters g = options.base;
    if (options.randomize_units) {
        g.v0 = log_uniform(1.0, 400.0, rng);
        g.r_max = log_uniform(0.01, 10.0, rng);
        g.tau_max = log_uniform(1e-5, 1e-1, rng);
        g.v_tr = uniform(0.6, 0.7) * g.v0;
    }
    g.p_max = uniform(options.loading_low, options.loading_high) * p_crit(g);
    g.v_min = two_bus_v_high(g.p_max, g.r_max, g.v0);

    std::vector<NodeId> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> is_source(n, false);
    for (std::size_t s = 0; s < options.num_sources; ++s) is_source[order[s]] = true;

    auto edges = random_tree(n, rng);
    std::bernoulli_distribution extra(options.extra_edge_probability);
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) {
            const bool in_tree = std::any_of(edges.begin(), edges.end(), [&](const auto& e) {
                return (e.first == i && e.second == j) || (e.first == j && e.second == i);
            });
            if (!in_tree && !(is_source[i] && is_source[j]) && extra(rng)) edges.emplace_back(i, j);
        }

    std::vector<double> weight(edges.size());
    for (auto& w : weight) w = uniform(0.2, 1.0);
    double total = 0.0;
    for (double w : weight) total += w;
    const double fill = uniform(options.budget_fill_low, options.budget_fill_high);

    std::vector<Line> lines;
    std::bernoulli_distribution flip(0.5);
    for (std::size_t a = 0; a < edges.size(); ++a) {
        auto [from, to] = edges[a];
        if (flip(rng)) std::swap(from, to);
        const double r = weight[a] / total * fill * g.r_max;
        const double tau = uniform(options.tau_low, options.tau_high) * g.tau_max;
        lines.push_back({from, to, r, tau * r});
    }

    std::vector<Node> nodes(n);
    std::vector<NodeId> loads;
    for (NodeId i = 0; i < n; ++i)
        if (!is_source[i]) loads.push_back(i);
    double nominal_total = 0.0;
    for (NodeId k : loads) {
        const double cap = uniform(0.2, 1.0) * g.p_max;
        nodes[k] = Node::load(uniform(0.0, 1.0) * cap, cap, 0.0);
        nominal_total += nodes[k].p_nominal;
    }
    if (nominal_total > g.p_max) {
        const double shrink = uniform(0.5, 0.99) * g.p_max / nominal_total;
        for (NodeId k : loads) nodes[k].p_nominal *= shrink;
    }
    for (NodeId k : loads) {
        const double need = std::max(c_vtr_bound(nodes[k].p_max, g.tau_max, g.v_tr),
                                     c_transient_bound(nodes[k].p_max, g).capacitance);
        nodes[k].capacitance = uniform(options.margin_low, options.margin_high) * need;
    }
    return NetworkSpec(g, std::move(nodes), std::move(lines));
}

}  // namespace adhocgrid
