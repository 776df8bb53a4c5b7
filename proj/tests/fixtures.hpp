#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "adhocgrid/network.hpp"

namespace fixtures {

using namespace adhocgrid;

inline GridParameters unit_grid(double p_max = 0.1, double v_min = 0.75, double v_tr = 0.66) {
    GridParameters g;
    g.p_max = p_max;
    g.v_min = v_min;
    g.v_tr = v_tr;
    return g;
}

/// Source 0 feeding load 1 through one line of resistance g.r_max.
inline NetworkSpec two_bus(const GridParameters& g, double p_nominal, double capacitance, double tau = 0.5) {
    return NetworkSpec(g, {Node::source(), Node::load(p_nominal, g.p_max, capacitance)},
                       {{0, 1, g.r_max, tau * g.r_max}});
}

/// S - L1 - L2 with equal resistances r.
inline NetworkSpec path3(const GridParameters& g, double r, double p_max_k, double capacitance, double tau = 0.5) {
    return NetworkSpec(g,
                       {Node::source(), Node::load(0.0, p_max_k, capacitance), Node::load(0.0, p_max_k, capacitance)},
                       {{0, 1, r, tau * r}, {1, 2, r, tau * r}});
}

/// Bisection for a sign change of f on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iterations = 200) {
    const bool lo_negative = f(lo) < 0.0;
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((f(mid) < 0.0) == lo_negative ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Minimizes f over [lo, hi]^2 by repeated grid search, shrinking the box
/// around the best cell each round.
inline std::pair<double, double> zoom_minimize(const std::function<double(double, double)>& f, double lo, double hi,
                                               int grid = 101, int rounds = 12) {
    double x0 = lo, x1 = hi, y0 = lo, y1 = hi;
    double bx = lo, by = lo;
    for (int r = 0; r < rounds; ++r) {
        double best = INFINITY;
        for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j) {
                const double x = x0 + (x1 - x0) * i / (grid - 1);
                const double y = y0 + (y1 - y0) * j / (grid - 1);
                const double v = f(x, y);
                if (v < best) {
                    best = v;
                    bx = x;
                    by = y;
                }
            }
        const double hx = 2.0 * (x1 - x0) / (grid - 1);
        const double hy = 2.0 * (y1 - y0) / (grid - 1);
        x0 = bx - hx, x1 = bx + hx, y0 = by - hy, y1 = by + hy;
    }
    return {bx, by};
}

}  // namespace fixtures
