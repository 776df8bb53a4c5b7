#include "adhocgrid/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "adhocgrid/errors.hpp"

namespace adhocgrid {

namespace {

void require_nonnegative_power(double p) {
    if (!(p >= 0.0)) throw DomainError("load power must be nonnegative, got " + std::to_string(p));
}

/// Co-content over the load-voltage vector; only used for step acceptance.
double co_content_loads(const NetworkSpec& spec, const Eigen::VectorXd& v_full, const Eigen::VectorXd& p) {
    double g = 0.0;
    for (const auto& l : spec.lines()) {
        const double d = v_full[static_cast<Eigen::Index>(l.from)] - v_full[static_cast<Eigen::Index>(l.to)];
        g += d * d / (2.0 * l.resistance);
    }
    for (std::size_t j = 0; j < spec.num_loads(); ++j)
        g += p[static_cast<Eigen::Index>(j)] * std::log(v_full[static_cast<Eigen::Index>(spec.load_nodes()[j])]);
    return g;
}

Eigen::MatrixXd load_laplacian(const NetworkSpec& spec) {
    const Eigen::MatrixXd nabla = load_incidence(spec);
    Eigen::VectorXd conductance(static_cast<Eigen::Index>(spec.num_lines()));
    for (LineId a = 0; a < spec.num_lines(); ++a)
        conductance[static_cast<Eigen::Index>(a)] = 1.0 / spec.line(a).resistance;
    return nabla.transpose() * conductance.asDiagonal() * nabla;
}

}  // namespace

double nose_apex(double r, double v0) { return v0 * v0 / (4.0 * r); }

double two_bus_v_high(double p, double r, double v0) {
    require_nonnegative_power(p);
    const double p0 = nose_apex(r, v0);
    if (p > p0) throw InfeasiblePower("load " + std::to_string(p) + " exceeds nose apex " + std::to_string(p0));
    return 0.5 * v0 * (1.0 + std::sqrt(1.0 - p / p0));
}

double two_bus_v_low(double p, double r, double v0) {
    // Product of the two roots is p r; avoids cancellation at light load.
    const double v_high = two_bus_v_high(p, r, v0);
    return p * r / v_high;
}

double max_loadability(double v_min, double v0, double r_max) {
    if (!(v_min >= 0.5 * v0 && v_min < v0))
        throw DomainError("v_min must lie in [v0/2, v0), got " + std::to_string(v_min));
    return v_min * (v0 - v_min) / r_max;
}

Eigen::VectorXd power_flow_residual(const NetworkSpec& spec, const Eigen::VectorXd& v_full,
                                    const Eigen::VectorXd& p) {
    Eigen::VectorXd outflow = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.num_nodes()));
    for (const auto& l : spec.lines()) {
        const auto i = static_cast<Eigen::Index>(l.from);
        const auto j = static_cast<Eigen::Index>(l.to);
        const double current = (v_full[i] - v_full[j]) / l.resistance;
        outflow[i] += current;
        outflow[j] -= current;
    }
    Eigen::VectorXd r(static_cast<Eigen::Index>(spec.num_loads()));
    for (std::size_t j = 0; j < spec.num_loads(); ++j) {
        const auto k = static_cast<Eigen::Index>(spec.load_nodes()[j]);
        r[static_cast<Eigen::Index>(j)] = outflow[k] + p[static_cast<Eigen::Index>(j)] / v_full[k];
    }
    return r;
}

double power_flow_tolerance(const NetworkSpec& spec, const PowerFlowOptions& options) {
    const auto& g = spec.params();
    const double scale = g.p_max > 0.0 ? g.p_max : g.p0();
    return options.relative_tolerance * scale / g.v0;
}

EquilibriumResult solve_power_flow(const NetworkSpec& spec, const Eigen::VectorXd& p,
                                   const PowerFlowOptions& options) {
    const auto& g = spec.params();
    if (static_cast<std::size_t>(p.size()) != spec.num_loads())
        throw std::invalid_argument("power vector has " + std::to_string(p.size()) + " entries, expected " +
                                    std::to_string(spec.num_loads()));
    for (Eigen::Index j = 0; j < p.size(); ++j) require_nonnegative_power(p[j]);
    if (p.sum() > g.p0())
        throw InfeasiblePower("total load " + std::to_string(p.sum()) + " exceeds P0 " + std::to_string(g.p0()));

    const double tol = power_flow_tolerance(spec, options);
    const double floor_v = 0.5 * g.v0;
    const Eigen::MatrixXd laplacian = load_laplacian(spec);

    Eigen::VectorXd v_loads = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(spec.num_loads()), g.v0);
    Eigen::VectorXd v_full = spec.expand_voltages(v_loads);
    Eigen::VectorXd residual = power_flow_residual(spec, v_full, p);
    double norm = residual.size() ? residual.lpNorm<Eigen::Infinity>() : 0.0;

    EquilibriumResult result;
    int it = 0;
    for (; it < options.max_iterations && norm >= tol; ++it) {
        Eigen::MatrixXd hessian = laplacian;
        hessian.diagonal() -= (p.array() / v_loads.array().square()).matrix();
        const Eigen::VectorXd step = hessian.ldlt().solve(-residual);

        const double g_old = co_content_loads(spec, v_full, p);
        double alpha = 1.0;
        Eigen::VectorXd trial = v_loads + step;
        for (int halvings = 0; halvings < 60; ++halvings) {
            trial = v_loads + alpha * step;
            const bool inside = (trial.array() > floor_v).all();
            if (inside) {
                const Eigen::VectorXd trial_full = spec.expand_voltages(trial);
                const double trial_norm = power_flow_residual(spec, trial_full, p).lpNorm<Eigen::Infinity>();
                if (trial_norm < norm || co_content_loads(spec, trial_full, p) <= g_old) break;
            }
            alpha *= 0.5;
        }
        v_loads = trial;
        v_full = spec.expand_voltages(v_loads);
        residual = power_flow_residual(spec, v_full, p);
        norm = residual.lpNorm<Eigen::Infinity>();
    }
    if (!(norm < tol)) throw NonConvergence(it, norm);

    result.v_sep = v_full;
    result.converged = true;
    result.iterations = it;
    result.residual_norm = norm;
    result.i_sep.resize(static_cast<Eigen::Index>(spec.num_lines()));
    for (LineId a = 0; a < spec.num_lines(); ++a) {
        const auto& l = spec.line(a);
        result.i_sep[static_cast<Eigen::Index>(a)] =
            (v_full[static_cast<Eigen::Index>(l.from)] - v_full[static_cast<Eigen::Index>(l.to)]) / l.resistance;
    }

    const double p_total = p.sum();
    const double threshold = two_bus_v_high(std::min(p_total, g.p0()), g.r_max, g.v0) - 1e-9 * g.v0;
    const bool high = spec.num_loads() == 0 || (v_loads.array() > threshold).all();
    result.classification = high ? EquilibriumClass::HighVoltage : EquilibriumClass::LowVoltageOrOther;
    return result;
}

NoseCurve nose_curve(double r, double v0, std::size_t n) {
    if (n < 2) throw std::invalid_argument("nose curve needs at least two samples");
    NoseCurve curve;
    curve.p0 = nose_apex(r, v0);
    curve.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (i + 1 == n) ? curve.p0 : curve.p0 * static_cast<double>(i) / static_cast<double>(n - 1);
        curve.samples.push_back({p, two_bus_v_high(p, r, v0), two_bus_v_low(p, r, v0)});
    }
    return curve;
}

Eigen::MatrixXd hessian_g(const NetworkSpec& spec, const Eigen::VectorXd& v_full, const Eigen::VectorXd& p) {
    const Eigen::VectorXd v = spec.restrict_to_loads(v_full);
    if ((v.array() <= 0.0).any()) throw DomainError("hessian_g requires positive load voltages");
    Eigen::MatrixXd h = load_laplacian(spec);
    h.diagonal() -= (p.array() / v.array().square()).matrix();
    return h;
}

bool is_convex_at(const NetworkSpec& spec, const Eigen::VectorXd& v_full, const Eigen::VectorXd& p) {
    const Eigen::MatrixXd h = hessian_g(spec, v_full, p);
    if (h.size() == 0) return true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    return hi > 0.0 && lo > 1e-12 * hi;
}

}  // namespace adhocgrid
