#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wdeg/banded.hpp"
#include "wdeg/errors.hpp"
#include "wdeg/mesh.hpp"
#include "wdeg/rhs.hpp"
#include "wdeg/vector_field.hpp"

namespace wdeg {

struct SolveConfig {
    /// Stopping tolerance on the interior projected-gradient max-norm,
    /// measured per unit node weight (same normalization as weak_residual).
    double tolerance = 1e-8;
    int max_inner = 200000;
    int max_outer = 50;
    /// Smoothing continuation schedule; empty means a single unregularized
    /// solve. Entries must be positive and strictly decreasing; a final
    /// eps = 0 stage is always appended.
    std::vector<double> eps_schedule;
    /// Damping factor for outer (frozen right-hand side) updates.
    double damping = 1.0;
    /// Outer fixed-point stopping tolerance (max-norm of iterate change).
    double outer_tolerance = 1e-8;

    void validate() const {
        if (!(tolerance > 0.0)) throw invalid_input("SolveConfig: tolerance must be > 0");
        if (max_inner < 1 || max_outer < 1)
            throw invalid_input("SolveConfig: iteration budgets must be >= 1");
        for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
            if (!(std::isfinite(eps_schedule[k]) && eps_schedule[k] > 0.0))
                throw invalid_input("SolveConfig: smoothing levels must be positive");
            if (k > 0 && !(eps_schedule[k] < eps_schedule[k - 1]))
                throw invalid_input("SolveConfig: smoothing schedule must decrease");
        }
        if (!(damping > 0.0 && damping <= 1.0))
            throw invalid_input("SolveConfig: damping must lie in (0, 1]");
        if (!(outer_tolerance > 0.0))
            throw invalid_input("SolveConfig: outer tolerance must be > 0");
    }
};

struct ContinuationStep {
    double eps;
    int iterations;
    double energy;
};

struct SolveReport {
    double energy = 0.0;
    int inner_iterations = 0;
    int outer_iterations = 0;
    /// Final interior projected-gradient max-norm (weight-normalized).
    double grad_residual = 0.0;
    /// Recomputed after the solve through the independent weak-form path.
    double weak_residual = 0.0;
    bool converged = false;
    bool outer_contracted = true;
    std::vector<ContinuationStep> continuation;
    std::vector<double> outer_diffs;
    /// Discrete Lipschitz constant max_T |Du_T| of the returned iterate.
    double lipschitz_constant = 0.0;
    /// Energies of accepted inner iterates (nonincreasing by construction).
    std::vector<double> energy_trace;
};

struct SolveResult {
    ScalarField u;
    SolveReport report;
};

/// Thrown when the iteration budget runs out; carries the best iterate.
struct solve_budget_exhausted : std::runtime_error {
    solve_budget_exhausted(std::string what, ScalarField best_, SolveReport report_)
        : std::runtime_error(std::move(what)), best(std::move(best_)),
          report(std::move(report_)) {}
    ScalarField best;
    SolveReport report;
};

/// Thrown when the outer fixed-point iteration fails to contract.
struct outer_divergence : std::runtime_error {
    outer_divergence(std::string what, std::vector<double> trace_)
        : std::runtime_error(std::move(what)), trace(std::move(trace_)) {}
    std::vector<double> trace;
};

namespace solver_detail {

/// Right-hand side reduced to nodal samples: f(i, s) and its s-primitive.
struct NodeRhs {
    std::function<double(std::size_t, double)> f;
    std::function<double(std::size_t, double)> primitive;
    bool depends_on_s = false;
};

inline NodeRhs node_rhs(const TriMesh& mesh, const RhsSpec& rhs) {
    NodeRhs n;
    n.depends_on_s = rhs.depends_on_s;
    n.f = [&mesh, &rhs](std::size_t i, double s) {
        const auto xy = mesh.node(i);
        return rhs.f(xy[0], xy[1], s);
    };
    n.primitive = [&mesh, &rhs](std::size_t i, double s) {
        const auto xy = mesh.node(i);
        return rhs_primitive(rhs, xy[0], xy[1], s);
    };
    return n;
}

inline NodeRhs frozen_rhs(std::vector<double> values) {
    NodeRhs n;
    n.depends_on_s = false;
    auto shared = std::make_shared<std::vector<double>>(std::move(values));
    n.f = [shared](std::size_t i, double) { return (*shared)[i]; };
    n.primitive = [shared](std::size_t i, double s) { return (*shared)[i] * s; };
    return n;
}

/// Radial energy profile with optional smoothing: the modulus (t-1)_+ is
/// replaced by sqrt((t-1)_+^2 + eps^2) - eps, which tends to the exact
/// profile from below as eps -> 0 and has a C^1 seam at t = 1.
struct RadialProfile {
    double p;
    double eps;

    double modulus(double t) const {
        const double m = positive_part(t - 1.0);
        if (eps == 0.0) return m;
        if (m == 0.0) return 0.0;
        return std::sqrt(m * m + eps * eps) - eps;
    }

    double density(double t) const {
        const double phi = modulus(t);
        if (phi == 0.0) return 0.0;
        return std::pow(phi, p) / p;
    }

    /// d/dt density(t); equals (t-1)_+^{p-1} when eps = 0.
    double density_prime(double t) const {
        const double m = positive_part(t - 1.0);
        if (m == 0.0) return 0.0;
        if (eps == 0.0) return std::pow(m, p - 1.0);
        const double root = std::sqrt(m * m + eps * eps);
        return std::pow(root - eps, p - 1.0) * (m / root);
    }
};

/// Energy J(u) = sum_T area G(|Du_T|) - sum_i omega_i F(x_i, u_i) together
/// with its nodal gradient; Dirichlet (boundary) nodes are masked out of
/// the gradient.
class EnergyModel {
public:
    EnergyModel(const TriMesh& mesh, double p, double eps, NodeRhs rhs)
        : mesh_(mesh), profile_{p, eps}, rhs_(std::move(rhs)) {}

    const TriMesh& mesh() const { return mesh_; }

    double value(const std::vector<double>& u) const {
        double acc = elastic_value(u);
        const auto& omega = mesh_.lumped_masses();
        for (std::size_t i = 0; i < u.size(); ++i)
            acc -= omega[i] * rhs_.primitive(i, u[i]);
        return acc;
    }

    double value_and_gradient(const std::vector<double>& u, std::vector<double>& grad) const {
        grad.assign(u.size(), 0.0);
        double acc = 0.0;
        for (std::size_t t = 0; t < mesh_.tri_count(); ++t) {
            const auto v = mesh_.tri(t);
            VecN du = VecN::zero(2);
            for (std::size_t k = 0; k < 3; ++k) du += u[v[k]] * mesh_.hat_gradient(t, k);
            const double r = du.norm();
            const double area = mesh_.tri_area(t);
            acc += area * profile_.density(r);
            if (r > 1.0) {
                const double coeff = area * profile_.density_prime(r) / r;
                for (std::size_t k = 0; k < 3; ++k)
                    grad[v[k]] += coeff * dot(du, mesh_.hat_gradient(t, k));
            }
        }
        const auto& omega = mesh_.lumped_masses();
        for (std::size_t i = 0; i < u.size(); ++i) {
            acc -= omega[i] * rhs_.primitive(i, u[i]);
            grad[i] -= omega[i] * rhs_.f(i, u[i]);
        }
        for (std::size_t i = 0; i < u.size(); ++i)
            if (mesh_.is_boundary(i)) grad[i] = 0.0;
        return acc;
    }

    /// Interior projected-gradient max-norm per unit node weight.
    /// Non-finite entries poison the norm to +inf instead of vanishing in
    /// the max comparison.
    double residual_norm(const std::vector<double>& grad) const {
        const auto& omega = mesh_.lumped_masses();
        double m = 0.0;
        for (std::size_t i = 0; i < grad.size(); ++i) {
            if (mesh_.is_boundary(i)) continue;
            if (!std::isfinite(grad[i])) return std::numeric_limits<double>::infinity();
            m = std::max(m, std::abs(grad[i]) / omega[i]);
        }
        return m;
    }

private:
    double elastic_value(const std::vector<double>& u) const {
        double acc = 0.0;
        for (std::size_t t = 0; t < mesh_.tri_count(); ++t) {
            const auto v = mesh_.tri(t);
            VecN du = VecN::zero(2);
            for (std::size_t k = 0; k < 3; ++k) du += u[v[k]] * mesh_.hat_gradient(t, k);
            acc += mesh_.tri_area(t) * profile_.density(du.norm());
        }
        return acc;
    }

    const TriMesh& mesh_;
    RadialProfile profile_;
    NodeRhs rhs_;
};

/// Constant metric for the accelerated descent: the linear P1 stiffness
/// matrix on interior nodes (banded Cholesky). It is the exact Hessian of
/// the quadratic part of the p = 2 energy far outside the degeneracy ball
/// and a well-scaled metric otherwise.
class InteriorMetric {
public:
    explicit InteriorMetric(const TriMesh& mesh) : mesh_(mesh) {
        const std::size_t nodes = mesh.node_count();
        interior_of_node_.assign(nodes, SIZE_MAX);
        for (std::size_t i = 0; i < nodes; ++i) {
            if (!mesh.is_boundary(i)) {
                interior_of_node_[i] = nodes_of_interior_.size();
                nodes_of_interior_.push_back(i);
            }
        }
        const std::size_t n = nodes_of_interior_.size();
        // lexicographic interior numbering: farthest coupled neighbor is one
        // grid row away, so the half bandwidth is nx
        BandedSpd k(n, mesh.nx());
        for (std::size_t t = 0; t < mesh.tri_count(); ++t) {
            const auto v = mesh.tri(t);
            const double area = mesh.tri_area(t);
            for (std::size_t a = 0; a < 3; ++a) {
                const std::size_t ia = interior_of_node_[v[a]];
                if (ia == SIZE_MAX) continue;
                for (std::size_t b = 0; b < 3; ++b) {
                    const std::size_t ib = interior_of_node_[v[b]];
                    if (ib == SIZE_MAX || ib > ia) continue;
                    k.add(ia, ib, area * dot(mesh.hat_gradient(t, a), mesh.hat_gradient(t, b)));
                }
            }
        }
        metric_ = std::make_unique<BandedSpd>(std::move(k));
        metric_->factor();
    }

    std::size_t interior_count() const { return nodes_of_interior_.size(); }
    std::size_t node_of(std::size_t interior) const { return nodes_of_interior_[interior]; }

    std::vector<double> gather(const std::vector<double>& full) const {
        std::vector<double> out(nodes_of_interior_.size());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = full[nodes_of_interior_[k]];
        return out;
    }

    void scatter(const std::vector<double>& interior, std::vector<double>& full) const {
        for (std::size_t k = 0; k < interior.size(); ++k)
            full[nodes_of_interior_[k]] = interior[k];
    }

    std::vector<double> solve(const std::vector<double>& interior_rhs) const {
        return metric_->solve(interior_rhs);
    }

private:
    const TriMesh& mesh_;
    std::vector<std::size_t> interior_of_node_;
    std::vector<std::size_t> nodes_of_interior_;
    std::unique_ptr<BandedSpd> metric_;
};

struct InnerResult {
    int iterations = 0;
    double energy = 0.0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> energy_trace;  // energies of accepted iterates
};

/// Accelerated descent with a backtracking line search along the
/// metric-preconditioned gradient and a function-based momentum restart.
/// Late iterations run below the resolution of energy comparisons (the
/// target gradient norm is ~1e-12 while J = O(1)), so acceptance allows a
/// one-ulp-scale slack and convergence is judged on the weight-normalized
/// gradient norm; the best-residual iterate is what gets returned. The
/// energy trace records the running minimum, which is nonincreasing by
/// construction.
inline InnerResult solve_convex(const EnergyModel& model, const InteriorMetric& metric,
                                std::vector<double>& u, int budget, double tol) {
    const std::size_t m = metric.interior_count();
    std::vector<double> gfull;
    double jx = model.value_and_gradient(u, gfull);
    if (!std::isfinite(jx))
        throw numerical_failure("solver: non-finite energy at the initial iterate");
    double res = model.residual_norm(gfull);
    InnerResult out{0, jx, res, res <= tol, {jx}};
    if (out.converged || m == 0) return out;

    std::vector<double> x = metric.gather(u);
    std::vector<double> x_prev = x;
    std::vector<double> xbest = x;
    double res_best = res;
    double j_trace = jx;
    std::vector<double> y(m), trial(m);
    double t_momentum = 1.0;
    double alpha = 1.0;

    const auto to_full = [&](const std::vector<double>& interior) -> const std::vector<double>& {
        metric.scatter(interior, u);
        return u;
    };

    for (int iter = 1; iter <= budget; ++iter) {
        out.iterations = iter;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
        const double extrapolation = (t_momentum - 1.0) / t_next;
        for (std::size_t k = 0; k < m; ++k)
            y[k] = x[k] + extrapolation * (x[k] - x_prev[k]);

        const double jy = model.value_and_gradient(to_full(y), gfull);
        if (!std::isfinite(jy)) throw numerical_failure("solver: non-finite energy");
        const std::vector<double> gy = metric.gather(gfull);
        const std::vector<double> d = metric.solve(gy);
        double gd = 0.0;
        for (std::size_t k = 0; k < m; ++k) gd += gy[k] * d[k];

        // majorization acceptance J(z) <= J(y) - (step/2) gd: the exact
        // descent condition for this scheme; a unit step satisfies it for
        // p = 2, where the energy Hessian never exceeds the metric
        bool stepped = false;
        double jz = jy;
        if (gd > 0.0) {
            const double slack = 1e-14 * (1.0 + std::abs(jy));
            double step = std::min(alpha * 1.25, 1e4);
            for (int back = 0; back < 80 && !stepped; ++back) {
                for (std::size_t k = 0; k < m; ++k) trial[k] = y[k] - step * d[k];
                jz = model.value(to_full(trial));
                if (std::isnan(jz)) throw numerical_failure("solver: NaN in line search");
                if (jz <= jy - 0.5 * step * gd + slack) {
                    stepped = true;
                    alpha = step;
                } else {
                    step *= 0.5;
                }
            }
        }
        if (!stepped) {
            if (t_momentum > 1.0) {
                // momentum point gives no descent; restart from the iterate
                t_momentum = 1.0;
                x_prev = x;
                continue;
            }
            break;  // plain step stalled at rounding level
        }

        const double jz_grad = model.value_and_gradient(to_full(trial), gfull);
        const double res_z = model.residual_norm(gfull);
        if (res_z < res_best) {
            res_best = res_z;
            xbest = trial;
        }
        t_momentum = (jz_grad > jx + 1e-14 * (1.0 + std::abs(jx))) ? 1.0 : t_next;
        x_prev = x;
        x = trial;
        jx = jz_grad;
        if (jx < j_trace) {
            j_trace = jx;
            out.energy_trace.push_back(j_trace);
        }
        if (res_best <= tol) {
            out.converged = true;
            break;
        }
    }
    metric.scatter(xbest, u);
    out.energy = model.value(u);
    out.residual = res_best;
    return out;
}

}  // namespace solver_detail

/// Energy value and nodal gradient of
///   J(u) = sum_T area(T) G(|Du_T|) - sum_i omega_i F(x_i, u_i),
/// where F is the s-primitive of f from 0 (adaptive quadrature) and the
/// f-term uses mass-lumped nodal quadrature. Boundary (Dirichlet) nodes are
/// masked out of the gradient; the gradient at an interior node i equals
/// divergence_form(H_{p-1}(Du))_i - omega_i f(x_i, u_i).
inline std::pair<double, std::vector<double>> assemble_energy(const ScalarField& u,
                                                              const RhsSpec& rhs, double p,
                                                              double eps_reg = 0.0) {
    u.validate();
    solver_detail::EnergyModel model(*u.mesh, p, eps_reg,
                                     solver_detail::node_rhs(*u.mesh, rhs));
    std::vector<double> grad;
    const double value = model.value_and_gradient(u.values, grad);
    return {value, std::move(grad)};
}

/// Independent weak-form residual: the maximum over interior hat functions
/// of |int <H_{p-1}(Du_h), Dphi_i> - int f(x, u_h) phi_i| per unit node
/// weight. Reassembles patches from raw coordinates on purpose; it shares
/// no code with the energy/gradient assembly it cross-checks.
inline double weak_residual(const ScalarField& u, const RhsSpec& rhs, double p) {
    u.validate();
    const TriMesh& mesh = *u.mesh;
    // node -> adjacent triangle adjacency, rebuilt from scratch
    std::vector<std::vector<std::uint32_t>> patches(mesh.node_count());
    for (std::size_t t = 0; t < mesh.tri_count(); ++t)
        for (const auto v : mesh.tri(t)) patches[v].push_back(static_cast<std::uint32_t>(t));

    const ExponentParams params(p);
    double worst = 0.0;
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        if (mesh.is_boundary(i)) continue;
        double flux_term = 0.0;
        double weight = 0.0;
        for (const auto t : patches[i]) {
            const auto v = mesh.tri(t);
            const auto a = mesh.node(v[0]), b = mesh.node(v[1]), c = mesh.node(v[2]);
            const double det =
                (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            const double area = 0.5 * det;  // positive: triangles are CCW
            // P1 gradient from vertex values and raw coordinates
            const VecN grad_u{((c[1] - a[1]) * (u.values[v[1]] - u.values[v[0]]) -
                               (b[1] - a[1]) * (u.values[v[2]] - u.values[v[0]])) /
                                  det,
                              ((b[0] - a[0]) * (u.values[v[2]] - u.values[v[0]]) -
                               (c[0] - a[0]) * (u.values[v[1]] - u.values[v[0]])) /
                                  det};
            // hat gradient of node i on this triangle
            std::size_t local = 3;
            for (std::size_t k = 0; k < 3; ++k)
                if (v[k] == i) local = k;
            const auto& p0 = mesh.node(v[(local + 1) % 3]);
            const auto& p1 = mesh.node(v[(local + 2) % 3]);
            const VecN grad_hat{(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
            flux_term += area * dot(h_gamma(grad_u, params), grad_hat);
            weight += area / 3.0;
        }
        const auto xy = mesh.node(i);
        const double f_term = weight * rhs.f(xy[0], xy[1], u.values[i]);
        worst = std::max(worst, std::abs(flux_term - f_term) / weight);
    }
    return worst;
}

/// Minimizes the convex energy with Dirichlet data g. Right-hand sides that
/// depend on s are handled directly when f is non-increasing in s (the
/// energy stays convex); otherwise the damped outer fixed-point fallback is
/// engaged. The optional smoothing schedule is walked down with warm
/// starts, always finishing at eps = 0.
SolveResult minimize(const TriMesh& mesh, const std::function<double(double, double)>& g,
                     const RhsSpec& rhs, double p, const SolveConfig& config);

/// Outer fixed-point loop: freeze s in f at the current iterate, solve the
/// resulting convex problem, damp, repeat until the iterates settle.
SolveResult picard_outer(const TriMesh& mesh, const std::function<double(double, double)>& g,
                         const RhsSpec& rhs, double p, const SolveConfig& config);

namespace solver_detail {

inline std::vector<double> boundary_values(const TriMesh& mesh,
                                           const std::function<double(double, double)>& g) {
    std::vector<double> u(mesh.node_count(), 0.0);
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        if (mesh.is_boundary(i)) {
            const auto xy = mesh.node(i);
            u[i] = g(xy[0], xy[1]);
            if (!std::isfinite(u[i]))
                throw invalid_input("minimize: non-finite boundary value");
        }
    }
    return u;
}

/// Discrete harmonic extension of the boundary values: a cheap warm start
/// using the already-factored interior metric.
inline void harmonic_warm_start(const TriMesh& mesh, const InteriorMetric& metric,
                                std::vector<double>& u) {
    ScalarField lift;
    lift.mesh = &mesh;
    lift.values = u;
    const std::vector<double> r = divergence_form(gradient(lift));
    std::vector<double> rhs_int(metric.interior_count());
    for (std::size_t k = 0; k < metric.interior_count(); ++k)
        rhs_int[k] = -r[metric.node_of(k)];
    const std::vector<double> sol = metric.solve(rhs_int);
    for (std::size_t k = 0; k < metric.interior_count(); ++k) u[metric.node_of(k)] += sol[k];
}

inline SolveResult run_convex(const TriMesh& mesh, const std::vector<double>& dirichlet,
                              const NodeRhs& rhs, double p, const SolveConfig& config,
                              const InteriorMetric& metric,
                              const std::vector<double>* warm_start) {
    std::vector<double> u = dirichlet;
    if (warm_start != nullptr) {
        u = *warm_start;
    } else {
        harmonic_warm_start(mesh, metric, u);
    }

    SolveReport report;
    std::vector<double> schedule = config.eps_schedule;
    schedule.push_back(0.0);

    InnerResult last;
    int remaining = config.max_inner;
    bool stalled = false;
    for (double eps : schedule) {
        EnergyModel model(mesh, p, eps, rhs);
        last = solve_convex(model, metric, u, remaining, config.tolerance);
        stalled = !last.converged && last.iterations < remaining;
        remaining -= last.iterations;
        report.inner_iterations += last.iterations;
        report.continuation.push_back({eps, last.iterations, last.energy});
        report.energy_trace.insert(report.energy_trace.end(), last.energy_trace.begin(),
                                   last.energy_trace.end());
        if (!last.converged) break;
    }

    report.energy = last.energy;
    report.grad_residual = last.residual;
    report.converged = last.converged;
    report.outer_iterations = 1;

    ScalarField field;
    field.mesh = &mesh;
    field.values = std::move(u);
    report.lipschitz_constant = gradient(field).max_norm();

    if (!report.converged)
        throw solve_budget_exhausted(stalled
                                         ? "minimize: descent stalled at rounding level "
                                           "before reaching the tolerance"
                                         : "minimize: inner iteration budget exhausted",
                                     std::move(field), report);
    return {std::move(field), std::move(report)};
}

}  // namespace solver_detail

inline SolveResult minimize(const TriMesh& mesh,
                            const std::function<double(double, double)>& g, const RhsSpec& rhs,
                            double p, const SolveConfig& config) {
    config.validate();
    ExponentParams(p).validate();
    validate_rhs(rhs, mesh.bounds());
    if (rhs.depends_on_s && !rhs.nonincreasing_in_s) return picard_outer(mesh, g, rhs, p, config);

    const solver_detail::InteriorMetric metric(mesh);
    const std::vector<double> dirichlet = solver_detail::boundary_values(mesh, g);
    SolveResult result = solver_detail::run_convex(
        mesh, dirichlet, solver_detail::node_rhs(mesh, rhs), p, config, metric, nullptr);
    result.report.weak_residual = weak_residual(result.u, rhs, p);
    return result;
}

inline SolveResult picard_outer(const TriMesh& mesh,
                                const std::function<double(double, double)>& g,
                                const RhsSpec& rhs, double p, const SolveConfig& config) {
    config.validate();
    ExponentParams(p).validate();
    const solver_detail::InteriorMetric metric(mesh);
    const std::vector<double> dirichlet = solver_detail::boundary_values(mesh, g);

    if (!rhs.depends_on_s) {
        SolveResult result = solver_detail::run_convex(
            mesh, dirichlet, solver_detail::node_rhs(mesh, rhs), p, config, metric, nullptr);
        result.report.weak_residual = weak_residual(result.u, rhs, p);
        return result;
    }

    std::vector<double> u = dirichlet;
    solver_detail::harmonic_warm_start(mesh, metric, u);

    SolveReport report;
    report.outer_contracted = true;
    std::vector<double> frozen(mesh.node_count());
    double prev_diff = std::numeric_limits<double>::infinity();
    int grew = 0;
    bool settled = false;

    for (int outer = 1; outer <= config.max_outer; ++outer) {
        for (std::size_t i = 0; i < mesh.node_count(); ++i) {
            const auto xy = mesh.node(i);
            frozen[i] = rhs.f(xy[0], xy[1], u[i]);
        }
        SolveResult step;
        try {
            step = solver_detail::run_convex(mesh, dirichlet, solver_detail::frozen_rhs(frozen),
                                             p, config, metric, &u);
        } catch (const solve_budget_exhausted&) {
            // a frozen solve that stalls while the outer differences grow is
            // the blow-up itself, not a tolerance problem
            if (grew >= 2)
                throw outer_divergence(
                    "picard_outer: iterate differences are growing and the frozen solve stalled",
                    report.outer_diffs);
            throw;
        }
        report.inner_iterations += step.report.inner_iterations;
        report.continuation = step.report.continuation;
        report.grad_residual = step.report.grad_residual;
        report.energy = step.report.energy;

        double diff = 0.0;
        for (std::size_t i = 0; i < mesh.node_count(); ++i) {
            const double next = (1.0 - config.damping) * u[i] + config.damping * step.u.values[i];
            if (!std::isfinite(next))
                throw numerical_failure("picard_outer: non-finite iterate");
            diff = std::max(diff, std::abs(next - u[i]));
            u[i] = next;
        }
        report.outer_diffs.push_back(diff);
        report.outer_iterations = outer;
        if (diff > prev_diff * (1.0 + 1e-9)) {
            report.outer_contracted = false;
            ++grew;
        }
        prev_diff = diff;
        if (diff <= config.outer_tolerance) {
            settled = true;
            break;
        }
        if (grew >= 8)
            throw outer_divergence("picard_outer: iterate differences are growing",
                                   report.outer_diffs);
    }
    if (!settled)
        throw outer_divergence("picard_outer: outer budget exhausted before the fixed point",
                               report.outer_diffs);

    ScalarField field;
    field.mesh = &mesh;
    field.values = std::move(u);
    report.lipschitz_constant = gradient(field).max_norm();
    report.converged = true;
    report.weak_residual = weak_residual(field, rhs, p);
    return {std::move(field), std::move(report)};
}

}  // namespace wdeg
