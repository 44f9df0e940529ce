#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wdeg/errors.hpp"
#include "wdeg/mesh.hpp"
#include "wdeg/solver.hpp"
#include "wdeg/vector_field.hpp"

namespace wdeg {

/// Parameters of the singular-kernel quadratures: kernel exponent gamma,
/// potential order alpha, and the edge count of the coarse base-point
/// lattice that approximates sup_x.
struct KernelParams {
    double gamma = 0.0;
    double alpha = 1.0;
    std::size_t lattice = 5;
    std::size_t dimension = 2;

    void validate() const {
        const auto n = static_cast<double>(dimension);
        if (!(gamma >= 0.0 && gamma < n))
            throw precondition_error("KernelParams: require 0 <= gamma < n");
        if (!(alpha > 0.0 && alpha < n))
            throw precondition_error("KernelParams: require 0 < alpha < n");
        if (lattice < 1) throw precondition_error("KernelParams: lattice must be >= 1");
    }
};

/// A quadrature cell of a singular-kernel sum: midpoint, measure, and the
/// (kernel-free) integrand value on the cell.
struct WeightedCell {
    VecN center;
    double measure;
    double weight;
};

namespace diag_detail {

inline double unit_ball_volume(std::size_t n) {
    const double nd = static_cast<double>(n);
    return std::pow(3.14159265358979323846, nd / 2.0) / std::tgamma(nd / 2.0 + 1.0);
}

}  // namespace diag_detail

/// Midpoint-rule sum of w(y) |x-y|^{-kappa} over the cells, with the cell
/// containing x (self_index, if any) replaced by the exact integral over
/// the ball of equal measure centered at x. Deterministic and dimension
/// generic; requires kappa < n for the self cell to be integrable.
inline double singular_kernel_sum(const std::vector<WeightedCell>& cells, const VecN& x,
                                  double kappa, std::size_t self_index = SIZE_MAX) {
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);
    if (!(kappa < nd)) throw precondition_error("singular_kernel_sum: require kappa < n");
    double acc = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        if (cells[c].weight == 0.0) continue;
        if (c == self_index) {
            // ball of the same measure: integral of |y|^-kappa over B_r is
            // n V_n r^(n-kappa) / (n-kappa)
            const double vn = diag_detail::unit_ball_volume(n);
            const double r = std::pow(cells[c].measure / vn, 1.0 / nd);
            acc += cells[c].weight * nd * vn * std::pow(r, nd - kappa) / (nd - kappa);
        } else {
            const double dist = (x - cells[c].center).norm();
            acc += cells[c].weight * cells[c].measure / std::pow(dist, kappa);
        }
    }
    return acc;
}

/// Potential of order alpha generated by a per-triangle field:
/// sum_T area(T) f_T / |x - c_T|^{n-alpha}, self cell by the equal-area
/// disc rule.
inline double riesz_potential(const TriMesh& mesh, const std::vector<double>& per_tri_values,
                              double alpha, const std::array<double, 2>& x) {
    constexpr double n = 2.0;
    if (!(alpha > 0.0 && alpha < n))
        throw precondition_error("riesz_potential: require 0 < alpha < n");
    if (per_tri_values.size() != mesh.tri_count())
        throw invalid_input("riesz_potential: one value per triangle required");
    std::vector<WeightedCell> cells(mesh.tri_count());
    for (std::size_t t = 0; t < mesh.tri_count(); ++t) {
        const auto c = mesh.centroid(t);
        cells[t] = {VecN{c[0], c[1]}, mesh.tri_area(t), per_tri_values[t]};
    }
    const std::size_t self = mesh.locate_triangle(x[0], x[1]);
    return singular_kernel_sum(cells, VecN{x[0], x[1]}, n - alpha, self);
}

/// Areas of {T in omega : |Du_T| <= threshold} for each threshold; the
/// default family is {1, 1 - sqrt(h), 1 + sqrt(h)}.
inline std::vector<std::pair<double, double>> degeneracy_measure(
    const ScalarField& u, const Rect& omega, std::vector<double> thresholds = {}) {
    u.validate();
    const TriMesh& mesh = *u.mesh;
    if (thresholds.empty()) {
        const double root_h = std::sqrt(mesh.h());
        thresholds = {1.0, 1.0 - root_h, 1.0 + root_h};
    }
    const GradField g = gradient(u);
    std::vector<std::pair<double, double>> out;
    out.reserve(thresholds.size());
    for (double theta : thresholds) {
        const double area = element_measure(
            mesh, omega, [&](std::size_t t) { return g.per_tri[t].norm() <= theta; });
        out.emplace_back(theta, area);
    }
    return out;
}

struct InverseWeightResult {
    double eps_floor = 0.0;
    double value = 0.0;
    bool divergent = false;
    std::array<double, 2> argmax = {0.0, 0.0};
};

namespace diag_detail {

inline std::vector<std::array<double, 2>> base_lattice(const Rect& omega, std::size_t edge) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(edge * edge);
    for (std::size_t j = 0; j < edge; ++j)
        for (std::size_t i = 0; i < edge; ++i)
            pts.push_back({omega.x0 + omega.width() * (static_cast<double>(i) + 0.5) /
                                          static_cast<double>(edge),
                           omega.y0 + omega.height() * (static_cast<double>(j) + 0.5) /
                                          static_cast<double>(edge)});
    return pts;
}

}  // namespace diag_detail

/// Sup over the base-point lattice of
///   int_omega dy / (((|Du|-1)_+ + eps_floor)^{pt} |x-y|^gamma).
/// With eps_floor = 0 a degenerate triangle makes the weight infinite; the
/// result is then flagged divergent instead of silently truncated.
inline InverseWeightResult inverse_weight_integral(const ScalarField& u, double p, double t,
                                                   double gamma, double eps_floor,
                                                   const Rect& omega,
                                                   std::size_t lattice = 5) {
    u.validate();
    const TriMesh& mesh = *u.mesh;
    if (!(t >= 0.0 && t <= (p - 2.0) / p))
        throw precondition_error("inverse_weight_integral: require t in [0, (p-2)/p]");
    if (!(gamma >= 0.0 && gamma < 2.0))
        throw precondition_error("inverse_weight_integral: require 0 <= gamma < 2");
    if (!(eps_floor >= 0.0))
        throw precondition_error("inverse_weight_integral: require eps_floor >= 0");

    const double pt = p * t;
    const GradField g = gradient(u);
    const auto tris = triangles_in(mesh, omega);

    InverseWeightResult out;
    out.eps_floor = eps_floor;
    std::vector<WeightedCell> cells;
    cells.reserve(tris.size());
    for (const auto t_idx : tris) {
        const double m = positive_part(g.per_tri[t_idx].norm() - 1.0) + eps_floor;
        double w = 1.0;
        if (pt > 0.0) {
            if (m == 0.0) {
                out.divergent = true;
                out.value = std::numeric_limits<double>::infinity();
            } else {
                w = std::pow(m, -pt);
            }
        }
        const auto c = mesh.centroid(t_idx);
        cells.push_back({VecN{c[0], c[1]}, mesh.tri_area(t_idx), w});
    }
    if (out.divergent) return out;

    // map global triangle index -> cell index for the self-cell rule
    std::vector<std::size_t> cell_of(mesh.tri_count(), SIZE_MAX);
    for (std::size_t k = 0; k < tris.size(); ++k) cell_of[tris[k]] = k;

    double best = -1.0;
    for (const auto& x : diag_detail::base_lattice(omega, lattice)) {
        const std::size_t self = cell_of[mesh.locate_triangle(x[0], x[1])];
        const double v = singular_kernel_sum(cells, VecN{x[0], x[1]}, gamma, self);
        if (v > best) {
            best = v;
            out.argmax = x;
        }
    }
    out.value = best;
    return out;
}

/// Discrete counterparts of the two weighted second-order integrals. The
/// second derivatives of the piecewise-linear solution live on edges: for
/// each interior edge inside omega the squared gradient jump, normalized by
/// the grid spacing across the edge, stands in for |D^2 u|^2, weighted by
/// the face average of the degenerate coefficient and restricted to the
/// non-degenerate side(s). Component j of the jump feeds the per-direction
/// integral i1; the full jump feeds i2. In two dimensions the kernel
/// exponent gamma must be zero, so no base-point sup is taken.
inline std::pair<double, double> second_order_integrals(const ScalarField& u, double p,
                                                        double beta, double gamma,
                                                        const Rect& omega) {
    u.validate();
    const TriMesh& mesh = *u.mesh;
    if (!(beta >= 0.0 && beta <= 1.0))
        throw precondition_error("second_order_integrals: require beta in [0, 1]");
    if (gamma != 0.0)
        throw precondition_error("second_order_integrals: gamma must be 0 in dimension 2");

    const GradField g = gradient(u);
    std::vector<char> inside(mesh.tri_count(), 0);
    for (const auto t : triangles_in(mesh, omega)) inside[t] = 1;

    const auto weight_full = [&](std::size_t t) {
        const double m = positive_part(g.per_tri[t].norm() - 1.0);
        if (m <= 0.0) return 0.0;
        return std::pow(m, p - 1.0 - beta);
    };
    const auto weight_component = [&](std::size_t t, std::size_t j) {
        const double m = positive_part(g.per_tri[t].norm() - 1.0);
        const double mj = std::abs(g.per_tri[t][j]) - 1.0;
        if (m <= 0.0 || mj <= 0.0) return 0.0;
        const double num = std::pow(m, p - 1.0);
        return beta == 0.0 ? num : num / std::pow(mj, beta);
    };

    double i1 = 0.0, i2 = 0.0;
    for (const auto& e : mesh.interior_edges()) {
        if (!inside[e.tri_a] || !inside[e.tri_b]) continue;
        const VecN jump = g.per_tri[e.tri_a] - g.per_tri[e.tri_b];
        const double q = e.length / e.cross_spacing;
        i2 += q * jump.squared_norm() * 0.5 * (weight_full(e.tri_a) + weight_full(e.tri_b));
        for (std::size_t j = 0; j < 2; ++j)
            i1 += q * jump[j] * jump[j] * 0.5 *
                  (weight_component(e.tri_a, j) + weight_component(e.tri_b, j));
    }
    return {i1, i2};
}

/// Discrete W^{1,2} seminorms of the per-triangle fields H_{p/2}(Du_h) and
/// H_{p-1}(Du_h), by the same edge-jump convention as
/// second_order_integrals. Returns (s_half, s_flux).
inline std::pair<double, double> hdiff_seminorms(const ScalarField& u, double p,
                                                 const Rect& omega) {
    u.validate();
    const TriMesh& mesh = *u.mesh;
    const GradField g = gradient(u);
    std::vector<char> inside(mesh.tri_count(), 0);
    for (const auto t : triangles_in(mesh, omega)) inside[t] = 1;

    std::vector<VecN> h_half_field(mesh.tri_count(), VecN::zero(2));
    std::vector<VecN> h_flux_field(mesh.tri_count(), VecN::zero(2));
    for (std::size_t t = 0; t < mesh.tri_count(); ++t) {
        if (!inside[t]) continue;
        h_half_field[t] = h_half(g.per_tri[t], p);
        h_flux_field[t] = h_flux(g.per_tri[t], p);
    }

    double s_half = 0.0, s_flux = 0.0;
    for (const auto& e : mesh.interior_edges()) {
        if (!inside[e.tri_a] || !inside[e.tri_b]) continue;
        const double q = e.length / e.cross_spacing;
        s_half += q * (h_half_field[e.tri_a] - h_half_field[e.tri_b]).squared_norm();
        s_flux += q * (h_flux_field[e.tri_a] - h_flux_field[e.tri_b]).squared_norm();
    }
    return {s_half, s_flux};
}

/// Everything the comparison experiment reports.
struct ComparisonVerdict {
    double min_difference = 0.0;  // min over interior nodes of (v - u)
    double tol_cmp = 0.0;
    std::vector<std::uint32_t> violating_nodes;  // where v - u < -tol_cmp
    std::vector<std::pair<double, double>> degeneracy_lower, degeneracy_upper;
    SolveReport report_lower, report_upper;
    ScalarField lower, upper;

    bool passed() const { return violating_nodes.empty(); }
};

/// Solves the same problem under two ordered boundary data and verifies the
/// discrete ordering. tol_cmp <= 0 selects the default 10 h.
inline ComparisonVerdict compare(const TriMesh& mesh,
                                 const std::function<double(double, double)>& g_lower,
                                 const std::function<double(double, double)>& g_upper,
                                 const RhsSpec& rhs, double p, const SolveConfig& config,
                                 double tol_cmp = -1.0) {
    if (!rhs.positive || !rhs.nonincreasing_in_s)
        throw precondition_error(
            "compare: right-hand side must be positive and non-increasing in s");
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        if (!mesh.is_boundary(i)) continue;
        const auto xy = mesh.node(i);
        if (g_lower(xy[0], xy[1]) > g_upper(xy[0], xy[1]) + 1e-12)
            throw precondition_error("compare: boundary ordering g_lower <= g_upper violated");
    }

    ComparisonVerdict verdict;
    verdict.tol_cmp = tol_cmp > 0.0 ? tol_cmp : 10.0 * mesh.h();

    SolveResult lo = minimize(mesh, g_lower, rhs, p, config);
    SolveResult hi = minimize(mesh, g_upper, rhs, p, config);

    verdict.min_difference = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        if (mesh.is_boundary(i)) continue;
        const double d = hi.u.values[i] - lo.u.values[i];
        verdict.min_difference = std::min(verdict.min_difference, d);
        if (d < -verdict.tol_cmp) verdict.violating_nodes.push_back(static_cast<std::uint32_t>(i));
    }

    const Rect inner{mesh.bounds().x0 + mesh.dx(), mesh.bounds().x1 - mesh.dx(),
                     mesh.bounds().y0 + mesh.dy(), mesh.bounds().y1 - mesh.dy()};
    verdict.degeneracy_lower = degeneracy_measure(lo.u, inner);
    verdict.degeneracy_upper = degeneracy_measure(hi.u, inner);
    verdict.report_lower = std::move(lo.report);
    verdict.report_upper = std::move(hi.report);
    verdict.lower = std::move(lo.u);
    verdict.upper = std::move(hi.u);
    return verdict;
}

/// Exponent bookkeeping of the weighted Sobolev inequality.
struct SobolevParams {
    double t = 1.0;
    double gamma = 0.0;
    double q = 3.0;
    std::size_t dimension = 2;
    std::size_t lattice = 5;

    /// 1/q* = (1/q)(1 + 1/t - gamma/(n t)) - 1/n.
    double q_star() const {
        const double n = static_cast<double>(dimension);
        const double inv = (1.0 / q) * (1.0 + 1.0 / t - gamma / (n * t)) - 1.0 / n;
        return 1.0 / inv;
    }

    /// Throws precondition_error naming the first failing admissibility
    /// condition: (i) q > (n-gamma)/t, (ii) q > 1 + 1/t,
    /// (iii) q < (n-gamma)/t + n.
    void check_conditions() const {
        const double n = static_cast<double>(dimension);
        if (!(t > 0.0)) throw precondition_error("sobolev: require t > 0");
        if (!(gamma >= 0.0 && gamma < n)) throw precondition_error("sobolev: require gamma < n");
        if (!(q > (n - gamma) / t))
            throw precondition_error("sobolev: condition (i) q > (n-gamma)/t fails");
        if (!(q > 1.0 + 1.0 / t))
            throw precondition_error("sobolev: condition (ii) q > 1 + 1/t fails");
        if (!(q < (n - gamma) / t + n))
            throw precondition_error("sobolev: condition (iii) q < (n-gamma)/t + n fails");
    }
};

struct SobolevReport {
    double q_star = 0.0;
    double big_k = 0.0;       // sup_x of the inverse-weight kernel integral
    double c_n = 0.0;         // dimensional constant (fitted once on rho = 1)
    double budget = 0.0;      // c_n * K^{1/(qt)}
    double max_ratio = 0.0;   // max over the test set of |u|_{q*} / |Du|_{q,rho}
    std::vector<double> ratios;
    bool within_budget = false;
};

/// Evaluates the inequality |u|_{L^{q*}} <= C |Du|_{L^q(rho)} on a test set
/// of fields vanishing on the boundary. Pass c_n <= 0 to fit the
/// dimensional constant from this run (done once on rho = 1 and then kept).
inline SobolevReport sobolev_check(const TriMesh& mesh, const std::vector<ScalarField>& test_set,
                                   const std::vector<double>& rho_per_tri,
                                   const SobolevParams& params, double c_n = -1.0) {
    params.check_conditions();
    if (test_set.empty()) throw precondition_error("sobolev_check: empty test set");
    if (rho_per_tri.size() != mesh.tri_count())
        throw invalid_input("sobolev_check: one weight per triangle required");

    SobolevReport report;
    report.q_star = params.q_star();
    if (report.q_star < params.q - 1e-12)
        throw numerical_failure("sobolev_check: q* < q, exponent bookkeeping broken");

    // K = sup_x int rho^{-t} |x-y|^{-gamma}
    std::vector<WeightedCell> cells(mesh.tri_count());
    for (std::size_t t = 0; t < mesh.tri_count(); ++t) {
        const auto c = mesh.centroid(t);
        const double rho = rho_per_tri[t];
        const double w = rho > 0.0 ? std::pow(rho, -params.t)
                                   : std::numeric_limits<double>::infinity();
        cells[t] = {VecN{c[0], c[1]}, mesh.tri_area(t), w};
    }
    report.big_k = 0.0;
    for (const auto& x : diag_detail::base_lattice(mesh.bounds(), params.lattice)) {
        const double v = singular_kernel_sum(cells, VecN{x[0], x[1]}, params.gamma,
                                             mesh.locate_triangle(x[0], x[1]));
        report.big_k = std::max(report.big_k, v);
    }

    const double boundary_tol = 0.0;
    for (const auto& u : test_set) {
        u.validate();
        if (u.mesh != &mesh) throw invalid_input("sobolev_check: field on a different mesh");
        for (std::size_t i = 0; i < mesh.node_count(); ++i)
            if (mesh.is_boundary(i) && std::abs(u.values[i]) > boundary_tol)
                throw precondition_error("sobolev_check: test function must vanish on the boundary");

        double num = 0.0;  // |u|_{q*}^{q*} by centroid quadrature
        for (std::size_t t = 0; t < mesh.tri_count(); ++t) {
            const auto v = mesh.tri(t);
            const double mid =
                (u.values[v[0]] + u.values[v[1]] + u.values[v[2]]) / 3.0;
            num += mesh.tri_area(t) * std::pow(std::abs(mid), report.q_star);
        }
        const GradField g = gradient(u);
        double den = 0.0;  // |Du|_{q,rho}^q
        for (std::size_t t = 0; t < mesh.tri_count(); ++t)
            den += mesh.tri_area(t) * rho_per_tri[t] * std::pow(g.per_tri[t].norm(), params.q);
        if (den <= 0.0)
            throw precondition_error("sobolev_check: test function has vanishing gradient");
        report.ratios.push_back(std::pow(num, 1.0 / report.q_star) /
                                std::pow(den, 1.0 / params.q));
    }
    report.max_ratio = *std::max_element(report.ratios.begin(), report.ratios.end());

    const double exponent = 1.0 / (params.q * params.t);
    if (c_n <= 0.0) {
        report.c_n = report.max_ratio / std::pow(report.big_k, exponent);
        report.budget = report.max_ratio;
        report.within_budget = true;
    } else {
        report.c_n = c_n;
        report.budget = c_n * std::pow(report.big_k, exponent);
        report.within_budget = report.max_ratio <= report.budget * (1.0 + 1e-12);
    }
    return report;
}

/// Polynomial bump test functions vanishing on the boundary: the product
/// bump X(1-X)Y(1-Y) (normalized coordinates) times low-order monomials.
inline std::vector<ScalarField> standard_test_bumps(const TriMesh& mesh, std::size_t count = 10) {
    const Rect b = mesh.bounds();
    std::vector<ScalarField> out;
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(ScalarField::sample(mesh, [&, k](double x, double y) {
            const double xn = (x - b.x0) / b.width();
            const double yn = (y - b.y0) / b.height();
            const double bump = 16.0 * xn * (1.0 - xn) * yn * (1.0 - yn);
            double poly = 1.0;
            switch (k % 10) {
                case 0: poly = 1.0; break;
                case 1: poly = xn; break;
                case 2: poly = yn; break;
                case 3: poly = xn * xn; break;
                case 4: poly = xn * yn; break;
                case 5: poly = yn * yn; break;
                case 6: poly = xn * xn * xn; break;
                case 7: poly = xn * xn * yn; break;
                case 8: poly = xn * yn * yn; break;
                case 9: poly = 1.0 - 2.0 * xn * yn; break;
            }
            return bump * poly;
        }));
    }
    return out;
}

/// Everything the per-solution regularity diagnostics report.
struct RegularityReport {
    double h = 0.0;
    double p = 0.0;
    double beta = 0.0;
    double t_exponent = 0.0;
    std::vector<std::pair<double, double>> degeneracy;  // (threshold, area)
    double i1 = 0.0, i2 = 0.0;
    std::vector<InverseWeightResult> inverse_weight;  // one per eps floor
    double seminorm_half = 0.0, seminorm_flux = 0.0;
};

inline RegularityReport regularity_report(const ScalarField& u, double p, double beta, double t,
                                          const Rect& omega,
                                          std::vector<double> eps_floors = {1e-2, 1e-4, 0.0},
                                          const KernelParams& kernel = {}) {
    kernel.validate();
    if (kernel.dimension == 2 && kernel.gamma != 0.0)
        throw precondition_error("regularity_report: gamma must be 0 in dimension 2");
    RegularityReport rep;
    rep.h = u.mesh->h();
    rep.p = p;
    rep.beta = beta;
    rep.t_exponent = t;
    rep.degeneracy = degeneracy_measure(u, omega);
    std::tie(rep.i1, rep.i2) = second_order_integrals(u, p, beta, kernel.gamma, omega);
    for (double eps : eps_floors)
        rep.inverse_weight.push_back(
            inverse_weight_integral(u, p, t, kernel.gamma, eps, omega, kernel.lattice));
    std::tie(rep.seminorm_half, rep.seminorm_flux) = hdiff_seminorms(u, p, omega);
    return rep;
}

}  // namespace wdeg
