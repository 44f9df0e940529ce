#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wdeg/campaign.hpp"
#include "wdeg/config.hpp"
#include "wdeg/diagnostics.hpp"
#include "wdeg/errors.hpp"
#include "wdeg/expression.hpp"
#include "wdeg/mesh.hpp"
#include "wdeg/rhs.hpp"
#include "wdeg/rng.hpp"
#include "wdeg/solver.hpp"

namespace wdeg {

/// Boundary data: an evaluator plus the text it came from. The name
/// "manufactured" selects the catalog entry g = -x^2 whose exact solution
/// is known on the benchmark domain (1,2)x(0,1) with p = 2, f = 2.
struct BoundaryData {
    std::function<double(double, double)> g;
    std::string text;
};

inline BoundaryData boundary_from_text(const std::string& text) {
    if (text == "manufactured")
        return {[](double x, double) { return -x * x; }, text};
    const Expression e = Expression::parse(text);
    if (e.depends_on_s()) throw config_error("boundary data may depend on x, y only");
    return {[e](double x, double y) {
                ExprEnv env;
                env.x = x;
                env.y = y;
                return e.eval(env);
            },
            text};
}

struct ProblemSetup {
    Rect bounds{1.0, 2.0, 0.0, 1.0};
    std::size_t nx = 32, ny = 32;
    double p = 2.0;
    RhsSpec rhs = RhsSpec::constant(2.0);
    BoundaryData boundary = boundary_from_text("manufactured");
    SolveConfig solve;
    /// Exact solution when known (empty otherwise).
    std::function<double(double, double)> exact = [](double x, double) { return -x * x; };
};

inline const std::map<std::string, std::set<std::string>>& problem_schema();

inline RhsSpec rhs_from_config(const Config& cfg) {
    const std::string kind = cfg.get_string("problem", "rhs_kind", "manufactured");
    const bool positive = cfg.get_bool("problem", "rhs_positive", false);
    const bool noninc = cfg.get_bool("problem", "rhs_nonincreasing", false);
    const double lips = cfg.get_number("problem", "rhs_lipschitz_s", 0.0);
    const double lipx = cfg.get_number("problem", "rhs_lipschitz_x", 0.0);
    if (kind == "manufactured") return RhsSpec::constant(2.0);
    if (kind == "constant") return RhsSpec::constant(cfg.get_number("problem", "rhs_value"));
    if (kind == "expression")
        return RhsSpec::expression(cfg.get_string("problem", "rhs_expr"), positive, noninc,
                                   lips, lipx);
    if (kind == "separable")
        return RhsSpec::separable(cfg.get_string("problem", "rhs_h"),
                                  cfg.get_string("problem", "rhs_g"), positive, noninc, lips,
                                  lipx);
    throw config_error("unknown rhs_kind '" + kind +
                       "' (expected manufactured|constant|expression|separable)");
}

inline ProblemSetup problem_from_config(const Config& cfg) {
    ProblemSetup setup;
    setup.bounds = {cfg.get_number("problem", "x0", 1.0), cfg.get_number("problem", "x1", 2.0),
                    cfg.get_number("problem", "y0", 0.0), cfg.get_number("problem", "y1", 1.0)};
    setup.nx = static_cast<std::size_t>(cfg.get_integer("problem", "nx", 32));
    setup.ny = static_cast<std::size_t>(cfg.get_integer("problem", "ny", 32));
    setup.p = cfg.get_number("problem", "p", 2.0);
    setup.rhs = rhs_from_config(cfg);
    const std::string boundary = cfg.get_string("problem", "boundary", "manufactured");
    setup.boundary = boundary_from_text(boundary);

    setup.exact = nullptr;
    const std::string exact = cfg.get_string("problem", "exact", "");
    if (!exact.empty()) {
        setup.exact = boundary_from_text(exact).g;
    } else if (boundary == "manufactured" && cfg.get_string("problem", "rhs_kind",
                                                            "manufactured") == "manufactured") {
        setup.exact = [](double x, double) { return -x * x; };
    }

    setup.solve.tolerance = cfg.get_number("problem", "tolerance", 1e-8);
    setup.solve.max_inner = static_cast<int>(cfg.get_integer("problem", "max_inner", 200000));
    setup.solve.max_outer = static_cast<int>(cfg.get_integer("problem", "max_outer", 50));
    setup.solve.damping = cfg.get_number("problem", "damping", 1.0);
    setup.solve.outer_tolerance = cfg.get_number("problem", "outer_tolerance", 1e-8);
    setup.solve.eps_schedule = cfg.get_numbers("problem", "eps_schedule");
    setup.solve.validate();
    return setup;
}

struct LevelResult {
    std::size_t nx = 0, ny = 0;
    double spacing = 0.0;  // grid spacing dx
    double h = 0.0;        // mesh size (max edge)
    SolveResult result;
    double max_error = std::numeric_limits<double>::quiet_NaN();
};

inline LevelResult run_level(const ProblemSetup& setup, std::size_t nx, std::size_t ny,
                             const TriMesh& mesh) {
    LevelResult lvl;
    lvl.nx = nx;
    lvl.ny = ny;
    lvl.spacing = mesh.dx();
    lvl.h = mesh.h();
    lvl.result = minimize(mesh, setup.boundary.g, setup.rhs, setup.p, setup.solve);
    if (setup.exact) {
        // function-space max-norm error: nodes plus centroids, so both the
        // solver error and the interpolation error between nodes register
        double err = 0.0;
        for (std::size_t i = 0; i < mesh.node_count(); ++i) {
            const auto xy = mesh.node(i);
            err = std::max(err, std::abs(lvl.result.u.values[i] - setup.exact(xy[0], xy[1])));
        }
        for (std::size_t t = 0; t < mesh.tri_count(); ++t) {
            const auto v = mesh.tri(t);
            const auto c = mesh.centroid(t);
            const double mid = (lvl.result.u.values[v[0]] + lvl.result.u.values[v[1]] +
                                lvl.result.u.values[v[2]]) /
                               3.0;
            err = std::max(err, std::abs(mid - setup.exact(c[0], c[1])));
        }
        lvl.max_error = err;
    }
    return lvl;
}

/// Convergence orders between successive rows: order_k = log2(e_{k-1}/e_k),
/// meaningful when the level list doubles the resolution each step.
inline std::vector<double> measured_orders(const std::vector<LevelResult>& rows) {
    std::vector<double> orders;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const double ratio = rows[k - 1].max_error / rows[k].max_error;
        const double steps = std::log2(rows[k - 1].spacing / rows[k].spacing);
        orders.push_back(std::log2(ratio) / steps);
    }
    return orders;
}

/// The k-th seeded ordered boundary pair derived from a base expression:
/// upper = lower + a + b * bump with a > 0 and a bump vanishing on the
/// boundary, so the boundary ordering is strict while the interior
/// perturbation may have either sign.
inline std::pair<std::string, std::string> seeded_boundary_pair(const Rect& bounds,
                                                                const std::string& lower_text,
                                                                std::uint64_t seed, int k) {
    // catalog names are translated to their expression form so the pair
    // stays parseable
    const std::string lower = lower_text == "manufactured" ? "-(x^2)" : lower_text;
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(k) + 101);
    const double a = rng.uniform(0.05, 0.5);
    const double b = rng.uniform(-0.5, 0.5);
    char bump[256];
    std::snprintf(bump, sizeof(bump), "(x - %.17g)*(%.17g - x)*(y - %.17g)*(%.17g - y)",
                  bounds.x0, bounds.x1, bounds.y0, bounds.y1);
    char upper[512];
    std::snprintf(upper, sizeof(upper), "(%s) + %.17g + %.17g*%s", lower.c_str(), a, b, bump);
    return {lower, std::string(upper)};
}

/// Omega' used by default for interior diagnostics: the mesh rectangle
/// shrunk by one cell on every side.
inline Rect default_interior(const TriMesh& mesh) {
    return {mesh.bounds().x0 + mesh.dx(), mesh.bounds().x1 - mesh.dx(),
            mesh.bounds().y0 + mesh.dy(), mesh.bounds().y1 - mesh.dy()};
}

inline SampleCampaign campaign_from_config(const Config& cfg) {
    SampleCampaign c;
    c.seed = static_cast<std::uint64_t>(cfg.get_integer("campaign", "seed", 42));
    c.count = static_cast<std::uint64_t>(cfg.get_integer("campaign", "count", 100000));
    c.p_values = cfg.get_numbers("campaign", "p_values", {2.0, 3.0, 5.0});
    const auto mag = cfg.get_numbers("campaign", "magnitude_range", {1e-3, 1e3});
    if (mag.size() != 2) throw config_error("campaign: magnitude_range needs two entries");
    c.magnitude_range = {mag[0], mag[1]};
    const auto deltas = cfg.get_numbers("campaign", "shell_deltas", {1e-2, 1e-4, 1e-8});
    const auto fractions =
        cfg.get_numbers("campaign", "shell_fractions", std::vector<double>(deltas.size(), 0.1));
    if (deltas.size() != fractions.size())
        throw config_error("campaign: shell_deltas and shell_fractions differ in length");
    c.shells.clear();
    for (std::size_t k = 0; k < deltas.size(); ++k) c.shells.push_back({deltas[k], fractions[k]});
    c.dimensions.clear();
    for (double n : cfg.get_numbers("campaign", "dimensions", {2, 3}))
        c.dimensions.push_back(static_cast<std::size_t>(n));
    c.c_star_scale = cfg.get_number("campaign", "c_star_scale", 1.0);
    try {
        c.validate();
    } catch (const invalid_input& e) {
        throw config_error(std::string("campaign: ") + e.what());
    }
    return c;
}

inline const std::map<std::string, std::set<std::string>>& problem_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"problem",
         {"x0", "x1", "y0", "y1", "nx", "ny", "p", "rhs_kind", "rhs_value", "rhs_expr", "rhs_h",
          "rhs_g", "rhs_positive", "rhs_nonincreasing", "rhs_lipschitz_s", "rhs_lipschitz_x",
          "boundary", "exact", "tolerance", "max_inner", "max_outer", "damping",
          "outer_tolerance", "eps_schedule"}}};
    return schema;
}

inline const std::set<std::string>& campaign_keys() {
    static const std::set<std::string> keys = {
        "seed",         "count",       "p_values",       "magnitude_range",
        "shell_deltas", "shell_fractions", "dimensions", "c_star_scale"};
    return keys;
}

}  // namespace wdeg
