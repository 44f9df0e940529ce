#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "wdeg/errors.hpp"
#include "wdeg/expression.hpp"
#include "wdeg/mesh.hpp"
#include "wdeg/quadrature.hpp"

namespace wdeg {

/// Right-hand side f(x, s) with the structural metadata the comparison
/// experiments rely on: positivity (f >= c1 > 0 on compacts), monotone
/// non-increase in s, and the two Lipschitz constants (L in s, M in x).
struct RhsSpec {
    std::function<double(double x, double y, double s)> f;
    bool depends_on_s = false;
    bool positive = false;
    bool nonincreasing_in_s = false;
    double lipschitz_s = 0.0;  // L
    double lipschitz_x = 0.0;  // M
    std::string description;

    double operator()(double x, double y, double s) const { return f(x, y, s); }

    static RhsSpec constant(double c) {
        RhsSpec r;
        r.f = [c](double, double, double) { return c; };
        r.depends_on_s = false;
        r.positive = c > 0.0;
        r.nonincreasing_in_s = true;
        r.lipschitz_s = 0.0;
        r.lipschitz_x = 0.0;
        r.description = "constant " + std::to_string(c);
        return r;
    }

    /// Separable form h(x, y) * g(s) given as expression strings.
    static RhsSpec separable(const std::string& h_text, const std::string& g_text,
                             bool positive, bool nonincreasing, double lipschitz_s,
                             double lipschitz_x) {
        Expression h = Expression::parse(h_text);
        Expression g = Expression::parse(g_text);
        if (h.depends_on_s())
            throw invalid_input("RhsSpec::separable: h may depend on x, y only");
        RhsSpec r;
        r.f = [h, g](double x, double y, double s) {
            ExprEnv env;
            env.x = x;
            env.y = y;
            env.s = s;
            return h.eval(env) * g.eval(env);
        };
        r.depends_on_s = g.depends_on_s();
        r.positive = positive;
        r.nonincreasing_in_s = nonincreasing;
        r.lipschitz_s = lipschitz_s;
        r.lipschitz_x = lipschitz_x;
        r.description = "separable (" + h_text + ") * (" + g_text + ")";
        return r;
    }

    /// General expression in x, y, s.
    static RhsSpec expression(const std::string& text, bool positive, bool nonincreasing,
                              double lipschitz_s, double lipschitz_x) {
        Expression e = Expression::parse(text);
        RhsSpec r;
        r.f = [e](double x, double y, double s) {
            ExprEnv env;
            env.x = x;
            env.y = y;
            env.s = s;
            return e.eval(env);
        };
        r.depends_on_s = e.depends_on_s();
        r.positive = positive;
        r.nonincreasing_in_s = nonincreasing;
        r.lipschitz_s = lipschitz_s;
        r.lipschitz_x = lipschitz_x;
        r.description = text;
        return r;
    }
};

/// Primitive F(x, s) = integral of f(x, .) from 0 to s, by adaptive
/// quadrature. F is defined up to an additive function of x which does not
/// move minimizers, so 0 is a fine base point.
inline double rhs_primitive(const RhsSpec& rhs, double x, double y, double s) {
    if (s == 0.0) return 0.0;
    if (!rhs.depends_on_s) return rhs.f(x, y, 0.0) * s;
    const auto integrand = [&](double t) { return rhs.f(x, y, t); };
    return adaptive_simpson(integrand, 0.0, s, 1e-12 * std::max(1.0, std::abs(s)));
}

/// Probes the declared monotonicity flag: samples s -> f(x, s) on a grid of
/// spatial points and solution values and checks that finite differences
/// never increase beyond tolerance. Throws invalid_input when the flag is
/// inconsistent with the evaluator.
inline void validate_rhs(const RhsSpec& rhs, const Rect& domain,
                         std::pair<double, double> s_range = {-4.0, 4.0},
                         double tolerance = 1e-10) {
    if (!rhs.f) throw invalid_input("RhsSpec: missing evaluator");
    if (!rhs.nonincreasing_in_s) return;
    constexpr int kSpatial = 5, kValues = 33;
    for (int ix = 0; ix <= kSpatial; ++ix) {
        for (int iy = 0; iy <= kSpatial; ++iy) {
            const double x = domain.x0 + domain.width() * ix / kSpatial;
            const double y = domain.y0 + domain.height() * iy / kSpatial;
            double prev = rhs.f(x, y, s_range.first);
            for (int k = 1; k <= kValues; ++k) {
                const double s =
                    s_range.first + (s_range.second - s_range.first) * k / kValues;
                const double cur = rhs.f(x, y, s);
                if (cur > prev + tolerance)
                    throw invalid_input(
                        "RhsSpec: nonincreasing_in_s is set but f increases in s");
                prev = cur;
            }
        }
    }
}

}  // namespace wdeg
