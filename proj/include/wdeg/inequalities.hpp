#pragma once

#include <cmath>
#include <limits>

#include "wdeg/errors.hpp"
#include "wdeg/vec.hpp"
#include "wdeg/vector_field.hpp"

namespace wdeg {

/// Result of a single inequality check: margin = lhs - rhs of the
/// inequality written as lhs >= rhs. The magnitudes are kept so callers
/// can form the relative slack 1e-12 * (1 + |lhs| + |rhs|).
struct CheckDetail {
    double margin;
    double lhs;
    double rhs;

    double slack_scale() const { return 1.0 + std::abs(lhs) + std::abs(rhs); }
};

namespace detail {
inline void require_finite(const VecN& v, const char* who) {
    if (!v.finite()) throw invalid_input(std::string(who) + ": non-finite input");
}
}  // namespace detail

/// Algebraic inequality: for a, b > 0 and p >= 2,
///   ((a-1)_+^p + (b-1)_+^p)/(a^2+b^2) >= (a-1)_+^p/(4a^2) + (b-1)_+^p/(4b^2).
inline CheckDetail check_algebraic_detail(double a, double b, double p) {
    if (!(std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0))
        throw invalid_input("check_algebraic: require a, b > 0");
    if (!(p >= 2.0)) throw invalid_input("check_algebraic: require p >= 2");
    const double ma = positive_part(a - 1.0), mb = positive_part(b - 1.0);
    const double na = ma > 0.0 ? std::pow(ma, p) : 0.0;
    const double nb = mb > 0.0 ? std::pow(mb, p) : 0.0;
    const double lhs = (na + nb) / (a * a + b * b);
    const double rhs = na / (4.0 * a * a) + nb / (4.0 * b * b);
    return {lhs - rhs, lhs, rhs};
}

inline double check_algebraic(double a, double b, double p) {
    return check_algebraic_detail(a, b, p).margin;
}

/// Monotonicity estimate:
///   <H_{p-1}(xi) - H_{p-1}(eta), xi - eta> >= (4/p^2) |H_{p/2}(xi) - H_{p/2}(eta)|^2.
inline CheckDetail check_h_monotonicity_detail(const VecN& xi, const VecN& eta, double p) {
    detail::require_finite(xi, "check_h_monotonicity");
    detail::require_finite(eta, "check_h_monotonicity");
    const double lhs = dot(h_flux(xi, p) - h_flux(eta, p), xi - eta);
    const double rhs = (4.0 / (p * p)) * (h_half(xi, p) - h_half(eta, p)).squared_norm();
    return {lhs - rhs, lhs, rhs};
}

inline double check_h_monotonicity(const VecN& xi, const VecN& eta, double p) {
    return check_h_monotonicity_detail(xi, eta, p).margin;
}

/// Lipschitz-type estimate:
///   |H_{p-1}(xi) - H_{p-1}(eta)|
///     <= (p-1) (|H_{p/2}(xi)|^{(p-2)/p} + |H_{p/2}(eta)|^{(p-2)/p})
///        |H_{p/2}(xi) - H_{p/2}(eta)|,
/// with the convention 0^0 = 1 so that at p = 2 the bracket reduces to 2.
inline CheckDetail check_h_lipschitz_detail(const VecN& xi, const VecN& eta, double p) {
    detail::require_finite(xi, "check_h_lipschitz");
    detail::require_finite(eta, "check_h_lipschitz");
    const double e = (p - 2.0) / p;
    const auto power = [e](double m) {
        if (m == 0.0 && e == 0.0) return 1.0;  // 0^0 = 1 at p = 2
        return std::pow(m, e);
    };
    const VecN hx = h_half(xi, p), he = h_half(eta, p);
    const double lhs = (h_flux(xi, p) - h_flux(eta, p)).norm();
    const double rhs = (p - 1.0) * (power(hx.norm()) + power(he.norm())) * (hx - he).norm();
    return {rhs - lhs, lhs, rhs};
}

inline double check_h_lipschitz(const VecN& xi, const VecN& eta, double p) {
    return check_h_lipschitz_detail(xi, eta, p).margin;
}

/// Quantified monotonicity around a non-degenerate eta (|eta| > 1):
///   <H_{p-1}(xi) - H_{p-1}(eta), xi - eta>
///     >= (min{1, p-1}/2^{p+1}) (|eta|-1)^p / (|eta|(|xi|+|eta|)) |xi - eta|^2.
inline CheckDetail check_mon_eta_detail(const VecN& xi, const VecN& eta, double p) {
    detail::require_finite(xi, "check_mon_eta");
    detail::require_finite(eta, "check_mon_eta");
    if (!(p > 1.0)) throw invalid_input("check_mon_eta: require p > 1");
    const double re = eta.norm();
    if (!(re > 1.0)) throw precondition_error("check_mon_eta: require |eta| > 1");
    const double rx = xi.norm();
    const double lhs = dot(h_flux(xi, p) - h_flux(eta, p), xi - eta);
    const double c = std::min(1.0, p - 1.0) / std::exp2(p + 1.0);
    const double rhs =
        c * std::pow(re - 1.0, p) / (re * (rx + re)) * (xi - eta).squared_norm();
    return {lhs - rhs, lhs, rhs};
}

inline double check_mon_eta(const VecN& xi, const VecN& eta, double p) {
    return check_mon_eta_detail(xi, eta, p).margin;
}

/// Candidate constant for the pairwise ellipticity estimate, reconstructed
/// from the chain quantified-monotonicity -> summed form -> algebraic
/// inequality: c*(p) = (1/4)(1/2) min{1, p-1}/2^{p+1} = 2^{-(p+4)} for p >= 2.
inline double pair_ellipticity_constant(double p) { return std::exp2(-(p + 4.0)); }

/// Weight sum of the pairwise ellipticity estimate,
///   W(xi, eta) = (|xi|-1)_+^p/|xi|^2 + (|eta|-1)_+^p/|eta|^2.
inline double pair_ellipticity_weight(const VecN& xi, const VecN& eta, double p) {
    const double rx = xi.norm(), re = eta.norm();
    const double mx = positive_part(rx - 1.0), me = positive_part(re - 1.0);
    double w = 0.0;
    if (mx > 0.0) w += std::pow(mx, p) / (rx * rx);
    if (me > 0.0) w += std::pow(me, p) / (re * re);
    return w;
}

/// Pairwise ellipticity with the candidate constant scaled by c_scale
/// (c_scale = 1 is the reconstructed c*(p); the scale is a falsifiability
/// hook used by tests and the CLI):
///   <H_{p-1}(xi) - H_{p-1}(eta), xi - eta> >= c*(p) W(xi, eta) |xi - eta|^2.
inline CheckDetail check_pair_ellipticity_detail(const VecN& xi, const VecN& eta, double p,
                                                 double c_scale = 1.0) {
    detail::require_finite(xi, "check_pair_ellipticity");
    detail::require_finite(eta, "check_pair_ellipticity");
    if (!(p >= 2.0)) throw invalid_input("check_pair_ellipticity: require p >= 2");
    if (xi.norm() == 0.0 || eta.norm() == 0.0)
        throw precondition_error("check_pair_ellipticity: require xi, eta != 0");
    const double lhs = dot(h_flux(xi, p) - h_flux(eta, p), xi - eta);
    const double rhs = c_scale * pair_ellipticity_constant(p) *
                       pair_ellipticity_weight(xi, eta, p) * (xi - eta).squared_norm();
    return {lhs - rhs, lhs, rhs};
}

inline double check_pair_ellipticity(const VecN& xi, const VecN& eta, double p) {
    return check_pair_ellipticity_detail(xi, eta, p).margin;
}

/// Empirical ratio LHS / (W |xi-eta|^2) whose infimum over samples is the
/// observed sharp constant of the pairwise ellipticity estimate.
/// Returns +inf when the right-hand side vanishes.
inline double pair_ellipticity_ratio(const VecN& xi, const VecN& eta, double p) {
    const double den = pair_ellipticity_weight(xi, eta, p) * (xi - eta).squared_norm();
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return dot(h_flux(xi, p) - h_flux(eta, p), xi - eta) / den;
}

/// Ratio LHS / |H_{p/2}(xi) - H_{p/2}(eta)|^2 whose infimum probes the
/// sharpness of the 4/p^2 monotonicity constant.
inline double h_monotonicity_ratio(const VecN& xi, const VecN& eta, double p) {
    const double den = (h_half(xi, p) - h_half(eta, p)).squared_norm();
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    return dot(h_flux(xi, p) - h_flux(eta, p), xi - eta) / den;
}

/// Piecewise truncation profile used in the second-order estimates:
/// zero up to 1+eps, slope-2 ramp on (1+eps, 1+2eps), then s-1; odd in s.
inline double g_eps(double s, double eps) {
    const double a = std::abs(s);
    double v = 0.0;
    if (a <= 1.0 + eps)
        v = 0.0;
    else if (a < 1.0 + 2.0 * eps)
        v = 2.0 * a - 2.0 * (1.0 + eps);
    else
        v = a - 1.0;
    return s < 0.0 ? -v : v;
}

/// A.e. derivative of g_eps with the slope-2 ramp taken on the half-open
/// interval (1+eps, 1+2eps].
inline double g_eps_prime(double s, double eps) {
    const double a = std::abs(s);
    if (a <= 1.0 + eps) return 0.0;
    if (a <= 1.0 + 2.0 * eps) return 2.0;
    return 1.0;
}

/// T_eps(s) = G_eps'(s) - beta (G_eps(s)/s)(|s|/(|s|-1)_+), with the
/// convention that terms multiplied by G_eps(s) = 0 vanish.
inline double t_eps(double s, double beta, double eps) {
    const double g = g_eps(s, eps);
    double t = g_eps_prime(s, eps);
    if (g != 0.0) {
        const double m = positive_part(std::abs(s) - 1.0);
        t -= beta * (g / s) * (std::abs(s) / m);
    }
    return t;
}

/// Margin of the strengthened truncation positivity
///   T_eps(s) - 2 sigma G_eps(s)/s >= 0,
/// for beta in [0,1], eps > 0 and 0 <= sigma < (1-beta)/2 (at beta = 1 the
/// admissible range collapses and only sigma = 0 is accepted; equality can
/// then occur and is reported as a zero margin, not a violation).
inline CheckDetail check_teps_nonneg_detail(double s, double beta, double eps, double sigma) {
    if (!(std::isfinite(s) && std::isfinite(beta) && std::isfinite(eps) && std::isfinite(sigma)))
        throw invalid_input("check_teps_nonneg: non-finite input");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw precondition_error("check_teps_nonneg: require beta in [0, 1]");
    if (!(eps > 0.0)) throw precondition_error("check_teps_nonneg: require eps > 0");
    if (!(sigma >= 0.0 && (sigma == 0.0 || sigma < (1.0 - beta) / 2.0)))
        throw precondition_error("check_teps_nonneg: require sigma in [0, (1-beta)/2)");
    const double g = g_eps(s, eps);
    const double lhs = t_eps(s, beta, eps);
    const double rhs = (g == 0.0) ? 0.0 : 2.0 * sigma * g / s;
    return {lhs - rhs, lhs, rhs};
}

inline double check_teps_nonneg(double s, double beta, double eps, double sigma) {
    return check_teps_nonneg_detail(s, beta, eps, sigma).margin;
}

}  // namespace wdeg
