#pragma once

#include <cmath>

#include "wdeg/errors.hpp"
#include "wdeg/vec.hpp"

namespace wdeg {

/// Exponents of the degenerate vector field: p is the growth exponent of
/// the energy, gamma the exponent of the radial profile (|xi|-1)_+^gamma.
/// The two field variants used throughout are gamma = p-1 (the flux) and
/// gamma = p/2 (its square-root companion).
struct ExponentParams {
    double p;
    double gamma;

    explicit ExponentParams(double p_) : p(p_), gamma(p_ - 1.0) { validate(); }
    ExponentParams(double p_, double gamma_) : p(p_), gamma(gamma_) { validate(); }

    ExponentParams with_gamma(double g) const { return ExponentParams(p, g); }

    void validate() const {
        if (!(std::isfinite(p) && p >= 2.0))
            throw invalid_input("ExponentParams: require p >= 2");
        if (!(std::isfinite(gamma) && gamma > 0.0))
            throw invalid_input("ExponentParams: require gamma > 0");
    }
};

/// Positive part (t)_+ = max(t, 0).
inline double positive_part(double t) { return t > 0.0 ? t : 0.0; }

/// The vector field H_gamma(xi) = (|xi|-1)_+^gamma xi/|xi|, zero at xi = 0.
/// Continuous on all of R^n; |H_gamma(xi)| = (|xi|-1)_+^gamma.
inline VecN h_gamma(const VecN& xi, const ExponentParams& params) {
    if (!xi.finite()) throw invalid_input("h_gamma: non-finite input");
    const double r = xi.norm();
    if (r <= 1.0) return VecN::zero(xi.size());
    const double scale = std::pow(r - 1.0, params.gamma) / r;
    VecN out = xi;
    return out *= scale;
}

/// Flux field H_{p-1}, the constitutive map of the equation.
inline VecN h_flux(const VecN& xi, double p) { return h_gamma(xi, ExponentParams(p, p - 1.0)); }

/// Square-root companion H_{p/2} appearing in the energy estimates.
inline VecN h_half(const VecN& xi, double p) { return h_gamma(xi, ExponentParams(p, p / 2.0)); }

/// Convex radial energy density G(t) = (t-1)_+^p / p whose derivative
/// (t-1)_+^{p-1} is the radial profile of the flux H_{p-1}.
inline double energy_density(double t, const ExponentParams& params) {
    if (!(std::isfinite(t) && t >= 0.0)) throw invalid_input("energy_density: require t >= 0");
    const double m = positive_part(t - 1.0);
    if (m == 0.0) return 0.0;
    return std::pow(m, params.p) / params.p;
}

/// Derivative of the energy density, (t-1)_+^{p-1}.
inline double energy_density_prime(double t, const ExponentParams& params) {
    if (!(std::isfinite(t) && t >= 0.0))
        throw invalid_input("energy_density_prime: require t >= 0");
    const double m = positive_part(t - 1.0);
    if (m == 0.0) return 0.0;
    return std::pow(m, params.p - 1.0);
}

/// Analytic Jacobian of the flux H_{p-1} at z != 0:
///
///   DH(z) = (p-1)(|z|-1)_+^{p-2} (z (x) z)/|z|^2
///         + (|z|-1)_+^{p-1} (I/|z| - (z (x) z)/|z|^3).
///
/// Inside the closed unit ball the Jacobian is the zero matrix; at |z| = 1
/// exactly we return the limit from inside (zero matrix), also for p = 2
/// where the radial coefficient becomes the indicator of {|z| > 1}.
inline MatN jacobian_h(const VecN& z, const ExponentParams& params) {
    if (!z.finite()) throw invalid_input("jacobian_h: non-finite input");
    const double r = z.norm();
    if (r == 0.0) throw domain_error("jacobian_h: undefined at the origin");
    const std::size_t n = z.size();
    if (r <= 1.0) return MatN::zero(n);

    const double p = params.p;
    const double m = r - 1.0;
    const double radial = (p == 2.0) ? (p - 1.0) : (p - 1.0) * std::pow(m, p - 2.0);
    const double tangential = std::pow(m, p - 1.0) / r;

    MatN out = MatN::outer(z, z);
    out *= (radial - tangential) / (r * r);
    for (std::size_t i = 0; i < n; ++i) out(i, i) += tangential;
    return out;
}

/// Extreme eigenvalues of DH_{p-1}(z): the tangential one
/// lo = (|z|-1)_+^{p-1}/|z| and the radial one hi = (p-1)(|z|-1)_+^{p-2}.
/// On the closed unit ball both are zero (the zero-exponent power at
/// p = 2 follows the indicator convention of jacobian_h).
inline std::pair<double, double> eigen_bounds(const VecN& z, const ExponentParams& params) {
    if (!z.finite()) throw invalid_input("eigen_bounds: non-finite input");
    const double r = z.norm();
    if (r == 0.0) throw domain_error("eigen_bounds: undefined at the origin");
    if (r <= 1.0) return {0.0, 0.0};
    const double p = params.p;
    const double m = r - 1.0;
    const double lo = std::pow(m, p - 1.0) / r;
    const double hi = (p == 2.0) ? (p - 1.0) : (p - 1.0) * std::pow(m, p - 2.0);
    return {lo, hi};
}

/// Ellipticity ratio hi/lo = (p-1)|xi|/(|xi|-1); diverges as |xi| -> 1+.
inline double ellipticity_ratio(const VecN& xi, const ExponentParams& params) {
    if (!xi.finite()) throw invalid_input("ellipticity_ratio: non-finite input");
    const double r = xi.norm();
    if (r == 0.0) throw domain_error("ellipticity_ratio: undefined at the origin");
    if (r <= 1.0)
        throw degenerate_point_error("ellipticity_ratio: degenerate for |xi| <= 1");
    return (params.p - 1.0) * r / (r - 1.0);
}

}  // namespace wdeg
