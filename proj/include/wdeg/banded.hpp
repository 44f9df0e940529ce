#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "wdeg/errors.hpp"

namespace wdeg {

/// Symmetric positive definite banded matrix with in-place Cholesky
/// factorization, O(n b^2). Stores the lower triangle by diagonals:
/// entry (j + d, j) lives at a[d * n + j], 0 <= d <= band.
class BandedSpd {
public:
    BandedSpd(std::size_t n, std::size_t band)
        : n_(n), band_(band), a_((band + 1) * n, 0.0) {}

    std::size_t size() const { return n_; }

    void add(std::size_t i, std::size_t j, double v) {
        if (j > i) std::swap(i, j);
        const std::size_t d = i - j;
        if (d > band_) throw invalid_input("BandedSpd: entry outside the band");
        a_[d * n_ + j] += v;
    }

    double at(std::size_t i, std::size_t j) const {
        if (j > i) std::swap(i, j);
        const std::size_t d = i - j;
        if (d > band_) return 0.0;
        return a_[d * n_ + j];
    }

    /// In-place Cholesky; throws numerical_failure if a pivot fails.
    void factor() {
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t k0 = j > band_ ? j - band_ : 0;
            double s = a_[j];  // diagonal entry (0, j)
            for (std::size_t k = k0; k < j; ++k) {
                const double l = a_[(j - k) * n_ + k];
                s -= l * l;
            }
            if (!(s > 0.0) || !std::isfinite(s))
                throw numerical_failure("BandedSpd: matrix is not positive definite");
            const double diag = std::sqrt(s);
            a_[j] = diag;
            const std::size_t imax = std::min(j + band_, n_ - 1);
            for (std::size_t i = j + 1; i <= imax; ++i) {
                const std::size_t kk0 = std::max(k0, i > band_ ? i - band_ : 0);
                double t = a_[(i - j) * n_ + j];
                for (std::size_t k = kk0; k < j; ++k)
                    t -= a_[(i - k) * n_ + k] * a_[(j - k) * n_ + k];
                a_[(i - j) * n_ + j] = t / diag;
            }
        }
        factored_ = true;
    }

    /// Solves A x = r given the factorization.
    std::vector<double> solve(const std::vector<double>& r) const {
        if (!factored_) throw numerical_failure("BandedSpd: solve before factor");
        std::vector<double> x(r);
        // forward substitution L y = r
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t k0 = j > band_ ? j - band_ : 0;
            double s = x[j];
            for (std::size_t k = k0; k < j; ++k) s -= a_[(j - k) * n_ + k] * x[k];
            x[j] = s / a_[j];
        }
        // back substitution L^T x = y
        for (std::size_t jj = n_; jj-- > 0;) {
            const std::size_t imax = std::min(jj + band_, n_ - 1);
            double s = x[jj];
            for (std::size_t i = jj + 1; i <= imax; ++i) s -= a_[(i - jj) * n_ + jj] * x[i];
            x[jj] = s / a_[jj];
        }
        return x;
    }

private:
    std::size_t n_, band_;
    std::vector<double> a_;
    bool factored_ = false;
};

}  // namespace wdeg
