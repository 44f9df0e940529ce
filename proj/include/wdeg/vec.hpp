#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>

#include "wdeg/errors.hpp"

namespace wdeg {

/// Small dense vector with runtime dimension up to kMaxDim.
/// Dimension is fixed at construction; arithmetic between vectors of
/// different dimensions throws invalid_input.
inline constexpr std::size_t kMaxDim = 8;

class VecN {
public:
    VecN() = default;

    explicit VecN(std::size_t n, double fill = 0.0) : n_(n) {
        if (n == 0 || n > kMaxDim) throw invalid_input("VecN: dimension must be in [1, 8]");
        for (std::size_t i = 0; i < n_; ++i) v_[i] = fill;
    }

    VecN(std::initializer_list<double> xs) : n_(xs.size()) {
        if (n_ == 0 || n_ > kMaxDim) throw invalid_input("VecN: dimension must be in [1, 8]");
        std::size_t i = 0;
        for (double x : xs) v_[i++] = x;
    }

    static VecN zero(std::size_t n) { return VecN(n, 0.0); }

    std::size_t size() const { return n_; }
    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }

    const double* begin() const { return v_.data(); }
    const double* end() const { return v_.data() + n_; }
    double* begin() { return v_.data(); }
    double* end() { return v_.data() + n_; }

    bool finite() const {
        for (std::size_t i = 0; i < n_; ++i)
            if (!std::isfinite(v_[i])) return false;
        return true;
    }

    double squared_norm() const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += v_[i] * v_[i];
        return s;
    }
    double norm() const { return std::sqrt(squared_norm()); }

    VecN& operator+=(const VecN& o) {
        check_dim(o);
        for (std::size_t i = 0; i < n_; ++i) v_[i] += o.v_[i];
        return *this;
    }
    VecN& operator-=(const VecN& o) {
        check_dim(o);
        for (std::size_t i = 0; i < n_; ++i) v_[i] -= o.v_[i];
        return *this;
    }
    VecN& operator*=(double s) {
        for (std::size_t i = 0; i < n_; ++i) v_[i] *= s;
        return *this;
    }

    friend VecN operator+(VecN a, const VecN& b) { return a += b; }
    friend VecN operator-(VecN a, const VecN& b) { return a -= b; }
    friend VecN operator*(double s, VecN a) { return a *= s; }
    friend VecN operator*(VecN a, double s) { return a *= s; }
    friend VecN operator-(VecN a) { return a *= -1.0; }

    friend bool operator==(const VecN& a, const VecN& b) {
        if (a.n_ != b.n_) return false;
        for (std::size_t i = 0; i < a.n_; ++i)
            if (a.v_[i] != b.v_[i]) return false;
        return true;
    }

private:
    void check_dim(const VecN& o) const {
        if (n_ != o.n_) throw invalid_input("VecN: dimension mismatch");
    }

    std::array<double, kMaxDim> v_{};
    std::size_t n_ = 0;
};

inline double dot(const VecN& a, const VecN& b) {
    if (a.size() != b.size()) throw invalid_input("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Small dense square matrix, row-major, runtime dimension up to kMaxDim.
class MatN {
public:
    MatN() = default;

    explicit MatN(std::size_t n, double fill = 0.0) : n_(n) {
        if (n == 0 || n > kMaxDim) throw invalid_input("MatN: dimension must be in [1, 8]");
        for (std::size_t i = 0; i < n_ * n_; ++i) a_[i] = fill;
    }

    static MatN zero(std::size_t n) { return MatN(n, 0.0); }

    static MatN identity(std::size_t n) {
        MatN m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static MatN outer(const VecN& a, const VecN& b) {
        if (a.size() != b.size()) throw invalid_input("MatN::outer: dimension mismatch");
        MatN m(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a.size(); ++j) m(i, j) = a[i] * b[j];
        return m;
    }

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }

    MatN& operator+=(const MatN& o) {
        if (n_ != o.n_) throw invalid_input("MatN: dimension mismatch");
        for (std::size_t i = 0; i < n_ * n_; ++i) a_[i] += o.a_[i];
        return *this;
    }
    MatN& operator*=(double s) {
        for (std::size_t i = 0; i < n_ * n_; ++i) a_[i] *= s;
        return *this;
    }
    friend MatN operator+(MatN a, const MatN& b) { return a += b; }
    friend MatN operator*(double s, MatN a) { return a *= s; }

    VecN apply(const VecN& x) const {
        if (x.size() != n_) throw invalid_input("MatN::apply: dimension mismatch");
        VecN y(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    double quad_form(const VecN& z) const { return dot(z, apply(z)); }

    double max_abs() const {
        double m = 0.0;
        for (std::size_t i = 0; i < n_ * n_; ++i) m = std::max(m, std::abs(a_[i]));
        return m;
    }

    bool finite() const {
        for (std::size_t i = 0; i < n_ * n_; ++i)
            if (!std::isfinite(a_[i])) return false;
        return true;
    }

private:
    std::array<double, kMaxDim * kMaxDim> a_{};
    std::size_t n_ = 0;
};

}  // namespace wdeg
