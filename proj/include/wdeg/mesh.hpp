#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "wdeg/errors.hpp"
#include "wdeg/vec.hpp"

namespace wdeg {

struct Rect {
    double x0, x1, y0, y1;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }

    bool contains_point(double x, double y, double tol = 0.0) const {
        return x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol;
    }
    bool contains(const Rect& inner, double tol = 0.0) const {
        return inner.x0 >= x0 - tol && inner.x1 <= x1 + tol && inner.y0 >= y0 - tol &&
               inner.y1 <= y1 + tol;
    }
};

/// Structured triangulation of a rectangle: nx-by-ny grid cells, each split
/// along its SW-NE diagonal into a lower (SW, SE, NE) and an upper
/// (SW, NE, NW) triangle, both counterclockwise. Uniform cells make every
/// triangle congruent to one of two reference shapes, so hat-function
/// gradients are precomputed once per shape. Meshes are immutable after
/// construction; refining (2nx, 2ny) nests the coarse vertex set.
class TriMesh {
public:
    struct Edge {
        std::uint32_t tri_a, tri_b;    // adjacent triangles
        std::uint32_t node_a, node_b;  // endpoints
        double length;
        /// Grid spacing across the edge, the normalization of gradient-jump
        /// quotients: dx for vertical edges, dy for horizontal edges, the
        /// edge length itself for cell diagonals.
        double cross_spacing;
    };

    static TriMesh build(const Rect& bounds, std::size_t nx, std::size_t ny) {
        if (!(bounds.x0 < bounds.x1 && bounds.y0 < bounds.y1))
            throw invalid_input("TriMesh: bounds must be ordered with positive extent");
        if (nx < 2 || ny < 2) throw invalid_input("TriMesh: require nx, ny >= 2");
        return TriMesh(bounds, nx, ny);
    }

    const Rect& bounds() const { return bounds_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    double dx() const { return dx_; }
    double dy() const { return dy_; }
    /// Mesh size: the maximum edge length (the cell diagonal).
    double h() const { return h_; }

    std::size_t node_count() const { return (nx_ + 1) * (ny_ + 1); }
    std::size_t tri_count() const { return 2 * nx_ * ny_; }

    std::size_t node_index(std::size_t i, std::size_t j) const { return j * (nx_ + 1) + i; }
    std::array<double, 2> node(std::size_t v) const {
        const std::size_t j = v / (nx_ + 1), i = v % (nx_ + 1);
        return {bounds_.x0 + static_cast<double>(i) * dx_,
                bounds_.y0 + static_cast<double>(j) * dy_};
    }
    bool is_boundary(std::size_t v) const {
        const std::size_t j = v / (nx_ + 1), i = v % (nx_ + 1);
        return i == 0 || i == nx_ || j == 0 || j == ny_;
    }

    /// Vertex indices of triangle t, counterclockwise.
    std::array<std::uint32_t, 3> tri(std::size_t t) const {
        const std::size_t cell = t / 2;
        const std::size_t j = cell / nx_, i = cell % nx_;
        const auto sw = static_cast<std::uint32_t>(node_index(i, j));
        const auto se = static_cast<std::uint32_t>(node_index(i + 1, j));
        const auto ne = static_cast<std::uint32_t>(node_index(i + 1, j + 1));
        const auto nw = static_cast<std::uint32_t>(node_index(i, j + 1));
        if (t % 2 == 0) return {sw, se, ne};
        return {sw, ne, nw};
    }

    double tri_area(std::size_t) const { return 0.5 * dx_ * dy_; }

    std::array<double, 2> centroid(std::size_t t) const {
        const auto v = tri(t);
        const auto a = node(v[0]), b = node(v[1]), c = node(v[2]);
        return {(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0};
    }

    /// Gradient of the hat function of local vertex k (0..2) on triangle t.
    const VecN& hat_gradient(std::size_t t, std::size_t k) const {
        return hat_grads_[t % 2][k];
    }

    const std::vector<Edge>& interior_edges() const { return edges_; }

    /// Lumped node weights omega_i = sum of adjacent triangle areas / 3;
    /// they add up to the mesh area.
    const std::vector<double>& lumped_masses() const { return lumped_; }

    /// Triangle containing (x, y); points outside the rectangle are
    /// clamped onto it, ties on cell diagonals go to the lower triangle.
    std::size_t locate_triangle(double x, double y) const {
        const auto clamp = [](double v, double lo, double hi) {
            return v < lo ? lo : (v > hi ? hi : v);
        };
        x = clamp(x, bounds_.x0, bounds_.x1);
        y = clamp(y, bounds_.y0, bounds_.y1);
        auto cell_of = [&](double v, double v0, double dv, std::size_t count) {
            auto c = static_cast<std::ptrdiff_t>(std::floor((v - v0) / dv));
            if (c < 0) c = 0;
            if (c >= static_cast<std::ptrdiff_t>(count)) c = static_cast<std::ptrdiff_t>(count) - 1;
            return static_cast<std::size_t>(c);
        };
        const std::size_t i = cell_of(x, bounds_.x0, dx_, nx_);
        const std::size_t j = cell_of(y, bounds_.y0, dy_, ny_);
        const double lx = (x - (bounds_.x0 + static_cast<double>(i) * dx_)) / dx_;
        const double ly = (y - (bounds_.y0 + static_cast<double>(j) * dy_)) / dy_;
        const std::size_t cell = j * nx_ + i;
        return 2 * cell + (ly <= lx ? 0 : 1);
    }

private:
    TriMesh(const Rect& bounds, std::size_t nx, std::size_t ny)
        : bounds_(bounds),
          nx_(nx),
          ny_(ny),
          dx_(bounds.width() / static_cast<double>(nx)),
          dy_(bounds.height() / static_cast<double>(ny)),
          h_(std::hypot(bounds.width() / static_cast<double>(nx),
                        bounds.height() / static_cast<double>(ny))) {
        // reference hat gradients: lower (SW, SE, NE) and upper (SW, NE, NW)
        hat_grads_[0] = {VecN{-1.0 / dx_, 0.0}, VecN{1.0 / dx_, -1.0 / dy_},
                         VecN{0.0, 1.0 / dy_}};
        hat_grads_[1] = {VecN{0.0, -1.0 / dy_}, VecN{1.0 / dx_, 0.0},
                         VecN{-1.0 / dx_, 1.0 / dy_}};

        const double diag = h_;
        for (std::size_t j = 0; j < ny_; ++j) {
            for (std::size_t i = 0; i < nx_; ++i) {
                const std::size_t cell = j * nx_ + i;
                const auto lower = static_cast<std::uint32_t>(2 * cell);
                const auto upper = lower + 1;
                // cell diagonal SW-NE
                edges_.push_back({lower, upper, static_cast<std::uint32_t>(node_index(i, j)),
                                  static_cast<std::uint32_t>(node_index(i + 1, j + 1)), diag,
                                  diag});
                // vertical edge shared with the cell to the right
                if (i + 1 < nx_) {
                    edges_.push_back({lower, static_cast<std::uint32_t>(2 * (cell + 1) + 1),
                                      static_cast<std::uint32_t>(node_index(i + 1, j)),
                                      static_cast<std::uint32_t>(node_index(i + 1, j + 1)), dy_,
                                      dx_});
                }
                // horizontal edge shared with the cell above
                if (j + 1 < ny_) {
                    edges_.push_back({upper, static_cast<std::uint32_t>(2 * (cell + nx_)),
                                      static_cast<std::uint32_t>(node_index(i, j + 1)),
                                      static_cast<std::uint32_t>(node_index(i + 1, j + 1)), dx_,
                                      dy_});
                }
            }
        }

        lumped_.assign(node_count(), 0.0);
        const double third = tri_area(0) / 3.0;
        for (std::size_t t = 0; t < tri_count(); ++t)
            for (const auto v : tri(t)) lumped_[v] += third;
    }

    Rect bounds_;
    std::size_t nx_, ny_;
    double dx_, dy_, h_;
    std::array<std::array<VecN, 3>, 2> hat_grads_;
    std::vector<Edge> edges_;
    std::vector<double> lumped_;
};

/// Nodal values of a piecewise-linear function on a mesh.
struct ScalarField {
    const TriMesh* mesh = nullptr;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const TriMesh& m, double fill = 0.0)
        : mesh(&m), values(m.node_count(), fill) {}

    static ScalarField sample(const TriMesh& m, const std::function<double(double, double)>& f) {
        ScalarField u(m);
        for (std::size_t v = 0; v < m.node_count(); ++v) {
            const auto xy = m.node(v);
            u.values[v] = f(xy[0], xy[1]);
        }
        return u;
    }

    void validate() const {
        if (mesh == nullptr) throw invalid_input("ScalarField: no mesh");
        if (values.size() != mesh->node_count())
            throw invalid_input("ScalarField: value count must equal node count");
        for (double v : values)
            if (!std::isfinite(v)) throw invalid_input("ScalarField: non-finite entry");
    }
};

/// Per-triangle constant gradients of a piecewise-linear function.
struct GradField {
    const TriMesh* mesh = nullptr;
    std::vector<VecN> per_tri;

    GradField() = default;
    explicit GradField(const TriMesh& m) : mesh(&m), per_tri(m.tri_count(), VecN::zero(2)) {}

    double max_norm() const {
        double m = 0.0;
        for (const auto& g : per_tri) m = std::max(m, g.norm());
        return m;
    }
};

/// Exact gradient of the piecewise-linear interpolant, one constant vector
/// per triangle; linear in the nodal values.
inline GradField gradient(const ScalarField& u) {
    u.validate();
    const TriMesh& m = *u.mesh;
    GradField g(m);
    for (std::size_t t = 0; t < m.tri_count(); ++t) {
        const auto v = m.tri(t);
        VecN acc = VecN::zero(2);
        for (std::size_t k = 0; k < 3; ++k) acc += u.values[v[k]] * m.hat_gradient(t, k);
        g.per_tri[t] = acc;
    }
    return g;
}

/// Weak divergence assembly: r_i = sum_T area(T) <w_T, Dphi_i|_T> for every
/// nodal hat function phi_i (boundary nodes included; callers restrict).
/// Satisfies the adjoint identity <r, u> = sum_T area <w_T, (Du)_T>.
inline std::vector<double> divergence_form(const GradField& w) {
    if (w.mesh == nullptr) throw invalid_input("divergence_form: no mesh");
    const TriMesh& m = *w.mesh;
    if (w.per_tri.size() != m.tri_count())
        throw invalid_input("divergence_form: one flux vector per triangle required");
    std::vector<double> r(m.node_count(), 0.0);
    for (std::size_t t = 0; t < m.tri_count(); ++t) {
        const auto v = m.tri(t);
        const double area = m.tri_area(t);
        for (std::size_t k = 0; k < 3; ++k)
            r[v[k]] += area * dot(w.per_tri[t], m.hat_gradient(t, k));
    }
    return r;
}

/// Total area of the triangles inside the closed sub-rectangle omega that
/// satisfy the predicate. omega must be contained in the mesh rectangle.
inline double element_measure(const TriMesh& m, const Rect& omega,
                              const std::function<bool(std::size_t)>& predicate) {
    const double tol = 1e-12 * (std::abs(m.bounds().width()) + std::abs(m.bounds().height()));
    if (!m.bounds().contains(omega, tol))
        throw invalid_input("element_measure: sub-rectangle not contained in the mesh");
    double total = 0.0;
    for (std::size_t t = 0; t < m.tri_count(); ++t) {
        const auto v = m.tri(t);
        bool inside = true;
        for (std::size_t k = 0; k < 3 && inside; ++k) {
            const auto xy = m.node(v[k]);
            inside = omega.contains_point(xy[0], xy[1], tol);
        }
        if (inside && predicate(t)) total += m.tri_area(t);
    }
    return total;
}

/// Triangles fully inside the closed sub-rectangle (by vertex containment).
inline std::vector<std::uint32_t> triangles_in(const TriMesh& m, const Rect& omega) {
    const double tol = 1e-12 * (std::abs(m.bounds().width()) + std::abs(m.bounds().height()));
    std::vector<std::uint32_t> out;
    for (std::size_t t = 0; t < m.tri_count(); ++t) {
        const auto v = m.tri(t);
        bool inside = true;
        for (std::size_t k = 0; k < 3 && inside; ++k) {
            const auto xy = m.node(v[k]);
            inside = omega.contains_point(xy[0], xy[1], tol);
        }
        if (inside) out.push_back(static_cast<std::uint32_t>(t));
    }
    return out;
}

/// Plain-text export: one node per line, "index x y boundary [value]".
inline void write_node_table(std::ostream& os, const TriMesh& m,
                             const std::vector<double>* values = nullptr) {
    char buf[160];
    for (std::size_t v = 0; v < m.node_count(); ++v) {
        const auto xy = m.node(v);
        if (values != nullptr) {
            std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g %d %.17g\n", v, xy[0], xy[1],
                          m.is_boundary(v) ? 1 : 0, (*values)[v]);
        } else {
            std::snprintf(buf, sizeof(buf), "%zu %.17g %.17g %d\n", v, xy[0], xy[1],
                          m.is_boundary(v) ? 1 : 0);
        }
        os << buf;
    }
}

/// Plain-text export: one triangle per line, "index v0 v1 v2".
inline void write_triangle_table(std::ostream& os, const TriMesh& m) {
    for (std::size_t t = 0; t < m.tri_count(); ++t) {
        const auto v = m.tri(t);
        os << t << ' ' << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    }
}

}  // namespace wdeg
