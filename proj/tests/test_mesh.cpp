#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "wdeg/mesh.hpp"
#include "wdeg/rng.hpp"

using namespace wdeg;

namespace {
const Rect kUnit{0.0, 1.0, 0.0, 1.0};
}

TEST_CASE("mesh construction counts") {
    const TriMesh mesh = TriMesh::build(kUnit, 2, 2);
    REQUIRE(mesh.node_count() == 9);
    REQUIRE(mesh.tri_count() == 8);
    REQUIRE_THROWS_AS(TriMesh::build(kUnit, 1, 1), invalid_input);
    REQUIRE_THROWS_AS(TriMesh::build(Rect{1.0, 1.0, 0.0, 1.0}, 2, 2), invalid_input);
}

TEST_CASE("triangles are counterclockwise and partition the rectangle") {
    for (std::size_t n : {2, 3, 5, 8}) {
        const TriMesh mesh = TriMesh::build(Rect{-1.0, 2.0, 0.5, 1.25}, n, n + 1);
        double total = 0.0;
        for (std::size_t t = 0; t < mesh.tri_count(); ++t) {
            const auto v = mesh.tri(t);
            const auto a = mesh.node(v[0]), b = mesh.node(v[1]), c = mesh.node(v[2]);
            const double signed_area =
                0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
            REQUIRE(signed_area > 0.0);
            REQUIRE(signed_area == Catch::Approx(mesh.tri_area(t)));
            total += signed_area;
        }
        REQUIRE(total == Catch::Approx(mesh.bounds().area()).epsilon(1e-12));
    }
}

TEST_CASE("boundary flags mark exactly the rectangle boundary") {
    const TriMesh mesh = TriMesh::build(kUnit, 4, 3);
    std::size_t boundary = 0;
    for (std::size_t v = 0; v < mesh.node_count(); ++v) {
        const auto xy = mesh.node(v);
        const bool on_edge = xy[0] == 0.0 || xy[0] == 1.0 || xy[1] == 0.0 || xy[1] == 1.0;
        REQUIRE(mesh.is_boundary(v) == on_edge);
        if (on_edge) ++boundary;
    }
    REQUIRE(boundary == 2 * 4 + 2 * 3);  // perimeter nodes
}

TEST_CASE("mesh size and refinement nesting") {
    const TriMesh coarse = TriMesh::build(kUnit, 4, 4);
    const TriMesh fine = TriMesh::build(kUnit, 8, 8);
    REQUIRE(coarse.h() == Catch::Approx(std::hypot(0.25, 0.25)));
    // every coarse vertex appears in the fine mesh
    for (std::size_t v = 0; v < coarse.node_count(); ++v) {
        const auto xy = coarse.node(v);
        const auto fine_id = fine.node_index(
            static_cast<std::size_t>(std::lround(xy[0] * 8)),
            static_cast<std::size_t>(std::lround(xy[1] * 8)));
        const auto fxy = fine.node(fine_id);
        REQUIRE(fxy[0] == Catch::Approx(xy[0]).margin(1e-15));
        REQUIRE(fxy[1] == Catch::Approx(xy[1]).margin(1e-15));
    }
}

TEST_CASE("gradient reproduces affine fields exactly") {
    const TriMesh mesh = TriMesh::build(Rect{0.0, 2.0, -1.0, 1.0}, 5, 4);
    const ScalarField u = ScalarField::sample(mesh, [](double x, double y) {
        return 3.0 * x - 2.0 * y + 0.75;
    });
    const GradField g = gradient(u);
    for (const auto& du : g.per_tri) {
        REQUIRE(du[0] == Catch::Approx(3.0).margin(1e-13));
        REQUIRE(du[1] == Catch::Approx(-2.0).margin(1e-13));
    }
    const ScalarField c = ScalarField::sample(mesh, [](double, double) { return 4.2; });
    for (const auto& du : gradient(c).per_tri) REQUIRE(du.norm() <= 1e-13);
}

TEST_CASE("gradient is linear in the nodal values") {
    const TriMesh mesh = TriMesh::build(kUnit, 6, 6);
    Rng rng(3);
    ScalarField u(mesh), v(mesh);
    for (auto& x : u.values) x = rng.uniform(-1.0, 1.0);
    for (auto& x : v.values) x = rng.uniform(-1.0, 1.0);
    ScalarField w(mesh);
    const double a = 1.7, b = -0.4;
    for (std::size_t i = 0; i < w.values.size(); ++i)
        w.values[i] = a * u.values[i] + b * v.values[i];
    const GradField gu = gradient(u), gv = gradient(v), gw = gradient(w);
    for (std::size_t t = 0; t < mesh.tri_count(); ++t) {
        const VecN expect = a * gu.per_tri[t] + b * gv.per_tri[t];
        REQUIRE((gw.per_tri[t] - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
    }
}

TEST_CASE("interpolation gradient error is O(h) for a quadratic") {
    double prev_err = -1.0;
    for (std::size_t n : {8, 16, 32}) {
        const TriMesh mesh = TriMesh::build(kUnit, n, n);
        const ScalarField u = ScalarField::sample(mesh, [](double x, double) { return x * x; });
        const GradField g = gradient(u);
        double err = 0.0;
        for (std::size_t t = 0; t < mesh.tri_count(); ++t) {
            const auto c = mesh.centroid(t);
            err = std::max(err, std::abs(g.per_tri[t][0] - 2.0 * c[0]));
        }
        if (prev_err > 0.0) REQUIRE(err < 0.75 * prev_err);
        prev_err = err;
    }
}

TEST_CASE("divergence form: constants, adjoint identity, zero flux") {
    const TriMesh mesh = TriMesh::build(Rect{0.0, 1.5, 0.0, 1.0}, 6, 5);
    GradField w(mesh);
    for (auto& f : w.per_tri) f = VecN{0.7, -0.3};
    const auto r = divergence_form(w);
    for (std::size_t i = 0; i < mesh.node_count(); ++i)
        if (!mesh.is_boundary(i)) REQUIRE(std::abs(r[i]) <= 1e-13);

    Rng rng(5);
    ScalarField u(mesh);
    for (auto& x : u.values) x = rng.uniform(-2.0, 2.0);
    GradField flux(mesh);
    for (auto& f : flux.per_tri) f = VecN{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const auto ru = divergence_form(flux);
    double lhs = 0.0;
    for (std::size_t i = 0; i < mesh.node_count(); ++i) lhs += ru[i] * u.values[i];
    const GradField du = gradient(u);
    double rhs = 0.0;
    for (std::size_t t = 0; t < mesh.tri_count(); ++t)
        rhs += mesh.tri_area(t) * dot(flux.per_tri[t], du.per_tri[t]);
    REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-12));

    GradField zero(mesh);
    for (double v : divergence_form(zero)) REQUIRE(v == 0.0);
}

TEST_CASE("divergence of gradient matches the dense stiffness oracle") {
    const TriMesh mesh = TriMesh::build(Rect{0.0, 1.0, 0.0, 2.0}, 5, 7);
    Rng rng(8);
    ScalarField u(mesh);
    for (auto& x : u.values) x = rng.uniform(-1.0, 1.0);
    const auto r = divergence_form(gradient(u));
    const auto k = oracles::dense_stiffness(mesh);
    for (std::size_t i = 0; i < mesh.node_count(); ++i) {
        double expect = 0.0;
        for (std::size_t j = 0; j < mesh.node_count(); ++j) expect += k[i][j] * u.values[j];
        REQUIRE(r[i] == Catch::Approx(expect).margin(1e-12));
    }
}

TEST_CASE("stiffness bilinear form is SPSD with constant kernel") {
    const TriMesh mesh = TriMesh::build(kUnit, 16, 16);  // 17x17 nodes
    const auto k = oracles::dense_stiffness(mesh);
    const auto eig = oracles::jacobi_eigenvalues(k);
    REQUIRE(eig.front() >= -1e-10);
    REQUIRE(std::abs(eig.front()) <= 1e-10);  // constants in the kernel
    REQUIRE(eig[1] > 1e-6);                   // and nothing else
    // K * 1 = 0
    ScalarField ones(mesh, 1.0);
    for (double v : divergence_form(gradient(ones))) REQUIRE(std::abs(v) <= 1e-12);
}

TEST_CASE("element measure") {
    const TriMesh mesh = TriMesh::build(kUnit, 8, 8);
    REQUIRE(element_measure(mesh, kUnit, [](std::size_t) { return true; }) ==
            Catch::Approx(1.0));
    REQUIRE(element_measure(mesh, kUnit, [](std::size_t) { return false; }) == 0.0);

    const ScalarField u = ScalarField::sample(mesh, [](double x, double) { return 0.5 * x; });
    const GradField g = gradient(u);
    REQUIRE(element_measure(mesh, kUnit,
                            [&](std::size_t t) { return g.per_tri[t].norm() <= 1.0; }) ==
            Catch::Approx(1.0));

    const Rect inner{0.25, 0.75, 0.25, 0.75};
    REQUIRE(element_measure(mesh, inner, [](std::size_t) { return true; }) ==
            Catch::Approx(0.25));
    REQUIRE_THROWS_AS(element_measure(mesh, Rect{0.0, 2.0, 0.0, 1.0},
                                      [](std::size_t) { return true; }),
                      invalid_input);
}

TEST_CASE("interior edges are consistent") {
    const TriMesh mesh = TriMesh::build(kUnit, 4, 4);
    // 3 edge families: nx*ny diagonals, (nx-1)*ny vertical, nx*(ny-1) horizontal
    REQUIRE(mesh.interior_edges().size() == 16 + 12 + 12);
    for (const auto& e : mesh.interior_edges()) {
        REQUIRE(e.tri_a != e.tri_b);
        const auto a = mesh.node(e.node_a), b = mesh.node(e.node_b);
        REQUIRE(std::hypot(a[0] - b[0], a[1] - b[1]) == Catch::Approx(e.length));
        // the shared edge belongs to both triangles
        for (auto tri : {e.tri_a, e.tri_b}) {
            const auto v = mesh.tri(tri);
            REQUIRE(std::count(v.begin(), v.end(), e.node_a) == 1);
            REQUIRE(std::count(v.begin(), v.end(), e.node_b) == 1);
        }
    }
}

TEST_CASE("lumped masses sum to the area") {
    const TriMesh mesh = TriMesh::build(Rect{0.0, 2.0, 0.0, 3.0}, 5, 6);
    double sum = 0.0;
    for (double w : mesh.lumped_masses()) sum += w;
    REQUIRE(sum == Catch::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("locate_triangle agrees with centroids") {
    const TriMesh mesh = TriMesh::build(Rect{-1.0, 3.0, 2.0, 4.0}, 7, 5);
    for (std::size_t t = 0; t < mesh.tri_count(); ++t) {
        const auto c = mesh.centroid(t);
        REQUIRE(mesh.locate_triangle(c[0], c[1]) == t);
    }
}

// The library fixes the SW-NE cell diagonal; the mirrored triangulation
// must behave identically for the P1 identities. Assembled here from raw
// coordinates as a robustness variant.
TEST_CASE("mirrored-diagonal variant reproduces P1 identities") {
    const std::size_t n = 6;
    const double dx = 1.0 / n;
    std::vector<std::array<double, 2>> nodes;
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t i = 0; i <= n; ++i) nodes.push_back({i * dx, j * dx});
    std::vector<std::array<std::size_t, 3>> tris;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t sw = j * (n + 1) + i, se = sw + 1;
            const std::size_t nw = sw + n + 1, ne = nw + 1;
            tris.push_back({sw, se, nw});  // SE-NW diagonal
            tris.push_back({se, ne, nw});
        }
    }
    const auto value = [](double x, double y) { return 3.0 * x - 2.0 * y + 0.5; };
    double area_total = 0.0;
    for (const auto& t : tris) {
        const auto a = nodes[t[0]], b = nodes[t[1]], c = nodes[t[2]];
        const double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        REQUIRE(det > 0.0);
        area_total += 0.5 * det;
        const double gx = ((c[1] - a[1]) * (value(b[0], b[1]) - value(a[0], a[1])) -
                           (b[1] - a[1]) * (value(c[0], c[1]) - value(a[0], a[1]))) /
                          det;
        const double gy = ((b[0] - a[0]) * (value(c[0], c[1]) - value(a[0], a[1])) -
                           (c[0] - a[0]) * (value(b[0], b[1]) - value(a[0], a[1]))) /
                          det;
        REQUIRE(gx == Catch::Approx(3.0).margin(1e-12));
        REQUIRE(gy == Catch::Approx(-2.0).margin(1e-12));
    }
    REQUIRE(area_total == Catch::Approx(1.0).epsilon(1e-12));
}
