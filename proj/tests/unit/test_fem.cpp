#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "ctstokes/fem.hpp"
#include "ctstokes/mesh.hpp"
#include "ctstokes/sparse.hpp"

using namespace ctstokes;

namespace {

double max_asymmetry(const SparseMatrix& A) {
    const SparseMatrix T = transpose(A);
    const SparseMatrix diff = add_scaled(1.0, A, -1.0, T);
    return diff.max_abs();
}

}  // namespace

TEST_CASE("space sizes and Dirichlet mask") {
    const Mesh mesh = build_structured_mesh(Rect{}, 3, 3);
    const FemSystem system = assemble_system(mesh, 1.0);
    CHECK(system.velocity.dofs == 2 * (mesh.num_vertices() + mesh.num_edges()));
    CHECK(system.pressure.dofs == mesh.num_vertices());

    for (int node = 0; node < system.velocity.scalar_nodes; ++node) {
        const Vec2 p = system.velocity.node_pos[node];
        const bool on_boundary = std::abs(std::abs(p.x) - 1.0) < 1e-14 || std::abs(std::abs(p.y) - 1.0) < 1e-14;
        CHECK(static_cast<bool>(system.velocity.dirichlet[2 * node]) == on_boundary);
        CHECK(system.velocity.dirichlet[2 * node] == system.velocity.dirichlet[2 * node + 1]);
    }

    double lumped = 0.0;
    for (double w : system.pressure.lumped_mass) lumped += w;
    CHECK(lumped == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("mass row sums recover the domain area per component") {
    const Mesh mesh = build_structured_mesh(Rect{}, 3, 3);
    const FemSystem system = assemble_system(mesh, 1.0);
    // sum_ij M[2i+c][2j+c] = int (sum phi)^2 = |D|
    double total[2] = {0.0, 0.0};
    for (int i = 0; i < system.M.rows; ++i)
        for (int k = system.M.row_ptr[i]; k < system.M.row_ptr[i + 1]; ++k) total[i % 2] += system.M.values[k];
    CHECK(total[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(total[1] == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("assembled operators are symmetric and Kp kills constants") {
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 4, 3), 1.0);
    CHECK(max_asymmetry(system.M) <= 1e-13 * system.M.max_abs());
    CHECK(max_asymmetry(system.K) <= 1e-13 * system.K.max_abs());
    CHECK(max_asymmetry(system.Kp) <= 1e-13 * system.Kp.max_abs());

    const std::vector<double> ones(system.pressure.dofs, 1.0);
    const std::vector<double> k1 = spmv(system.Kp, ones);
    for (double v : k1) CHECK(std::abs(v) <= 1e-13 * system.Kp.max_abs());
}

TEST_CASE("stiffness annihilates linear fields away from the boundary") {
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 4, 4), 1.0);
    const std::vector<double> u = interpolate_velocity(
        system, [](Vec2 x) { return Vec2{1.0 - 0.5 * x.x + 2.0 * x.y, 0.75 * x.x - x.y}; });
    const std::vector<double> ku = spmv(system.K, u);
    double interior = 0.0, boundary = 0.0;
    for (int i = 0; i < system.velocity.dofs; ++i) {
        if (system.velocity.dirichlet[i]) boundary = std::max(boundary, std::abs(ku[i]));
        else interior = std::max(interior, std::abs(ku[i]));
    }
    CHECK(interior <= 1e-12 * std::max(1.0, boundary));
    CHECK(boundary > 1e-3);  // the flux rows are genuinely nonzero
}

TEST_CASE("G equals -D^T on the Dirichlet-constrained subspace") {
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 3, 2), 1.0);
    const SparseMatrix sum = add_scaled(1.0, system.G, 1.0, transpose(system.D));
    const double scale = std::max(system.G.max_abs(), system.D.max_abs());
    for (int i = 0; i < sum.rows; ++i) {
        if (system.velocity.dirichlet[i]) continue;
        for (int k = sum.row_ptr[i]; k < sum.row_ptr[i + 1]; ++k)
            CHECK(std::abs(sum.values[k]) <= 1e-13 * scale);
    }
}

TEST_CASE("G annihilates constant pressures everywhere") {
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 3, 3), 1.0);
    const std::vector<double> c(system.pressure.dofs, 2.5);
    for (double v : spmv(system.G, c)) CHECK(std::abs(v) <= 1e-13 * system.G.max_abs());
}

TEST_CASE("interpolation") {
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 3, 3), 1.0);

    SUBCASE("constant into the pressure space") {
        const std::vector<double> p = interpolate_pressure(system, [](Vec2) { return 1.0; });
        for (double v : p) CHECK(v == 1.0);
    }

    SUBCASE("P2 reproduces linears and quadratics pointwise") {
        const std::vector<double> lin = interpolate_velocity(system, [](Vec2 x) { return Vec2{x.x + x.y, 0.0}; });
        const std::vector<double> quad = interpolate_velocity(system, [](Vec2 x) { return Vec2{x.x * x.x, 0.0}; });
        double worst_lin = 0.0, worst_quad = 0.0;
        integrate_field(system, make_quadrature(6), [&](const PointContext& pt) {
            worst_lin = std::max(worst_lin, std::abs(pt.p2_vec(lin).x - (pt.pos.x + pt.pos.y)));
            worst_quad = std::max(worst_quad, std::abs(pt.p2_vec(quad).x - pt.pos.x * pt.pos.x));
            return 0.0;
        });
        CHECK(worst_lin <= 1e-14);
        CHECK(worst_quad <= 1e-14);
    }
}

TEST_CASE("field integrals") {
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 4, 4), 1.0);
    const QuadratureRule rule = make_quadrature(4);

    CHECK(integrate_field(system, rule, [](const PointContext&) { return 1.0; }) ==
          doctest::Approx(4.0).epsilon(1e-14));

    const std::vector<double> divfree = interpolate_velocity(system, [](Vec2 x) { return Vec2{x.x, -x.y}; });
    const double div_sq = integrate_field(system, rule, [&](const PointContext& pt) {
        const double d = pt.p2_div(divfree);
        return d * d;
    });
    CHECK(div_sq <= 1e-26);

    const double grad_sq = integrate_field(system, rule, [&](const PointContext& pt) {
        return frobenius_sq(pt.p2_vec_grad(divfree));
    });
    CHECK(grad_sq == doctest::Approx(8.0).epsilon(1e-13));
}

TEST_CASE("momentum and Riesz matrices are SPD on constrained dofs") {
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 3, 3), 1.0);
    for (const SparseMatrix& A : {system.momentum_matrix(0.1), system.riesz_matrix()}) {
        CHECK(max_asymmetry(A) <= 1e-13 * A.max_abs());
        // x^T A x > 0 for a generic vector
        std::vector<double> x(A.rows);
        for (int i = 0; i < A.rows; ++i) x[i] = std::sin(1.0 + i);
        const std::vector<double> ax = spmv(A, x);
        double quad = 0.0;
        for (int i = 0; i < A.rows; ++i) quad += x[i] * ax[i];
        CHECK(quad > 0.0);
    }
    CHECK_THROWS_AS(system.momentum_matrix(0.0), std::invalid_argument);
}

TEST_CASE("assembly rejects nonpositive viscosity") {
    CHECK_THROWS_AS(assemble_system(build_structured_mesh(Rect{}, 2, 2), 0.0), std::invalid_argument);
}
