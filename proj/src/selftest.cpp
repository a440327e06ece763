#include "ctstokes/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ctstokes/dense.hpp"
#include "ctstokes/estimators.hpp"
#include "ctstokes/experiment.hpp"
#include "ctstokes/fem.hpp"
#include "ctstokes/manufactured.hpp"
#include "ctstokes/mesh.hpp"
#include "ctstokes/quadrature.hpp"
#include "ctstokes/scheme.hpp"
#include "ctstokes/sparse.hpp"

namespace ctstokes {

namespace {

struct Check {
    std::string name;
    std::function<std::string()> run;  // empty string = pass
};

std::string expect(bool ok, const std::string& detail) { return ok ? std::string{} : detail; }

std::string expect_near(double value, double reference, double tol, const std::string& what) {
    if (std::abs(value - reference) <= tol) return {};
    std::ostringstream os;
    os << what << ": got " << value << ", expected " << reference << " (tol " << tol << ")";
    return os.str();
}

std::string expect_rel(double value, double reference, double rel_tol, const std::string& what) {
    const double scale = std::max(std::abs(reference), 1e-300);
    return expect_near(value, reference, rel_tol * scale, what);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double norm2(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

// closed-form reference-triangle monomial integral: a! b! / (a+b+2)!
double monomial_integral(int a, int b) {
    double num = 1.0;
    for (int i = 2; i <= a; ++i) num *= i;
    for (int i = 2; i <= b; ++i) num *= i;
    double den = 1.0;
    for (int i = 2; i <= a + b + 2; ++i) den *= i;
    return num / den;
}

double apply_rule(const QuadratureRule& rule, const std::function<double(double, double)>& f) {
    double s = 0.0;
    for (int k = 0; k < rule.num_points(); ++k) s += rule.weight[k] * f(rule.xi[k], rule.eta[k]);
    return s;
}

// --- mesh ---

std::string check_mesh_counts() {
    const Mesh mesh = build_structured_mesh(Rect{}, 2, 2);
    if (auto e = expect(mesh.num_vertices() == 9, "vertex count != 9"); !e.empty()) return e;
    if (auto e = expect(mesh.num_triangles() == 8, "triangle count != 8"); !e.empty()) return e;
    // Euler relation oracle: E = V + F - 1
    if (auto e = expect(mesh.num_edges() == 9 + 8 - 1, "edge count violates Euler relation"); !e.empty()) return e;
    int boundary = 0;
    for (auto b : mesh.boundary_vertex) boundary += b;
    return expect(boundary == 8, "boundary vertex count != 2(nx+ny)");
}

std::string check_mesh_euler_sweep() {
    for (int nx = 1; nx <= 5; ++nx)
        for (int ny = 1; ny <= 5; ++ny) {
            const Mesh mesh = build_structured_mesh(Rect{0.0, 2.0, -0.5, 1.0}, nx, ny);
            if (mesh.num_vertices() - mesh.num_edges() + mesh.num_triangles() != 1)
                return "V - E + F != 1 at nx=" + std::to_string(nx) + " ny=" + std::to_string(ny);
            int boundary_edges = 0;
            for (auto b : mesh.boundary_edge) boundary_edges += b;
            if (boundary_edges != 2 * (nx + ny)) return "boundary edge count != 2(nx+ny)";
        }
    return {};
}

std::string check_mesh_areas() {
    const MeshStatistics stats = mesh_statistics(build_structured_mesh(Rect{}, 2, 2));
    if (auto e = expect_near(stats.min_area, 0.5, 1e-14, "min area"); !e.empty()) return e;
    if (auto e = expect_near(stats.max_area, 0.5, 1e-14, "max area"); !e.empty()) return e;
    return expect_rel(stats.total_area, 4.0, 1e-12, "total area");
}

// --- sparse ---

std::string check_spmv_dense_oracle() {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 10;
    DenseMatrix R;
    R.rows = R.cols = n;
    R.data.resize(n * n);
    for (auto& v : R.data) v = dist(rng);
    // SPD: R^T R + I
    DenseMatrix A;
    A.rows = A.cols = n;
    A.data.assign(n * n, 0.0);
    TripletBuilder builder(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = (i == j) ? 1.0 : 0.0;
            for (int k = 0; k < n; ++k) s += R.at(k, i) * R.at(k, j);
            A.at(i, j) = s;
            builder.add(i, j, s);
        }
    const SparseMatrix S = builder.compress();
    std::vector<double> x(n);
    for (auto& v : x) v = dist(rng);
    const std::vector<double> ys = spmv(S, x);
    const std::vector<double> yd = dense_matvec(A, x);
    return expect(max_abs_diff(ys, yd) <= 1e-13, "sparse and dense products differ beyond 1e-13");
}

std::string check_cg_2x2() {
    TripletBuilder builder(2, 2);
    builder.add(0, 0, 4.0);
    builder.add(0, 1, 1.0);
    builder.add(1, 0, 1.0);
    builder.add(1, 1, 3.0);
    const SparseMatrix A = builder.compress();
    const std::vector<double> b = {1.0, 2.0};
    auto [x, report] = cg_solve(A, b);
    if (!report.converged) return "CG did not converge";
    if (auto e = expect_near(x[0], 1.0 / 11.0, 1e-12, "x[0]"); !e.empty()) return e;
    return expect_near(x[1], 7.0 / 11.0, 1e-12, "x[1]");
}

std::string check_cg_singular_neumann() {
    // 1D Neumann Laplacian on 3 nodes, kernel = constants.
    TripletBuilder builder(3, 3);
    builder.add(0, 0, 1.0);
    builder.add(0, 1, -1.0);
    builder.add(1, 0, -1.0);
    builder.add(1, 1, 2.0);
    builder.add(1, 2, -1.0);
    builder.add(2, 1, -1.0);
    builder.add(2, 2, 1.0);
    const SparseMatrix A = builder.compress();
    const std::vector<double> b = {1.0, 0.0, -1.0};
    SolveOptions opts;
    opts.nullspace = Nullspace::Constants;
    auto [x, report] = cg_solve(A, b, opts);
    if (!report.converged) return "CG did not converge";
    const std::vector<double> oracle = dense_zero_mean_solve(dense_from_sparse(A), b);
    return expect(max_abs_diff(x, oracle) <= 1e-10, "deflated CG differs from dense zero-mean oracle");
}

// --- quadrature / fem ---

std::string check_quadrature_monomials() {
    if (auto e = expect_rel(apply_rule(make_quadrature(4), [](double x, double y) { return x * x * y * y; }),
                            monomial_integral(2, 2), 1e-14, "degree-4 rule on x^2 y^2");
        !e.empty())
        return e;
    if (auto e = expect_near(apply_rule(make_quadrature(6), [](double x, double y) { return x * x * x * y * y * y; }),
                             monomial_integral(3, 3), 1e-15, "degree-6 rule on x^3 y^3");
        !e.empty())
        return e;
    // full exactness sweep, relative 1e-14
    for (int degree : {2, 4, 6}) {
        const QuadratureRule rule = make_quadrature(degree);
        for (int a = 0; a <= degree; ++a)
            for (int b = 0; a + b <= degree; ++b) {
                const double value = apply_rule(rule, [&](double x, double y) {
                    return std::pow(x, a) * std::pow(y, b);
                });
                if (auto e = expect_rel(value, monomial_integral(a, b), 1e-13,
                                        "degree " + std::to_string(degree) + " rule on x^" + std::to_string(a) +
                                            " y^" + std::to_string(b));
                    !e.empty())
                    return e;
            }
    }
    return {};
}

std::string check_stiffness_patch_test() {
    // stiffness times a globally linear velocity field vanishes at rows whose
    // basis function does not touch the boundary (interior flux cancellation)
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 4, 4), 1.0);
    const std::vector<double> u = interpolate_velocity(
        system, [](Vec2 x) { return Vec2{0.3 + 2.0 * x.x - 0.7 * x.y, -1.0 + 0.25 * x.x + 1.5 * x.y}; });
    const std::vector<double> ku = spmv(system.K, u);
    double interior_max = 0.0, boundary_max = 0.0;
    for (int i = 0; i < system.velocity.dofs; ++i) {
        if (system.velocity.dirichlet[i]) boundary_max = std::max(boundary_max, std::abs(ku[i]));
        else interior_max = std::max(interior_max, std::abs(ku[i]));
    }
    // boundary rows carry the flux, so they set the scale
    return expect(interior_max <= 1e-12 * std::max(1.0, boundary_max),
                  "interior rows of K * linear field not zero");
}

std::string check_adjoint_identity() {
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 3, 3), 1.0);
    const SparseMatrix Dt = transpose(system.D);
    const SparseMatrix sum = add_scaled(1.0, system.G, 1.0, Dt);
    const double scale = std::max(system.D.max_abs(), system.G.max_abs());
    double worst = 0.0;
    for (int i = 0; i < sum.rows; ++i) {
        if (system.velocity.dirichlet[i]) continue;  // identity holds for v in H^1_0
        for (int k = sum.row_ptr[i]; k < sum.row_ptr[i + 1]; ++k) worst = std::max(worst, std::abs(sum.values[k]));
    }
    return expect(worst <= 1e-13 * scale, "G + D^T nonzero on constrained rows");
}

std::string check_p2_reproduces_quadratics() {
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 3, 3), 1.0);
    const std::vector<double> coeffs =
        interpolate_velocity(system, [](Vec2 x) { return Vec2{x.x * x.x, x.x * x.y - 2.0 * x.y * x.y}; });
    // evaluate at quadrature points of a degree-6 rule and compare pointwise
    double worst = 0.0;
    integrate_field(system, make_quadrature(6), [&](const PointContext& pt) {
        const Vec2 v = pt.p2_vec(coeffs);
        worst = std::max(worst, std::abs(v.x - pt.pos.x * pt.pos.x));
        worst = std::max(worst, std::abs(v.y - (pt.pos.x * pt.pos.y - 2.0 * pt.pos.y * pt.pos.y)));
        return 0.0;
    });
    return expect(worst <= 1e-14, "P2 interpolation does not reproduce quadratics");
}

std::string check_grad_norm_value() {
    const FemSystem system = assemble_system(build_structured_mesh(Rect{}, 4, 4), 1.0);
    const std::vector<double> coeffs = interpolate_velocity(system, [](Vec2 x) { return Vec2{x.x, -x.y}; });
    const double value = integrate_field(system, make_quadrature(4), [&](const PointContext& pt) {
        return frobenius_sq(pt.p2_vec_grad(coeffs));
    });
    return expect_rel(value, 8.0, 1e-12, "int |grad (x,-y)|^2 over (-1,1)^2");
}

// --- manufactured solution ---

std::string check_velocity_gradient_fd() {
    const AnalyticStokes exact{3.0, 1.0};
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> pos(-0.95, 0.95), time(0.0, 1.0);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const double t = time(rng);
        const Vec2 x{pos(rng), pos(rng)};
        const Mat2 g = exact.velocity_gradient(t, x);
        const Vec2 dx = exact.velocity(t, {x.x + h, x.y}) - exact.velocity(t, {x.x - h, x.y});
        const Vec2 dy = exact.velocity(t, {x.x, x.y + h}) - exact.velocity(t, {x.x, x.y - h});
        const double worst =
            std::max(std::max(std::abs(g.a00 - dx.x / (2 * h)), std::abs(g.a10 - dx.y / (2 * h))),
                     std::max(std::abs(g.a01 - dy.x / (2 * h)), std::abs(g.a11 - dy.y / (2 * h))));
        if (worst > 1e-7) return "grad u differs from finite differences by " + std::to_string(worst);
    }
    return {};
}

std::string check_pressure_gradient_fd() {
    const AnalyticStokes exact{3.0, 1.0};
    std::mt19937 rng(778);
    std::uniform_real_distribution<double> pos(-0.95, 0.95), time(0.0, 1.0);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const double t = time(rng);
        const Vec2 x{pos(rng), pos(rng)};
        const Vec2 g = exact.pressure_gradient(t, x);
        const double dx = (exact.pressure(t, {x.x + h, x.y}) - exact.pressure(t, {x.x - h, x.y})) / (2 * h);
        const double dy = (exact.pressure(t, {x.x, x.y + h}) - exact.pressure(t, {x.x, x.y - h})) / (2 * h);
        if (std::max(std::abs(g.x - dx), std::abs(g.y - dy)) > 1e-7) return "grad p differs from finite differences";
    }
    return {};
}

std::string check_laplacian_fd() {
    const AnalyticStokes exact{3.0, 1.0};
    std::mt19937 rng(779);
    std::uniform_real_distribution<double> pos(-0.9, 0.9), time(0.0, 1.0);
    const double h = 1e-4;
    for (int trial = 0; trial < 20; ++trial) {
        const double t = time(rng);
        const Vec2 x{pos(rng), pos(rng)};
        const Vec2 lap = exact.laplacian(t, x);
        const Vec2 c = exact.velocity(t, x);
        const Vec2 fd = (1.0 / (h * h)) * (exact.velocity(t, {x.x + h, x.y}) + exact.velocity(t, {x.x - h, x.y}) +
                                           exact.velocity(t, {x.x, x.y + h}) + exact.velocity(t, {x.x, x.y - h}) -
                                           4.0 * c);
        if (std::max(std::abs(lap.x - fd.x), std::abs(lap.y - fd.y)) > 1e-5)
            return "laplacian differs from finite differences";
    }
    return {};
}

std::string check_forcing_residual() {
    const AnalyticStokes exact{7.0, 2.5};
    std::mt19937 rng(780);
    std::uniform_real_distribution<double> pos(-1.0, 1.0), time(0.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double t = time(rng);
        const Vec2 x{pos(rng), pos(rng)};
        const Vec2 lhs = exact.velocity_time_derivative(t, x) - exact.mu * exact.laplacian(t, x) +
                         exact.pressure_gradient(t, x) - exact.forcing(t, x);
        if (std::max(std::abs(lhs.x), std::abs(lhs.y)) > 1e-10) return "du/dt - mu lap u + grad p != f";
    }
    return {};
}

std::string check_average_coefficients_midpoint() {
    const double lambda = 10.0, dt = 1e-5;  // lambda*dt = 1e-4
    const double t0 = 0.377;
    const auto [c, s] = AveragedLoadAssembler::average_coefficients(lambda, t0, dt);
    const double tm = t0 + 0.5 * dt;
    if (auto e = expect_near(c, std::cos(lambda * tm), 1e-8, "cos average"); !e.empty()) return e;
    return expect_near(s, std::sin(lambda * tm), 1e-8, "sin average");
}

std::string check_averaged_load_gauss_oracle() {
    const Mesh mesh = build_structured_mesh(Rect{}, 4, 4);
    const FemSystem system = assemble_system(mesh, 1.0);
    const AnalyticStokes exact{10.0, 1.0};
    const AveragedLoadAssembler assembler(system, exact);
    const double t0 = 0.2, dt = 0.05;
    const std::vector<double> closed = assembler.load(t0, dt);
    // 10-point Gauss in time (two 5-point panels) of instantaneous loads
    const GaussLegendre gauss = gauss_legendre_unit(5);
    std::vector<double> oracle(closed.size(), 0.0);
    const QuadratureRule rule = make_quadrature(4);
    for (int panel = 0; panel < 2; ++panel)
        for (size_t k = 0; k < gauss.points.size(); ++k) {
            const double t = t0 + 0.5 * dt * (panel + gauss.points[k]);
            const std::vector<double> load = assemble_velocity_load(
                system, rule, [&](const PointContext& pt) { return exact.forcing(t, pt.pos); });
            for (size_t i = 0; i < oracle.size(); ++i) oracle[i] += 0.5 * gauss.weights[k] * load[i];
        }
    return expect(max_abs_diff(closed, oracle) <= 1e-12 * norm2(oracle), "closed-form average vs time Gauss oracle");
}

// --- scheme ---

std::string check_velocity_step_dense_oracle() {
    const Mesh mesh = build_structured_mesh(Rect{}, 2, 2);
    const FemSystem system = assemble_system(mesh, 1.0);
    const AnalyticStokes exact{10.0, 1.0};
    const double dt = 0.1;
    std::vector<double> u_prev =
        interpolate_velocity(system, [](Vec2 x) { return Vec2{std::sin(x.x), std::cos(x.y)}; });
    system.zero_dirichlet(u_prev);
    const std::vector<double> p_curr =
        interpolate_pressure(system, [](Vec2 x) { return x.x * x.y; });
    const AveragedLoadAssembler loads(system, exact);
    const std::vector<double> load = loads.load(0.0, dt);

    const SparseMatrix momentum = system.momentum_matrix(dt);
    const std::vector<double> u = velocity_step(system, momentum, u_prev, p_curr, dt, load, 1e-12, 10000);

    std::vector<double> rhs = spmv(system.M, u_prev);
    const std::vector<double> gp = spmv(system.G, p_curr);
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] = load[i] + rhs[i] / dt - gp[i];
    system.zero_dirichlet(rhs);
    const std::vector<double> oracle = dense_lu_solve(dense_from_sparse(momentum), rhs);
    return expect(max_abs_diff(u, oracle) <= 1e-9 * std::max(1.0, norm2(oracle)),
                  "velocity step differs from dense LU oracle");
}

std::string check_velocity_step_constant_pressure() {
    const Mesh mesh = build_structured_mesh(Rect{}, 2, 2);
    const FemSystem system = assemble_system(mesh, 1.0);
    const AnalyticStokes exact{10.0, 1.0};
    const double dt = 0.1;
    std::vector<double> u_prev = interpolate_velocity(system, [](Vec2 x) { return Vec2{x.y, -x.x}; });
    system.zero_dirichlet(u_prev);
    const AveragedLoadAssembler loads(system, exact);
    const std::vector<double> load = loads.load(0.0, dt);
    const SparseMatrix momentum = system.momentum_matrix(dt);

    const std::vector<double> p_const = interpolate_pressure(system, [](Vec2) { return 3.7; });
    const std::vector<double> p_zero(system.pressure.dofs, 0.0);
    const std::vector<double> u1 = velocity_step(system, momentum, u_prev, p_const, dt, load, 1e-12, 10000);
    const std::vector<double> u2 = velocity_step(system, momentum, u_prev, p_zero, dt, load, 1e-12, 10000);
    return expect(max_abs_diff(u1, u2) <= 1e-8 * std::max(1.0, norm2(u2)),
                  "constant pressure changes the velocity step");
}

std::string check_pressure_step_dense_oracle() {
    const Mesh mesh = build_structured_mesh(Rect{}, 2, 2);
    const FemSystem system = assemble_system(mesh, 1.0);
    std::vector<double> u_half = interpolate_velocity(system, [](Vec2 x) {
        return Vec2{std::sin(M_PI * x.x) * x.y, std::cos(M_PI * x.y) * x.x};
    });
    system.zero_dirichlet(u_half);
    const double dt_next = 0.05;
    const std::vector<double> p = pressure_step(system, u_half, dt_next, 1e-12, 10000);

    std::vector<double> rhs = spmv(system.D, u_half);
    for (double& v : rhs) v = -v / dt_next;
    std::vector<double> oracle = dense_zero_mean_solve(dense_from_sparse(system.Kp), rhs);
    // align both to the lumped-mass zero-mean convention
    const double shift = weighted_mean(oracle, system.pressure.lumped_mass);
    for (double& v : oracle) v -= shift;
    return expect(max_abs_diff(p, oracle) <= 1e-9 * std::max(1.0, norm2(oracle)),
                  "pressure step differs from dense zero-mean oracle");
}

std::string check_scheme_self_convergence() {
    const Mesh mesh = build_structured_mesh(Rect{}, 8, 8);
    const FemSystem system = assemble_system(mesh, 1.0);
    const AnalyticStokes exact{1.0, 1.0};
    const AveragedLoadAssembler loads(system, exact);
    const double T = 0.5;
    auto run = [&](int steps) {
        const TimeGrid grid = TimeGrid::uniform(T, steps);
        std::vector<double> u0 = interpolate_velocity(system, [&](Vec2 x) { return exact.velocity(0.0, x); });
        return run_scheme(
            system, grid, [&](int, double t0, double dt) { return loads.load(t0, dt); }, std::move(u0));
    };
    const SchemeTrajectory coarse = run(4), fine = run(8), reference = run(32);
    auto h1_err = [&](const SchemeTrajectory& traj) {
        const auto& u = traj.u_half.back();
        const auto& r = reference.u_half.back();
        std::vector<double> diff(u.size());
        for (size_t i = 0; i < u.size(); ++i) diff[i] = u[i] - r[i];
        const std::vector<double> kd = spmv(system.K, diff);
        double s = 0.0;
        for (size_t i = 0; i < diff.size(); ++i) s += diff[i] * kd[i];
        return std::sqrt(s);
    };
    const double e_coarse = h1_err(coarse), e_fine = h1_err(fine);
    return expect(e_fine < e_coarse, "final-time H1 error did not decrease when dt was halved");
}

// --- estimators ---

std::string check_closed_form_time_quadrature() {
    const Mesh mesh = build_structured_mesh(Rect{}, 4, 4);
    const FemSystem system = assemble_system(mesh, 1.0);
    const AnalyticStokes exact{10.0, 1.0};
    const AveragedLoadAssembler loads(system, exact);
    const TimeGrid grid = TimeGrid::uniform(0.2, 2);
    std::vector<double> u0 = interpolate_velocity(system, [&](Vec2 x) { return exact.velocity(0.0, x); });
    const SchemeTrajectory traj = run_scheme(
        system, grid, [&](int, double t0, double dt) { return loads.load(t0, dt); }, std::move(u0));

    EstimatorOptions opts;
    opts.compute_error_terms = false;
    const IntervalEvaluator evaluator(system, exact, opts);
    const int n = 1;
    const IntervalTerms terms = evaluator.closed_form_terms(traj, n);

    // 5-point Gauss in time of the instantaneous space norms
    const GaussLegendre gauss = gauss_legendre_unit(5);
    const auto& a = traj.u_half[n];
    const auto& b = traj.u_half[n + 1];
    const double dt = grid.dt[n];
    const QuadratureRule rule = make_quadrature(4);
    double grad_inc = 0.0, div_l2 = 0.0;
    for (size_t k = 0; k < gauss.points.size(); ++k) {
        const double theta = gauss.points[k];
        std::vector<double> mix(a.size());
        for (size_t i = 0; i < a.size(); ++i) mix[i] = b[i] - ((1.0 - theta) * a[i] + theta * b[i]);
        grad_inc += gauss.weights[k] * integrate_field(system, rule, [&](const PointContext& pt) {
            return frobenius_sq(pt.p2_vec_grad(mix));
        });
        std::vector<double> interp(a.size());
        for (size_t i = 0; i < a.size(); ++i) interp[i] = (1.0 - theta) * a[i] + theta * b[i];
        div_l2 += gauss.weights[k] * integrate_field(system, rule, [&](const PointContext& pt) {
            const double d = pt.p2_div(interp);
            return d * d;
        });
    }
    grad_inc *= system.mu * dt;
    div_l2 *= system.mu * dt;
    if (auto e = expect_rel(terms.grad_increment, grad_inc, 1e-12, "grad increment vs Gauss oracle"); !e.empty())
        return e;
    return expect_rel(terms.div_l2, div_l2, 1e-12, "div L2 term vs Gauss oracle");
}

std::string check_dual_norm_dense_oracle() {
    const Mesh mesh = build_structured_mesh(Rect{}, 3, 3);
    const FemSystem system = assemble_system(mesh, 1.0);
    const SparseMatrix riesz = system.riesz_matrix();
    auto g = [](const PointContext& pt) {
        return Vec2{std::sin(M_PI * pt.pos.x) * std::cos(M_PI * pt.pos.y), pt.pos.x * pt.pos.x * pt.pos.y};
    };
    const double value = dual_norm_sq(system, riesz, g, 6, 1e-12, 10000);
    std::vector<double> load = assemble_velocity_load(system, make_quadrature(6), g);
    system.zero_dirichlet(load);
    const std::vector<double> w = dense_lu_solve(dense_from_sparse(riesz), load);
    double oracle = 0.0;
    for (size_t i = 0; i < w.size(); ++i) oracle += load[i] * w[i];
    return expect_rel(value, oracle, 1e-9, "dual norm vs dense Riesz oracle");
}

std::string check_dual_norm_scaling() {
    const Mesh mesh = build_structured_mesh(Rect{}, 3, 3);
    const FemSystem system = assemble_system(mesh, 1.0);
    const SparseMatrix riesz = system.riesz_matrix();
    auto g = [](const PointContext& pt) { return Vec2{pt.pos.y, std::sin(pt.pos.x)}; };
    auto g3 = [&](const PointContext& pt) { return 3.0 * g(pt); };
    const double base = dual_norm_sq(system, riesz, g, 6, 1e-12, 10000);
    const double scaled = dual_norm_sq(system, riesz, g3, 6, 1e-12, 10000);
    return expect_rel(scaled, 9.0 * base, 1e-10, "dual norm quadratic scaling");
}

std::string check_estimator_difference_identity() {
    const Mesh mesh = build_structured_mesh(Rect{}, 4, 4);
    const FemSystem system = assemble_system(mesh, 1.0);
    const AnalyticStokes exact{10.0, 1.0};
    const AveragedLoadAssembler loads(system, exact);
    const TimeGrid grid = TimeGrid::uniform(0.1, 1);
    std::vector<double> u0 = interpolate_velocity(system, [&](Vec2 x) { return exact.velocity(0.0, x); });
    const SchemeTrajectory traj = run_scheme(
        system, grid, [&](int, double t0, double dt) { return loads.load(t0, dt); }, std::move(u0));
    EstimatorOptions opts;
    opts.compute_error_terms = false;
    const IntervalEvaluator evaluator(system, exact, opts);
    const IntervalTerms terms = evaluator.closed_form_terms(traj, 0);

    EstimatorLedger ledger;
    ledger.accumulate(terms, 0, grid.t[1]);
    const LedgerRow& row = ledger.back();

    // recompute the three ingredients from the raw snapshots
    const auto& a = traj.u_half[0];
    const auto& b = traj.u_half[1];
    const double dt = grid.dt[0];
    const QuadratureRule rule = make_quadrature(4);
    const GaussLegendre gauss = gauss_legendre_unit(5);
    double div_l2 = 0.0;
    for (size_t k = 0; k < gauss.points.size(); ++k) {
        const double theta = gauss.points[k];
        std::vector<double> interp(a.size());
        for (size_t i = 0; i < a.size(); ++i) interp[i] = (1.0 - theta) * a[i] + theta * b[i];
        div_l2 += gauss.weights[k] * integrate_field(system, rule, [&](const PointContext& pt) {
            const double d = pt.p2_div(interp);
            return d * d;
        });
    }
    div_l2 *= system.mu * dt;
    std::vector<double> diff(a.size());
    for (size_t i = 0; i < a.size(); ++i) diff[i] = b[i] - a[i];
    const double div_rate_l2 = integrate_field(system, rule, [&](const PointContext& pt) {
        const double d = pt.p2_div(diff);
        return d * d;
    }) / dt;
    const double dt_next = grid.dt_next(0);
    const double pressure_increment = integrate_field(system, rule, [&](const PointContext& pt) {
        const Vec2 g1 = pt.p1_grad(traj.p[1]);
        const Vec2 g0 = pt.p1_grad(traj.p[0]);
        const Vec2 d{dt_next * g1.x - dt * g0.x, dt_next * g1.y - dt * g0.y};
        return dot(d, d);
    });
    return expect_rel(row.est2 - row.est3, div_l2 + div_rate_l2 - pressure_increment, 1e-10,
                      "est2 - est3 vs recomputed ingredients");
}

std::string check_err_grad_interpolant_comparison() {
    const Mesh mesh = build_structured_mesh(Rect{}, 6, 6);
    const FemSystem system = assemble_system(mesh, 1.0);
    const AnalyticStokes exact{10.0, 1.0};
    const AveragedLoadAssembler loads(system, exact);
    const double T = 0.1;
    const int steps = 4;
    const TimeGrid grid = TimeGrid::uniform(T, steps);
    std::vector<double> u0 = interpolate_velocity(system, [&](Vec2 x) { return exact.velocity(0.0, x); });
    const SchemeTrajectory scheme_traj = run_scheme(
        system, grid, [&](int, double t0, double dt) { return loads.load(t0, dt); }, std::move(u0));

    // inject the exact solution: u^{n+1/2} sampled at t_{n+1}, p^n at t_n
    SchemeTrajectory exact_traj;
    exact_traj.grid = grid;
    for (int n = 0; n <= steps; ++n) {
        const double t_sample = grid.t[n];
        exact_traj.u_half.push_back(
            interpolate_velocity(system, [&](Vec2 x) { return exact.velocity(t_sample, x); }));
        exact_traj.p.push_back(interpolate_pressure(system, [&](Vec2 x) { return exact.pressure(t_sample, x); }));
    }

    EstimatorOptions opts;
    const IntervalEvaluator evaluator(system, exact, opts);
    double scheme_err = 0.0, exact_err = 0.0;
    for (int n = 0; n < steps; ++n) {
        scheme_err += evaluator.evaluate(scheme_traj, n).err_grad;
        exact_err += evaluator.evaluate(exact_traj, n).err_grad;
    }
    return expect(exact_err < scheme_err, "interpolated-exact trajectory error not below scheme error");
}

std::string check_err_grad_time_rule_refinement() {
    const Mesh mesh = build_structured_mesh(Rect{}, 6, 6);
    const FemSystem system = assemble_system(mesh, 1.0);
    const AnalyticStokes exact{10.0, 1.0};
    const AveragedLoadAssembler loads(system, exact);
    const TimeGrid grid = TimeGrid::uniform(0.1, 4);  // dt = 0.025
    std::vector<double> u0 = interpolate_velocity(system, [&](Vec2 x) { return exact.velocity(0.0, x); });
    const SchemeTrajectory traj = run_scheme(
        system, grid, [&](int, double t0, double dt) { return loads.load(t0, dt); }, std::move(u0));
    auto total_err_grad = [&](int gauss_points) {
        EstimatorOptions opts;
        opts.time_gauss_points = gauss_points;
        const IntervalEvaluator evaluator(system, exact, opts);
        double total = 0.0;
        for (int n = 0; n < grid.num_steps(); ++n) total += evaluator.evaluate(traj, n).err_grad;
        return total;
    };
    const double e3 = total_err_grad(3), e5 = total_err_grad(5);
    return expect(std::abs(e3 - e5) < 0.01 * e5, "3- vs 5-point time Gauss differ by more than 1%");
}

// --- experiment ---

std::string check_experiment_determinism() {
    ExperimentConfig config;
    config.nx = config.ny = 6;
    config.lambda = 10.0;
    config.horizon = 0.2;
    config.dt_list = {0.1, 0.05};
    config.solver_tol = 1e-10;
    auto render = [&]() {
        const std::vector<ResultRow> rows = run_experiment(config);
        std::ostringstream os;
        write_csv(rows, os);
        return os.str();
    };
    const std::string first = render(), second = render();
    return expect(first == second, "two identical runs produced different CSV bytes");
}

std::string check_gnuplot_block_format() {
    ExperimentConfig config;
    config.nx = config.ny = 4;
    config.horizon = 0.2;
    config.dt_list = {0.1, 0.05};
    const std::vector<ResultRow> rows = run_experiment(config);
    std::ostringstream os;
    write_gnuplot_eff2(rows, os);
    std::istringstream in(os.str());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::string a, b, extra;
        if (!(fields >> a >> b) || (fields >> extra))
            return "gnuplot companion line does not have exactly 2 columns: " + line;
    }
    return {};
}

}  // namespace

int run_selftest(std::ostream& out) {
    const std::vector<Check> checks = {
        {"mesh counts and Euler relation (2x2)", check_mesh_counts},
        {"mesh Euler relation sweep", check_mesh_euler_sweep},
        {"mesh uniform areas", check_mesh_areas},
        {"spmv vs dense oracle", check_spmv_dense_oracle},
        {"cg 2x2 direct oracle", check_cg_2x2},
        {"cg singular Neumann zero-mean oracle", check_cg_singular_neumann},
        {"quadrature monomial oracles", check_quadrature_monomials},
        {"stiffness patch test on linear field", check_stiffness_patch_test},
        {"adjoint identity G = -D^T", check_adjoint_identity},
        {"P2 reproduces quadratics", check_p2_reproduces_quadratics},
        {"grad norm of (x,-y)", check_grad_norm_value},
        {"velocity gradient finite differences", check_velocity_gradient_fd},
        {"pressure gradient finite differences", check_pressure_gradient_fd},
        {"velocity laplacian finite differences", check_laplacian_fd},
        {"forcing residual identity", check_forcing_residual},
        {"time-average coefficients midpoint limit", check_average_coefficients_midpoint},
        {"averaged load vs 10-point time Gauss", check_averaged_load_gauss_oracle},
        {"velocity step vs dense LU", check_velocity_step_dense_oracle},
        {"velocity step ignores constant pressure", check_velocity_step_constant_pressure},
        {"pressure step vs dense zero-mean solve", check_pressure_step_dense_oracle},
        {"scheme self-convergence", check_scheme_self_convergence},
        {"closed forms vs time quadrature", check_closed_form_time_quadrature},
        {"dual norm vs dense Riesz solve", check_dual_norm_dense_oracle},
        {"dual norm quadratic scaling", check_dual_norm_scaling},
        {"est2 - est3 recomputation identity", check_estimator_difference_identity},
        {"interpolated-exact trajectory error comparison", check_err_grad_interpolant_comparison},
        {"time rule refinement of err_grad", check_err_grad_time_rule_refinement},
        {"experiment determinism", check_experiment_determinism},
        {"gnuplot companion block format", check_gnuplot_block_format},
    };

    int failures = 0;
    for (const auto& check : checks) {
        std::string detail;
        try {
            detail = check.run();
        } catch (const std::exception& err) {
            detail = std::string("exception: ") + err.what();
        }
        if (detail.empty()) {
            out << "PASS  " << check.name << "\n";
        } else {
            ++failures;
            out << "FAIL  " << check.name << ": " << detail << "\n";
        }
    }
    out << (failures == 0 ? "selftest: all checks passed" : "selftest: " + std::to_string(failures) + " failure(s)")
        << "\n";
    return failures;
}

}  // namespace ctstokes
