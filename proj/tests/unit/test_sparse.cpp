#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "ctstokes/dense.hpp"
#include "ctstokes/sparse.hpp"

using namespace ctstokes;

namespace {

SparseMatrix small_spd_2x2() {
    TripletBuilder b(2, 2);
    b.add(0, 0, 4.0);
    b.add(0, 1, 1.0);
    b.add(1, 0, 1.0);
    b.add(1, 1, 3.0);
    return b.compress();
}

SparseMatrix identity(int n) {
    TripletBuilder b(n, n);
    for (int i = 0; i < n; ++i) b.add(i, i, 1.0);
    return b.compress();
}

}  // namespace

TEST_CASE("spmv basics") {
    const SparseMatrix I = identity(3);
    const std::vector<double> x = {1.5, -2.0, 0.25};
    CHECK(spmv(I, x) == x);

    const SparseMatrix A = small_spd_2x2();
    const std::vector<double> y = spmv(A, std::vector<double>{1.0, 1.0});
    CHECK(y[0] == doctest::Approx(5.0));
    CHECK(y[1] == doctest::Approx(4.0));

    CHECK_THROWS_AS(spmv(A, x), std::invalid_argument);
}

TEST_CASE("triplet assembly sums duplicates and sorts columns") {
    TripletBuilder b(2, 3);
    b.add(1, 2, 1.0);
    b.add(0, 1, 2.0);
    b.add(1, 2, 0.5);
    b.add(1, 0, -1.0);
    const SparseMatrix A = b.compress();
    CHECK(A.nnz() == 3);
    CHECK(A.col_idx[A.row_ptr[1]] == 0);
    CHECK(A.col_idx[A.row_ptr[1] + 1] == 2);
    CHECK(A.values[A.row_ptr[1] + 1] == doctest::Approx(1.5));
}

TEST_CASE("spmv matches a dense oracle on random SPD matrices") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 10;
    DenseMatrix R;
    R.rows = R.cols = n;
    R.data.resize(n * n);
    for (auto& v : R.data) v = dist(rng);
    DenseMatrix A;
    A.rows = A.cols = n;
    A.data.assign(n * n, 0.0);
    TripletBuilder b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = (i == j) ? 1.0 : 0.0;
            for (int k = 0; k < n; ++k) s += R.at(k, i) * R.at(k, j);
            A.at(i, j) = s;
            b.add(i, j, s);
        }
    const SparseMatrix S = b.compress();
    std::vector<double> x(n);
    for (auto& v : x) v = dist(rng);
    const auto ys = spmv(S, x);
    const auto yd = dense_matvec(A, x);
    for (int i = 0; i < n; ++i) CHECK(std::abs(ys[i] - yd[i]) <= 1e-13);
}

TEST_CASE("cg solves the identity in one iteration") {
    const SparseMatrix I = identity(5);
    const std::vector<double> b = {1.0, -2.0, 3.0, 0.5, 4.0};
    auto [x, report] = cg_solve(I, b);
    CHECK(report.converged);
    CHECK(report.iterations == 1);
    for (size_t i = 0; i < b.size(); ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("cg 2x2 against the direct solution") {
    auto [x, report] = cg_solve(small_spd_2x2(), std::vector<double>{1.0, 2.0});
    CHECK(report.converged);
    CHECK(report.final_residual <= 1e-10);
    CHECK(x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("cg zero right-hand side returns exact zero") {
    auto [x, report] = cg_solve(small_spd_2x2(), std::vector<double>{0.0, 0.0});
    CHECK(report.converged);
    CHECK(report.iterations == 0);
    CHECK(x[0] == 0.0);
    CHECK(x[1] == 0.0);
}

TEST_CASE("deflated cg on a singular Neumann system") {
    TripletBuilder b(3, 3);
    b.add(0, 0, 1.0);
    b.add(0, 1, -1.0);
    b.add(1, 0, -1.0);
    b.add(1, 1, 2.0);
    b.add(1, 2, -1.0);
    b.add(2, 1, -1.0);
    b.add(2, 2, 1.0);
    const SparseMatrix A = b.compress();

    SUBCASE("consistent rhs matches the dense zero-mean oracle") {
        const std::vector<double> rhs = {1.0, 0.0, -1.0};
        SolveOptions opts;
        opts.nullspace = Nullspace::Constants;
        auto [x, report] = cg_solve(A, rhs, opts);
        CHECK(report.converged);
        const auto oracle = dense_zero_mean_solve(dense_from_sparse(A), rhs);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(x[i] - oracle[i]) <= 1e-10);
        double mean = 0.0;
        for (double v : x) mean += v;
        CHECK(std::abs(mean / 3.0) <= 1e-12);
    }

    SUBCASE("weighted zero mean uses the supplied weights") {
        const std::vector<double> rhs = {1.0, 0.0, -1.0};
        const std::vector<double> weights = {1.0, 2.0, 1.0};
        SolveOptions opts;
        opts.nullspace = Nullspace::Constants;
        opts.mean_weights = weights;
        auto [x, report] = cg_solve(A, rhs, opts);
        CHECK(report.converged);
        CHECK(std::abs(weighted_mean(x, weights)) <= 1e-12);
    }

    SUBCASE("inconsistent rhs is rejected") {
        SolveOptions opts;
        opts.nullspace = Nullspace::Constants;
        CHECK_THROWS_AS(cg_solve(A, std::vector<double>{1.0, 1.0, 1.0}, opts), std::runtime_error);
    }
}

TEST_CASE("non-convergence is reported, not thrown") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const int n = 30;
    TripletBuilder b(n, n);
    for (int i = 0; i < n; ++i) {
        b.add(i, i, 4.0 + dist(rng));
        if (i + 1 < n) {
            b.add(i, i + 1, -1.0);
            b.add(i + 1, i, -1.0);
        }
    }
    const SparseMatrix A = b.compress();
    std::vector<double> rhs(n, 1.0);
    SolveOptions opts;
    opts.maxit = 1;
    opts.tol = 1e-14;
    auto [x, report] = cg_solve(A, rhs, opts);
    CHECK_FALSE(report.converged);
    CHECK(report.iterations == 1);
}

TEST_CASE("matrix helpers: transpose, add_scaled, eliminate, zero_columns") {
    TripletBuilder b(2, 3);
    b.add(0, 1, 2.0);
    b.add(1, 2, -1.0);
    const SparseMatrix A = b.compress();
    const SparseMatrix T = transpose(A);
    CHECK(T.rows == 3);
    CHECK(T.cols == 2);
    CHECK(spmv(T, std::vector<double>{1.0, 1.0}) == std::vector<double>{0.0, 2.0, -1.0});

    const SparseMatrix S = add_scaled(2.0, small_spd_2x2(), -1.0, identity(2));
    const auto y = spmv(S, std::vector<double>{1.0, 0.0});
    CHECK(y[0] == doctest::Approx(7.0));
    CHECK(y[1] == doctest::Approx(2.0));

    const std::vector<std::uint8_t> mask = {1, 0};
    const SparseMatrix E = eliminate_dirichlet(small_spd_2x2(), mask);
    const auto z = spmv(E, std::vector<double>{5.0, 2.0});
    CHECK(z[0] == doctest::Approx(5.0));  // unit diagonal on the constrained dof
    CHECK(z[1] == doctest::Approx(6.0));  // coupling removed

    const std::vector<std::uint8_t> col_mask = {0, 1, 0};
    const SparseMatrix Z = zero_columns(A, col_mask);
    CHECK(spmv(Z, std::vector<double>{1.0, 1.0, 1.0}) == std::vector<double>{0.0, -1.0});
}

TEST_CASE("symmetrize removes round-off asymmetry") {
    TripletBuilder b(2, 2);
    b.add(0, 1, 1.0 + 1e-15);
    b.add(1, 0, 1.0 - 1e-15);
    b.add(0, 0, 2.0);
    b.add(1, 1, 2.0);
    SparseMatrix A = b.compress();
    symmetrize(A);
    const SparseMatrix T = transpose(A);
    for (int k = 0; k < A.nnz(); ++k) CHECK(A.values[k] == T.values[k]);
}
