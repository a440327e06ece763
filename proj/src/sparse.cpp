#include "ctstokes/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctstokes {

double SparseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

SparseMatrix TripletBuilder::compress() {
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix A;
    A.rows = rows_;
    A.cols = cols_;
    A.row_ptr.assign(rows_ + 1, 0);
    for (size_t k = 0; k < entries_.size();) {
        size_t j = k;
        double sum = 0.0;
        while (j < entries_.size() && entries_[j].row == entries_[k].row && entries_[j].col == entries_[k].col)
            sum += entries_[j++].value;
        A.col_idx.push_back(entries_[k].col);
        A.values.push_back(sum);
        ++A.row_ptr[entries_[k].row + 1];
        k = j;
    }
    for (int i = 0; i < rows_; ++i) A.row_ptr[i + 1] += A.row_ptr[i];
    entries_.clear();
    entries_.shrink_to_fit();
    return A;
}

void spmv_into(const SparseMatrix& A, std::span<const double> x, std::span<double> y) {
    if (static_cast<int>(x.size()) != A.cols || static_cast<int>(y.size()) != A.rows)
        throw std::invalid_argument("spmv: dimension mismatch");
    for (int i = 0; i < A.rows; ++i) {
        double s = 0.0;
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) s += A.values[k] * x[A.col_idx[k]];
        y[i] = s;
    }
}

std::vector<double> spmv(const SparseMatrix& A, std::span<const double> x) {
    std::vector<double> y(A.rows);
    spmv_into(A, x, y);
    return y;
}

SparseMatrix transpose(const SparseMatrix& A) {
    SparseMatrix T;
    T.rows = A.cols;
    T.cols = A.rows;
    T.row_ptr.assign(T.rows + 1, 0);
    T.col_idx.resize(A.nnz());
    T.values.resize(A.nnz());
    for (int k = 0; k < A.nnz(); ++k) ++T.row_ptr[A.col_idx[k] + 1];
    for (int i = 0; i < T.rows; ++i) T.row_ptr[i + 1] += T.row_ptr[i];
    std::vector<int> next(T.row_ptr.begin(), T.row_ptr.end() - 1);
    for (int i = 0; i < A.rows; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
            const int p = next[A.col_idx[k]]++;
            T.col_idx[p] = i;
            T.values[p] = A.values[k];
        }
    return T;
}

void symmetrize(SparseMatrix& A) { A = add_scaled(0.5, A, 0.5, transpose(A)); }

SparseMatrix add_scaled(double alpha, const SparseMatrix& A, double beta, const SparseMatrix& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("add_scaled: dimension mismatch");
    TripletBuilder builder(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) builder.add(i, A.col_idx[k], alpha * A.values[k]);
        for (int k = B.row_ptr[i]; k < B.row_ptr[i + 1]; ++k) builder.add(i, B.col_idx[k], beta * B.values[k]);
    }
    return builder.compress();
}

SparseMatrix eliminate_dirichlet(const SparseMatrix& A, std::span<const std::uint8_t> constrained) {
    if (A.rows != A.cols || static_cast<int>(constrained.size()) != A.rows)
        throw std::invalid_argument("eliminate_dirichlet: dimension mismatch");
    TripletBuilder builder(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i) {
        if (constrained[i]) {
            builder.add(i, i, 1.0);
            continue;
        }
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            if (!constrained[A.col_idx[k]]) builder.add(i, A.col_idx[k], A.values[k]);
    }
    return builder.compress();
}

SparseMatrix zero_columns(const SparseMatrix& A, std::span<const std::uint8_t> constrained) {
    if (static_cast<int>(constrained.size()) != A.cols)
        throw std::invalid_argument("zero_columns: dimension mismatch");
    TripletBuilder builder(A.rows, A.cols);
    for (int i = 0; i < A.rows; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
            if (!constrained[A.col_idx[k]]) builder.add(i, A.col_idx[k], A.values[k]);
    return builder.compress();
}

double weighted_mean(std::span<const double> x, std::span<const double> weights) {
    double num = 0.0, den = 0.0;
    if (weights.empty()) {
        for (double v : x) num += v;
        den = static_cast<double>(x.size());
    } else {
        for (size_t i = 0; i < x.size(); ++i) {
            num += weights[i] * x[i];
            den += weights[i];
        }
    }
    return num / den;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Remove the Euclidean mean (projection onto span{1}^perp).
void project_out_constants(std::span<double> v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

}  // namespace

std::pair<std::vector<double>, SolveReport> cg_solve(const SparseMatrix& A, std::span<const double> b,
                                                     const SolveOptions& opts) {
    if (A.rows != A.cols || static_cast<int>(b.size()) != A.rows)
        throw std::invalid_argument("cg_solve: dimension mismatch");
    const int n = A.rows;
    const bool deflate = opts.nullspace == Nullspace::Constants;

    std::vector<double> rhs(b.begin(), b.end());
    const double norm_b_raw = norm(rhs);
    if (deflate && norm_b_raw > 0.0) {
        double sum = 0.0;
        for (double v : rhs) sum += v;
        if (std::abs(sum) > 1e-8 * norm_b_raw)
            throw std::runtime_error("cg_solve: singular system with inconsistent right-hand side");
        project_out_constants(rhs);
    }
    const double norm_b = norm(rhs);

    std::vector<double> x(n, 0.0);
    SolveReport report;
    if (norm_b == 0.0) {
        report.converged = true;
        return {std::move(x), report};
    }
    if (!opts.initial_guess.empty()) {
        x.assign(opts.initial_guess.begin(), opts.initial_guess.end());
        if (deflate) project_out_constants(x);
    }

    std::vector<double> inv_diag;
    std::span<const double> precond_diag;
    if (opts.precond == Preconditioner::Diagonal && !opts.jacobi_inv_diag.empty()) {
        precond_diag = opts.jacobi_inv_diag;
    } else {
        inv_diag.assign(n, 1.0);
        if (opts.precond == Preconditioner::Diagonal) {
            for (int i = 0; i < n; ++i)
                for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k)
                    if (A.col_idx[k] == i && A.values[k] > 0.0) inv_diag[i] = 1.0 / A.values[k];
        }
        precond_diag = inv_diag;
    }

    std::vector<double> r(n), z(n), p(n), Ap(n);
    spmv_into(A, x, r);
    for (int i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
    if (deflate) project_out_constants(r);
    for (int i = 0; i < n; ++i) z[i] = precond_diag[i] * r[i];
    if (deflate) project_out_constants(z);
    p = z;
    double rz = dot(r, z);

    double res = norm(r) / norm_b;
    int it = 0;
    while (res > opts.tol && it < opts.maxit) {
        spmv_into(A, p, Ap);
        const double pAp = dot(p, Ap);
        if (pAp <= 0.0) break;  // loss of positive definiteness
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        ++it;
        res = norm(r) / norm_b;
        if (res <= opts.tol) {
            // Recompute the residual explicitly; the recursion may drift.
            spmv_into(A, x, r);
            for (int i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
            if (deflate) project_out_constants(r);
            res = norm(r) / norm_b;
            if (res <= opts.tol) break;
        }
        for (int i = 0; i < n; ++i) z[i] = precond_diag[i] * r[i];
        if (deflate) project_out_constants(z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }

    if (deflate) {
        const double m = weighted_mean(x, opts.mean_weights);
        for (double& v : x) v -= m;
    }
    report.iterations = it;
    report.final_residual = res;
    report.converged = res <= opts.tol;
    return {std::move(x), report};
}

}  // namespace ctstokes
