#include "ctstokes/dense.hpp"

#include <cmath>
#include <stdexcept>

namespace ctstokes {

DenseMatrix dense_from_sparse(const SparseMatrix& A) {
    DenseMatrix M;
    M.rows = A.rows;
    M.cols = A.cols;
    M.data.assign(static_cast<size_t>(A.rows) * A.cols, 0.0);
    for (int i = 0; i < A.rows; ++i)
        for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) M.at(i, A.col_idx[k]) = A.values[k];
    return M;
}

std::vector<double> dense_matvec(const DenseMatrix& A, std::span<const double> x) {
    std::vector<double> y(A.rows, 0.0);
    for (int i = 0; i < A.rows; ++i)
        for (int j = 0; j < A.cols; ++j) y[i] += A.at(i, j) * x[j];
    return y;
}

std::vector<double> dense_lu_solve(DenseMatrix A, std::vector<double> b) {
    if (A.rows != A.cols || static_cast<int>(b.size()) != A.rows)
        throw std::invalid_argument("dense_lu_solve: dimension mismatch");
    const int n = A.rows;
    for (int k = 0; k < n; ++k) {
        int pivot = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(A.at(i, k)) > std::abs(A.at(pivot, k))) pivot = i;
        if (A.at(pivot, k) == 0.0) throw std::runtime_error("dense_lu_solve: singular matrix");
        if (pivot != k) {
            for (int j = 0; j < n; ++j) std::swap(A.at(k, j), A.at(pivot, j));
            std::swap(b[k], b[pivot]);
        }
        for (int i = k + 1; i < n; ++i) {
            const double factor = A.at(i, k) / A.at(k, k);
            A.at(i, k) = 0.0;
            for (int j = k + 1; j < n; ++j) A.at(i, j) -= factor * A.at(k, j);
            b[i] -= factor * b[k];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A.at(i, j) * b[j];
        b[i] = s / A.at(i, i);
    }
    return b;
}

std::vector<double> dense_zero_mean_solve(const DenseMatrix& A, std::span<const double> b) {
    if (A.rows != A.cols || static_cast<int>(b.size()) != A.rows)
        throw std::invalid_argument("dense_zero_mean_solve: dimension mismatch");
    const int n = A.rows;
    DenseMatrix B;
    B.rows = B.cols = n + 1;
    B.data.assign(static_cast<size_t>(n + 1) * (n + 1), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) B.at(i, j) = A.at(i, j);
        B.at(i, n) = 1.0;
        B.at(n, i) = 1.0;
    }
    std::vector<double> rhs(b.begin(), b.end());
    rhs.push_back(0.0);
    std::vector<double> x = dense_lu_solve(std::move(B), std::move(rhs));
    x.pop_back();
    return x;
}

}  // namespace ctstokes
