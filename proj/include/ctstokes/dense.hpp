#pragma once

#include <span>
#include <vector>

#include "ctstokes/sparse.hpp"

namespace ctstokes {

// Small dense solvers used as independent oracles against the sparse/CG
// path; direct Gaussian elimination, no iteration.
struct DenseMatrix {
    int rows = 0, cols = 0;
    std::vector<double> data;  // row-major
    double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
};

DenseMatrix dense_from_sparse(const SparseMatrix& A);
std::vector<double> dense_matvec(const DenseMatrix& A, std::span<const double> x);

// LU with partial pivoting; throws on singular pivot.
std::vector<double> dense_lu_solve(DenseMatrix A, std::vector<double> b);

// Zero-sum solution of a consistent singular system with constants kernel,
// via the bordered system [A 1; 1^T 0].
std::vector<double> dense_zero_mean_solve(const DenseMatrix& A, std::span<const double> b);

}  // namespace ctstokes
