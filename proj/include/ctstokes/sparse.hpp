#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ctstokes {

// Compressed sparse row storage.  Column indices are sorted and unique
// within each row once assembled from triplets.
struct SparseMatrix {
    int rows = 0, cols = 0;
    std::vector<int> row_ptr;  // size rows + 1
    std::vector<int> col_idx;
    std::vector<double> values;

    int nnz() const { return static_cast<int>(values.size()); }
    double max_abs() const;
};

// Duplicate-tolerant triplet accumulator for element-by-element assembly.
class TripletBuilder {
public:
    TripletBuilder(int rows, int cols) : rows_(rows), cols_(cols) {}
    void add(int row, int col, double value) { entries_.push_back({row, col, value}); }
    SparseMatrix compress();

private:
    struct Entry {
        int row, col;
        double value;
    };
    int rows_, cols_;
    std::vector<Entry> entries_;
};

std::vector<double> spmv(const SparseMatrix& A, std::span<const double> x);
void spmv_into(const SparseMatrix& A, std::span<const double> x, std::span<double> y);
SparseMatrix transpose(const SparseMatrix& A);

// A <- (A + A^T)/2, removing assembly round-off asymmetry.
void symmetrize(SparseMatrix& A);

// alpha*A + beta*B on the union sparsity pattern.
SparseMatrix add_scaled(double alpha, const SparseMatrix& A, double beta, const SparseMatrix& B);

// Symmetric elimination of constrained dofs: zero the row and column, set a
// unit diagonal.  Constrained entries of the right-hand side must be zeroed
// by the caller (all constraints in this artifact are homogeneous).
SparseMatrix eliminate_dirichlet(const SparseMatrix& A, std::span<const std::uint8_t> constrained);

// Zero the columns of a rectangular matrix at constrained dofs.
SparseMatrix zero_columns(const SparseMatrix& A, std::span<const std::uint8_t> constrained);

struct SolveReport {
    int iterations = 0;
    double final_residual = 0.0;  // |b - Ax| / |b|
    bool converged = false;
};

enum class Preconditioner { None, Diagonal };
enum class Nullspace { None, Constants };

struct SolveOptions {
    double tol = 1e-10;
    int maxit = 10000;
    Preconditioner precond = Preconditioner::Diagonal;
    Nullspace nullspace = Nullspace::None;
    // Weights defining the zero-mean normalization of a Constants-nullspace
    // solution (lumped pressure mass); empty means uniform weights.
    std::span<const double> mean_weights = {};
    std::span<const double> initial_guess = {};
    // Precomputed inverse diagonal, reusable across solves with one matrix.
    std::span<const double> jacobi_inv_diag = {};
};

// Preconditioned conjugate gradient for symmetric positive (semi-)definite
// systems.  With Nullspace::Constants the right-hand side and all iterates
// are projected onto the zero-sum subspace and the returned solution is
// shifted to zero weighted mean; an inconsistent right-hand side
// (sum(b)/|b| beyond 1e-8) throws.
std::pair<std::vector<double>, SolveReport> cg_solve(const SparseMatrix& A, std::span<const double> b,
                                                     const SolveOptions& opts = {});

double weighted_mean(std::span<const double> x, std::span<const double> weights);

}  // namespace ctstokes
