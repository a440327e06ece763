#pragma once

#include <functional>
#include <vector>

#include "ctstokes/fem.hpp"
#include "ctstokes/manufactured.hpp"
#include "ctstokes/scheme.hpp"

namespace ctstokes {

// Everything accumulated per interval (t_n, t_{n+1}]; squared-norm units
// except div_rate_l1 which is squared only after summation over intervals.
struct IntervalTerms {
    double grad_increment = 0.0;       // mu int |grad(u+ - u)|^2 dt
    double div_l2 = 0.0;               // mu int |div u|^2 dt
    double div_rate_l1 = 0.0;          // int |div du/dt| dt
    double div_rate_l2 = 0.0;          // int |div du/dt|^2 dt
    double pressure_increment = 0.0;   // |dt' grad p' - dt grad p|^2
    double div_endpoint_sq_max = 0.0;  // max(|div u^{n-1/2}|^2, |div u^{n+1/2}|^2)
    double data_osc = 0.0;             // int |f - f_avg|^2 dt
    double err_grad = 0.0;             // mu int |grad(u_exact - u)|^2 dt
    double err_dual = 0.0;             // int |d/dt e_u + grad e_p|^2_{U'} dt
};

struct EstimatorOptions {
    int error_quad_degree = 6;      // space rule for exact-solution integrals
    int time_gauss_points = 3;      // per-interval Gauss points for error terms
    int data_osc_gauss_points = 5;  // per-interval Gauss points for the data term
    bool compute_error_terms = true;
    bool compute_err_dual = true;  // the Riesz solves dominate the cost
    double solver_tol = 1e-10;
    int solver_maxit = 10000;
};

// L2 pairings of the divergences of two velocity fields, in one mesh sweep:
// |div a|^2, (div a, div b), |div b|^2 and |div(b - a)|^2 (the latter formed
// pointwise, not by expansion, to keep small increments accurate).
struct DivQuantities {
    double aa = 0.0, ab = 0.0, bb = 0.0, diff = 0.0;
};
DivQuantities div_quantities(const FemSystem& system, std::span<const double> a, std::span<const double> b);

// Squared discrete dual norm of a velocity-space functional with respect to
// the full H1 norm: solve (grad w, grad v) + (w, v) = (g, v) on the
// Dirichlet space and return (g, w).  The eliminated Riesz matrix is passed
// in so callers assemble it once.
double dual_norm_sq(const FemSystem& system, const SparseMatrix& riesz,
                    const std::function<Vec2(const PointContext&)>& g, int quad_degree = 6, double tol = 1e-10,
                    int maxit = 10000);

// Per-interval evaluation of every estimator and error ingredient.  Exact
// spatial factors are tabulated at the error-rule quadrature points on
// construction; evaluate() is const and safe to call concurrently for
// distinct intervals.
class IntervalEvaluator {
public:
    IntervalEvaluator(const FemSystem& system, const AnalyticStokes& exact, EstimatorOptions opts = {});

    // Closed-form reconstruction terms only (no exact-solution integrals).
    IntervalTerms closed_form_terms(const SchemeTrajectory& traj, int n) const;
    // Closed-form terms plus err_grad, err_dual, data_osc when enabled.
    IntervalTerms evaluate(const SchemeTrajectory& traj, int n) const;

    const SparseMatrix& riesz_matrix() const { return riesz_; }
    const EstimatorOptions& options() const { return opts_; }

private:
    const FemSystem& system_;
    AnalyticStokes exact_;
    EstimatorOptions opts_;
    QuadratureRule error_rule_;
    detail::ShapeTable error_table_;
    SparseMatrix riesz_;
    std::vector<double> riesz_inv_diag_;
    // exact spatial factors per (triangle, quadrature point)
    std::vector<Vec2> factor_u_;
    std::vector<Mat2> factor_grad_u_;
    std::vector<Vec2> factor_grad_p_;
    // Gram scalars of the separated forcing f = cos(lambda t) A + sin(lambda t) B
    double gram_aa_ = 0.0, gram_ab_ = 0.0, gram_bb_ = 0.0;

    void add_error_terms(const SchemeTrajectory& traj, int n, IntervalTerms& terms) const;
};

// Cumulative estimator state with one checkpoint row per accumulated
// interval.  Estimator definitions:
//   est1 = S(grad_increment) + S(div_l2) + S(div_rate_l1)^2
//   est2 = S(grad_increment) + S(div_l2) + S(div_rate_l2)
//   est3 = S(grad_increment) + S(pressure_increment)
//   error = S(err_grad) + S(err_dual)
// where S sums over intervals; the L-infinity divergence term is tracked as
// a running max and added to each estimator's effectivity when enabled.
struct LedgerRow {
    int checkpoint = 0;  // index n of t_n, 1-based
    double t = 0.0;
    double est1 = 0.0, est2 = 0.0, est3 = 0.0, linf_term = 0.0;
    double error_grad_sq = 0.0, error_dual_sq = 0.0, error_total = 0.0, data_osc = 0.0;
    double eff1 = 0.0, eff2 = 0.0, eff3 = 0.0;  // NaN flags a zero-error run
};

class EstimatorLedger {
public:
    explicit EstimatorLedger(bool include_linf_in_effectivity = true)
        : include_linf_(include_linf_in_effectivity) {}

    // Intervals must arrive in order n = 0, 1, ...; throws otherwise.
    void accumulate(const IntervalTerms& terms, int n, double t_next);

    const std::vector<LedgerRow>& rows() const { return rows_; }
    const LedgerRow& back() const { return rows_.back(); }
    double sum_div_rate_l1() const { return sum_div_rate_l1_; }
    double sum_grad_increment() const { return sum_grad_increment_; }
    double sum_div_l2() const { return sum_div_l2_; }

private:
    bool include_linf_;
    int next_interval_ = 0;
    double sum_grad_increment_ = 0.0, sum_div_l2_ = 0.0, sum_div_rate_l1_ = 0.0, sum_div_rate_l2_ = 0.0;
    double sum_pressure_increment_ = 0.0, max_div_endpoint_ = 0.0, sum_data_osc_ = 0.0;
    double sum_err_grad_ = 0.0, sum_err_dual_ = 0.0;
    std::vector<LedgerRow> rows_;
};

}  // namespace ctstokes
