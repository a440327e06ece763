#include "ctstokes/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctstokes {

DivQuantities div_quantities(const FemSystem& system, std::span<const double> a, std::span<const double> b) {
    // div of a P2 field is linear per element, so products are quadratic.
    const QuadratureRule rule = make_quadrature(2);
    const detail::ShapeTable table(rule);
    DivQuantities q;
    PointContext pt;
    for (size_t t = 0; t < system.geometry.size(); ++t) {
        pt.tri = static_cast<int>(t);
        for (int k = 0; k < rule.num_points(); ++k) {
            detail::fill_point(pt, system.geometry[t], rule, table, k);
            const double da = pt.p2_div(a), db = pt.p2_div(b);
            q.aa += pt.weight * da * da;
            q.ab += pt.weight * da * db;
            q.bb += pt.weight * db * db;
            q.diff += pt.weight * (db - da) * (db - da);
        }
    }
    return q;
}

double dual_norm_sq(const FemSystem& system, const SparseMatrix& riesz,
                    const std::function<Vec2(const PointContext&)>& g, int quad_degree, double tol, int maxit) {
    std::vector<double> load = assemble_velocity_load(system, make_quadrature(quad_degree), g);
    system.zero_dirichlet(load);
    SolveOptions opts;
    opts.tol = tol;
    opts.maxit = maxit;
    auto [w, report] = cg_solve(riesz, load, opts);
    if (!report.converged) throw std::runtime_error("dual_norm_sq: Riesz solve did not converge");
    double value = 0.0;
    for (size_t i = 0; i < w.size(); ++i) value += load[i] * w[i];
    return value;
}

IntervalEvaluator::IntervalEvaluator(const FemSystem& system, const AnalyticStokes& exact, EstimatorOptions opts)
    : system_(system),
      exact_(exact),
      opts_(opts),
      error_rule_(make_quadrature(opts.error_quad_degree)),
      error_table_(error_rule_),
      riesz_(system.riesz_matrix()) {
    riesz_inv_diag_.assign(riesz_.rows, 1.0);
    for (int i = 0; i < riesz_.rows; ++i)
        for (int k = riesz_.row_ptr[i]; k < riesz_.row_ptr[i + 1]; ++k)
            if (riesz_.col_idx[k] == i && riesz_.values[k] > 0.0) riesz_inv_diag_[i] = 1.0 / riesz_.values[k];

    const int nq = error_rule_.num_points();
    const size_t total = system.geometry.size() * nq;
    factor_u_.resize(total);
    factor_grad_u_.resize(total);
    factor_grad_p_.resize(total);
    PointContext pt;
    for (size_t t = 0; t < system.geometry.size(); ++t) {
        for (int k = 0; k < nq; ++k) {
            detail::fill_point(pt, system.geometry[t], error_rule_, error_table_, k);
            const size_t idx = t * nq + k;
            factor_u_[idx] = AnalyticStokes::velocity_factor(pt.pos);
            factor_grad_u_[idx] = AnalyticStokes::velocity_factor_gradient(pt.pos);
            factor_grad_p_[idx] = AnalyticStokes::pressure_factor_gradient(pt.pos);
            // forcing factors A = lambda U, B = -mu lap U + grad P
            const Vec2 a = exact_.lambda * factor_u_[idx];
            const Vec2 lap = AnalyticStokes::velocity_factor_laplacian(pt.pos);
            const Vec2 b{-exact_.mu * lap.x + factor_grad_p_[idx].x, -exact_.mu * lap.y + factor_grad_p_[idx].y};
            gram_aa_ += pt.weight * dot(a, a);
            gram_ab_ += pt.weight * dot(a, b);
            gram_bb_ += pt.weight * dot(b, b);
        }
    }
}

IntervalTerms IntervalEvaluator::closed_form_terms(const SchemeTrajectory& traj, int n) const {
    IntervalTerms terms;
    const double dt = traj.grid.dt[n];
    const double mu = system_.mu;
    const auto& a = traj.u_half[n];
    const auto& b = traj.u_half[n + 1];

    std::vector<double> diff(a.size());
    for (size_t i = 0; i < a.size(); ++i) diff[i] = b[i] - a[i];
    const std::vector<double> k_diff = spmv(system_.K, diff);
    double grad_diff_sq = 0.0;
    for (size_t i = 0; i < diff.size(); ++i) grad_diff_sq += diff[i] * k_diff[i];
    terms.grad_increment = mu * (dt / 3.0) * grad_diff_sq;

    const DivQuantities q = div_quantities(system_, a, b);
    terms.div_l2 = mu * (dt / 3.0) * (q.aa + q.ab + q.bb);
    terms.div_rate_l1 = std::sqrt(q.diff);
    terms.div_rate_l2 = q.diff / dt;
    terms.div_endpoint_sq_max = std::max(q.aa, q.bb);

    // |dt^{n+1} grad p^{n+1} - dt^n grad p^n|^2; P1 gradients are constant
    // per element.
    const double dt_next = traj.grid.dt_next(n);
    const auto& p0 = traj.p[n];
    const auto& p1 = traj.p[n + 1];
    double pinc = 0.0;
    for (const auto& geom : system_.geometry) {
        Vec2 g{0.0, 0.0};
        for (int i = 0; i < 3; ++i) {
            const double c = dt_next * p1[geom.p1_nodes[i]] - dt * p0[geom.p1_nodes[i]];
            g.x += c * geom.grad_bary[i].x;
            g.y += c * geom.grad_bary[i].y;
        }
        pinc += 0.5 * geom.det * dot(g, g);
    }
    terms.pressure_increment = pinc;
    return terms;
}

void IntervalEvaluator::add_error_terms(const SchemeTrajectory& traj, int n, IntervalTerms& terms) const {
    const double dt = traj.grid.dt[n];
    const double t0 = traj.grid.t[n];
    const double lambda = exact_.lambda;
    const auto& a = traj.u_half[n];
    const auto& b = traj.u_half[n + 1];
    const auto& p = traj.p[n];

    const GaussLegendre gauss = gauss_legendre_unit(opts_.time_gauss_points);
    const int num_times = static_cast<int>(gauss.points.size());
    std::vector<double> sin_t(num_times), dudt_coeff(num_times);
    for (int k = 0; k < num_times; ++k) {
        const double tk = t0 + dt * gauss.points[k];
        sin_t[k] = std::sin(lambda * tk);
        dudt_coeff[k] = lambda * std::cos(lambda * tk);
    }

    std::vector<double> du(a.size());
    for (size_t i = 0; i < a.size(); ++i) du[i] = (b[i] - a[i]) / dt;

    // One mesh sweep accumulates the grad-error integrand and the Riesz
    // right-hand sides for every Gauss time.
    const bool with_dual = opts_.compute_err_dual;
    std::vector<double> err_grad_at(num_times, 0.0);
    std::vector<std::vector<double>> loads(with_dual ? num_times : 0,
                                           std::vector<double>(system_.velocity.dofs, 0.0));
    const int nq = error_rule_.num_points();
    PointContext pt;
    for (size_t t = 0; t < system_.geometry.size(); ++t) {
        const auto& geom = system_.geometry[t];
        pt.tri = static_cast<int>(t);
        for (int k = 0; k < nq; ++k) {
            detail::fill_point(pt, geom, error_rule_, error_table_, k);
            const size_t idx = t * nq + k;
            const Mat2 grad_a = pt.p2_vec_grad(a);
            const Mat2 grad_b = pt.p2_vec_grad(b);
            const Vec2 dudt_h = pt.p2_vec(du);
            const Vec2 gradp_h = pt.p1_grad(p);
            const Mat2& gu = factor_grad_u_[idx];
            const Vec2& uf = factor_u_[idx];
            const Vec2& gpf = factor_grad_p_[idx];
            for (int m = 0; m < num_times; ++m) {
                const double theta = gauss.points[m];
                const double s = sin_t[m];
                Mat2 eg;
                eg.a00 = s * gu.a00 - (1.0 - theta) * grad_a.a00 - theta * grad_b.a00;
                eg.a01 = s * gu.a01 - (1.0 - theta) * grad_a.a01 - theta * grad_b.a01;
                eg.a10 = s * gu.a10 - (1.0 - theta) * grad_a.a10 - theta * grad_b.a10;
                eg.a11 = s * gu.a11 - (1.0 - theta) * grad_a.a11 - theta * grad_b.a11;
                err_grad_at[m] += pt.weight * frobenius_sq(eg);
                if (!with_dual) continue;
                const Vec2 g{dudt_coeff[m] * uf.x - dudt_h.x + s * gpf.x - gradp_h.x,
                             dudt_coeff[m] * uf.y - dudt_h.y + s * gpf.y - gradp_h.y};
                auto& load = loads[m];
                for (int i = 0; i < 6; ++i) {
                    const int node = geom.p2_nodes[i];
                    load[2 * node] += pt.weight * pt.n2[i] * g.x;
                    load[2 * node + 1] += pt.weight * pt.n2[i] * g.y;
                }
            }
        }
    }

    double err_grad = 0.0;
    for (int m = 0; m < num_times; ++m) err_grad += gauss.weights[m] * err_grad_at[m];
    terms.err_grad = system_.mu * dt * err_grad;

    if (with_dual) {
        SolveOptions solve_opts;
        solve_opts.tol = opts_.solver_tol;
        solve_opts.maxit = opts_.solver_maxit;
        solve_opts.jacobi_inv_diag = riesz_inv_diag_;
        double err_dual = 0.0;
        std::vector<double> warm;
        for (int m = 0; m < num_times; ++m) {
            system_.zero_dirichlet(loads[m]);
            solve_opts.initial_guess = warm;
            auto [w, report] = cg_solve(riesz_, loads[m], solve_opts);
            if (!report.converged)
                throw std::runtime_error("interval error terms: Riesz solve did not converge at interval " +
                                         std::to_string(n));
            double value = 0.0;
            for (size_t i = 0; i < w.size(); ++i) value += loads[m][i] * w[i];
            err_dual += gauss.weights[m] * value;
            warm = std::move(w);
        }
        terms.err_dual = dt * err_dual;
    }

    // Data oscillation from the Gram scalars of the separated forcing.
    const auto [c_avg, s_avg] = AveragedLoadAssembler::average_coefficients(lambda, t0, dt);
    const GaussLegendre data_gauss = gauss_legendre_unit(opts_.data_osc_gauss_points);
    double osc = 0.0;
    for (size_t m = 0; m < data_gauss.points.size(); ++m) {
        const double tk = t0 + dt * data_gauss.points[m];
        const double dc = std::cos(lambda * tk) - c_avg;
        const double ds = std::sin(lambda * tk) - s_avg;
        osc += data_gauss.weights[m] * (dc * dc * gram_aa_ + 2.0 * dc * ds * gram_ab_ + ds * ds * gram_bb_);
    }
    terms.data_osc = dt * osc;
}

IntervalTerms IntervalEvaluator::evaluate(const SchemeTrajectory& traj, int n) const {
    if (n < 0 || n >= traj.num_steps()) throw std::out_of_range("IntervalEvaluator: interval index out of range");
    IntervalTerms terms = closed_form_terms(traj, n);
    if (opts_.compute_error_terms) add_error_terms(traj, n, terms);
    return terms;
}

void EstimatorLedger::accumulate(const IntervalTerms& terms, int n, double t_next) {
    if (n != next_interval_) throw std::invalid_argument("EstimatorLedger: intervals must be accumulated in order");
    ++next_interval_;

    sum_grad_increment_ += terms.grad_increment;
    sum_div_l2_ += terms.div_l2;
    sum_div_rate_l1_ += terms.div_rate_l1;
    sum_div_rate_l2_ += terms.div_rate_l2;
    sum_pressure_increment_ += terms.pressure_increment;
    max_div_endpoint_ = std::max(max_div_endpoint_, terms.div_endpoint_sq_max);
    sum_data_osc_ += terms.data_osc;
    sum_err_grad_ += terms.err_grad;
    sum_err_dual_ += terms.err_dual;

    LedgerRow row;
    row.checkpoint = next_interval_;
    row.t = t_next;
    row.est1 = sum_grad_increment_ + sum_div_l2_ + sum_div_rate_l1_ * sum_div_rate_l1_;
    row.est2 = sum_grad_increment_ + sum_div_l2_ + sum_div_rate_l2_;
    row.est3 = sum_grad_increment_ + sum_pressure_increment_;
    row.linf_term = max_div_endpoint_;
    row.error_grad_sq = sum_err_grad_;
    row.error_dual_sq = sum_err_dual_;
    row.error_total = sum_err_grad_ + sum_err_dual_;
    row.data_osc = sum_data_osc_;
    const double linf = include_linf_ ? row.linf_term : 0.0;
    if (row.error_total > 0.0) {
        row.eff1 = (row.est1 + linf) / row.error_total;
        row.eff2 = (row.est2 + linf) / row.error_total;
        row.eff3 = (row.est3 + linf) / row.error_total;
    } else {
        row.eff1 = row.eff2 = row.eff3 = std::numeric_limits<double>::quiet_NaN();
    }
    rows_.push_back(row);
}

}  // namespace ctstokes
