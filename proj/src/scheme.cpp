#include "ctstokes/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ctstokes {

TimeGrid TimeGrid::uniform(double T, int num_steps) {
    if (num_steps < 1 || !(T > 0.0)) throw std::invalid_argument("TimeGrid::uniform: need T > 0 and N >= 1");
    return from_steps(std::vector<double>(num_steps, T / num_steps));
}

TimeGrid TimeGrid::from_steps(std::vector<double> steps) {
    TimeGrid grid;
    grid.dt = std::move(steps);
    grid.t.resize(grid.dt.size() + 1);
    grid.t[0] = 0.0;
    for (size_t n = 0; n < grid.dt.size(); ++n) {
        if (!(grid.dt[n] > 0.0)) throw std::invalid_argument("TimeGrid: all step sizes must be positive");
        grid.t[n + 1] = grid.t[n] + grid.dt[n];
    }
    grid.horizon = grid.t.back();
    return grid;
}

int TimeGrid::interval_of(double t_query) const {
    if (!(t_query > 0.0) || t_query > horizon * (1.0 + 1e-12))
        throw std::out_of_range("TimeGrid: time outside (0, T]");
    // first node >= t_query; interval (t_n, t_{n+1}] has left-limit convention
    const auto it = std::lower_bound(t.begin(), t.end(), t_query);
    int n = static_cast<int>(it - t.begin());
    n = std::min(std::max(n, 1), num_steps());
    return n - 1;
}

std::vector<double> velocity_step(const FemSystem& system, const SparseMatrix& momentum,
                                  std::span<const double> u_prev, std::span<const double> p_curr, double dt,
                                  std::span<const double> load, double tol, int maxit, SolveReport* report) {
    const int n = system.velocity.dofs;
    std::vector<double> rhs(n);
    spmv_into(system.M, u_prev, rhs);
    const std::vector<double> gp = spmv(system.G, p_curr);
    for (int i = 0; i < n; ++i) rhs[i] = load[i] + rhs[i] / dt - gp[i];
    system.zero_dirichlet(rhs);

    SolveOptions opts;
    opts.tol = tol;
    opts.maxit = maxit;
    auto [u, rep] = cg_solve(momentum, rhs, opts);
    if (report) *report = rep;
    if (!rep.converged)
        throw std::runtime_error("velocity_step: CG did not converge (residual " +
                                 std::to_string(rep.final_residual) + ")");
    return u;
}

std::vector<double> pressure_step(const FemSystem& system, std::span<const double> u_half, double dt_next, double tol,
                                  int maxit, SolveReport* report) {
    if (!(dt_next > 0.0)) throw std::invalid_argument("pressure_step: dt_next must be positive");
    std::vector<double> rhs = spmv(system.D, u_half);
    double sum = 0.0, nrm = 0.0, u_nrm = 0.0;
    for (double v : rhs) {
        sum += v;
        nrm += v * v;
    }
    nrm = std::sqrt(nrm);
    for (double v : u_half) u_nrm += v * v;
    // sum_i (D u)_i = int div u_h, zero for u_h with homogeneous Dirichlet
    // data; skip the check when the whole right-hand side sits at assembly
    // round-off (exactly divergence-free fields)
    const double noise_floor = 1e-12 * system.D.max_abs() * std::sqrt(u_nrm);
    if (nrm > noise_floor && std::abs(sum) > 1e-10 * nrm)
        throw std::runtime_error("pressure_step: right-hand side not orthogonal to constants");
    // remove the round-off component along the constants before solving
    const double mean = sum / static_cast<double>(rhs.size());
    for (double& v : rhs) v = -(v - mean) / dt_next;

    SolveOptions opts;
    opts.tol = tol;
    opts.maxit = maxit;
    opts.nullspace = Nullspace::Constants;
    opts.mean_weights = system.pressure.lumped_mass;
    auto [p, rep] = cg_solve(system.Kp, rhs, opts);
    if (report) *report = rep;
    if (!rep.converged)
        throw std::runtime_error("pressure_step: CG did not converge (residual " +
                                 std::to_string(rep.final_residual) + ")");
    return p;
}

SchemeTrajectory run_scheme(const FemSystem& system, const TimeGrid& grid,
                            const std::function<std::vector<double>(int, double, double)>& forcing_avg,
                            std::vector<double> u0, const SchemeOptions& opts) {
    SchemeTrajectory traj;
    traj.grid = grid;
    const int num_steps = grid.num_steps();
    traj.u_half.reserve(num_steps + 1);
    traj.p.reserve(num_steps + 1);

    system.zero_dirichlet(u0);
    traj.u_half.push_back(std::move(u0));
    traj.p.emplace_back(system.pressure.dofs, 0.0);

    SparseMatrix momentum;
    double momentum_dt = -1.0;
    for (int n = 0; n < num_steps; ++n) {
        const double dt = grid.dt[n];
        if (dt != momentum_dt) {
            momentum = system.momentum_matrix(dt);
            momentum_dt = dt;
        }
        StepDiagnostics diag;
        diag.step = n;
        diag.t = grid.t[n + 1];
        try {
            const std::vector<double> load = forcing_avg(n, grid.t[n], dt);
            std::vector<double> u_new = velocity_step(system, momentum, traj.u_half[n], traj.p[n], dt, load,
                                                      opts.solver_tol, opts.solver_maxit, &diag.velocity_solve);
            std::vector<double> p_new = pressure_step(system, u_new, grid.dt_next(n), opts.solver_tol,
                                                      opts.solver_maxit, &diag.pressure_solve);
            traj.u_half.push_back(std::move(u_new));
            traj.p.push_back(std::move(p_new));
        } catch (const std::exception& err) {
            throw std::runtime_error("run_scheme: step " + std::to_string(n) + " failed: " + err.what());
        }
        if (opts.on_step) {
            const auto& u = traj.u_half.back();
            diag.div_u_norm = std::sqrt(integrate_field(system, make_quadrature(2), [&](const PointContext& pt) {
                const double d = pt.p2_div(u);
                return d * d;
            }));
            opts.on_step(diag);
        }
        traj.diagnostics.push_back(diag);
    }
    return traj;
}

Reconstruction reconstruct(const SchemeTrajectory& traj, double t) {
    Reconstruction rec;
    const int n = traj.grid.interval_of(t);
    rec.interval = n;
    const double theta = (t - traj.grid.t[n]) / traj.grid.dt[n];
    const auto& a = traj.u_half[n];
    const auto& b = traj.u_half[n + 1];
    rec.u.resize(a.size());
    for (size_t i = 0; i < a.size(); ++i) rec.u[i] = (1.0 - theta) * a[i] + theta * b[i];
    rec.u_forward = b;
    rec.p = traj.p[n];
    return rec;
}

}  // namespace ctstokes
