#pragma once

#include <functional>
#include <vector>

#include "ctstokes/fem.hpp"
#include "ctstokes/sparse.hpp"

namespace ctstokes {

// Time grid t_n = sum_{k<n} dt_k with horizon T = t_N.
struct TimeGrid {
    std::vector<double> dt;  // step sizes, n = 0..N-1
    std::vector<double> t;   // node times, n = 0..N
    double horizon = 0.0;

    static TimeGrid uniform(double T, int num_steps);
    static TimeGrid from_steps(std::vector<double> steps);
    int num_steps() const { return static_cast<int>(dt.size()); }
    // dt^{n+1} used by the pressure step; the last step reuses dt^{N-1}.
    double dt_next(int n) const { return n + 1 < num_steps() ? dt[n + 1] : dt.back(); }
    // interval index such that t is in (t_n, t_{n+1}]; requires 0 < t <= T.
    int interval_of(double t_query) const;
};

struct StepDiagnostics {
    int step = 0;
    double t = 0.0;
    SolveReport velocity_solve;
    SolveReport pressure_solve;
    double div_u_norm = -1.0;  // |div u^{n+1/2}|_Q, filled only when logging
};

// Snapshot sequence (t_n, u^{n-1/2}, p^n), n = 0..N.
struct SchemeTrajectory {
    TimeGrid grid;
    std::vector<std::vector<double>> u_half;  // u_half[n] = u^{n-1/2}
    std::vector<std::vector<double>> p;       // p[n] = p^n, zero weighted mean
    std::vector<StepDiagnostics> diagnostics;

    int num_steps() const { return grid.num_steps(); }
};

// Evaluated reconstructions at one time: piecewise-linear velocity,
// piecewise-constant pressure p^n, and the forward velocity u^{n+1/2},
// on the half-open interval (t_n, t_{n+1}].
struct Reconstruction {
    std::vector<double> u;
    std::vector<double> p;
    std::vector<double> u_forward;
    int interval = 0;
};

// Viscous step: solve (M/dt + mu K) U = load + (M/dt) U_prev - G P with
// homogeneous Dirichlet conditions.  The eliminated momentum matrix is
// passed in so a uniform-dt run builds it once.
std::vector<double> velocity_step(const FemSystem& system, const SparseMatrix& momentum,
                                  std::span<const double> u_prev, std::span<const double> p_curr, double dt,
                                  std::span<const double> load, double tol, int maxit, SolveReport* report = nullptr);

// Projection step: solve Kp P = -(1/dt_next) D U with constant-nullspace
// deflation; throws if the right-hand side is not orthogonal to constants
// within 1e-10 relative (a Dirichlet-enforcement bug upstream).
std::vector<double> pressure_step(const FemSystem& system, std::span<const double> u_half, double dt_next, double tol,
                                  int maxit, SolveReport* report = nullptr);

struct SchemeOptions {
    double solver_tol = 1e-10;
    int solver_maxit = 10000;
    // Called after each completed step when set.
    std::function<void(const StepDiagnostics&)> on_step;
};

// March the scheme from u^{-1/2} = u0, p^0 = 0; any solver failure throws
// with the step index in the message.
SchemeTrajectory run_scheme(const FemSystem& system, const TimeGrid& grid,
                            const std::function<std::vector<double>(int, double, double)>& forcing_avg,
                            std::vector<double> u0, const SchemeOptions& opts = {});

Reconstruction reconstruct(const SchemeTrajectory& traj, double t);

}  // namespace ctstokes
