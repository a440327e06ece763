#pragma once

#include <vector>

#include "ctstokes/fem.hpp"
#include "ctstokes/manufactured.hpp"
#include "ctstokes/scheme.hpp"

namespace ctstokes::acceptance {

// Coupled (unsplit) backward-Euler Stokes reference, solved per step via the
// pressure Schur complement with a Cahouet-Chabard preconditioner.  At small
// dt its remaining error is essentially the spatial discretization floor,
// which calibrates the projection-scheme convergence study.
struct MonolithicRun {
    TimeGrid grid;
    std::vector<std::vector<double>> u;  // u[n] at t_n, u[0] = u0
};

MonolithicRun run_monolithic_reference(const FemSystem& system, const AnalyticStokes& exact, double T, int steps,
                                       double tol = 1e-9);

// mu * int_0^T |grad(u_exact - u_h)|^2 dt with u_h piecewise linear in time
// through the given snapshots.
double grad_error_sq(const FemSystem& system, const AnalyticStokes& exact, const MonolithicRun& run);

}  // namespace ctstokes::acceptance
