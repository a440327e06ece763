#pragma once

#include <vector>

#include "ctstokes/fem.hpp"
#include "ctstokes/mesh.hpp"

namespace ctstokes {

// Closed-form unsteady Stokes solution on (-1,1)^2:
//   u(t,x) = sin(lambda t) * U(x),  U = pi (sin(2 pi y) sin^2(pi x), -sin(2 pi x) sin^2(pi y))
//   p(t,x) = sin(lambda t) * P(x),  P = cos(pi x) sin(pi y)
// U is divergence-free, vanishes on the boundary, and u(0,.) = 0.  The
// forcing f = du/dt - mu lap(u) + grad p separates in time as
//   f(t,x) = cos(lambda t) * lambda U(x) + sin(lambda t) * (-mu lap U + grad P)(x).
struct AnalyticStokes {
    double lambda = 10.0;
    double mu = 1.0;

    // time-independent spatial factors
    static Vec2 velocity_factor(Vec2 x);
    static Mat2 velocity_factor_gradient(Vec2 x);
    static Vec2 velocity_factor_laplacian(Vec2 x);
    static double pressure_factor(Vec2 x);
    static Vec2 pressure_factor_gradient(Vec2 x);

    Vec2 velocity(double t, Vec2 x) const;
    Mat2 velocity_gradient(double t, Vec2 x) const;
    Vec2 velocity_time_derivative(double t, Vec2 x) const;
    double divergence(double t, Vec2 x) const;
    Vec2 laplacian(double t, Vec2 x) const;
    double pressure(double t, Vec2 x) const;
    Vec2 pressure_gradient(double t, Vec2 x) const;
    Vec2 forcing(double t, Vec2 x) const;
};

// Exact per-interval time averages of the separated forcing, assembled once:
//   f^{n+1} = (1/dt) int_{t_n}^{t_{n+1}} f  =  c_n * lambda * U + s_n * B
// with c_n = cos(lambda t_mid) sinc(lambda dt / 2) and
//      s_n = sin(lambda t_mid) sinc(lambda dt / 2).
class AveragedLoadAssembler {
public:
    AveragedLoadAssembler(const FemSystem& system, const AnalyticStokes& exact, int quad_degree = 4);

    // P2 load of the exact time average of f over [t0, t0+dt].
    std::vector<double> load(double t0, double dt) const;
    // Time-average coefficients multiplying the cos/sin spatial loads.
    static std::pair<double, double> average_coefficients(double lambda, double t0, double dt);

private:
    double lambda_;
    std::vector<double> load_cos_;  // assembled against lambda * U
    std::vector<double> load_sin_;  // assembled against -mu lap U + grad P
};

}  // namespace ctstokes
