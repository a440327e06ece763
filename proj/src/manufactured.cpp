#include "ctstokes/manufactured.hpp"

#include <cmath>

namespace ctstokes {

namespace {
constexpr double kPi = 3.14159265358979323846;

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }
}  // namespace

Vec2 AnalyticStokes::velocity_factor(Vec2 x) {
    const double sx = std::sin(kPi * x.x), sy = std::sin(kPi * x.y);
    return {kPi * std::sin(2.0 * kPi * x.y) * sx * sx, -kPi * std::sin(2.0 * kPi * x.x) * sy * sy};
}

Mat2 AnalyticStokes::velocity_factor_gradient(Vec2 x) {
    const double s2x = std::sin(2.0 * kPi * x.x), c2x = std::cos(2.0 * kPi * x.x);
    const double s2y = std::sin(2.0 * kPi * x.y), c2y = std::cos(2.0 * kPi * x.y);
    const double sx2 = std::sin(kPi * x.x) * std::sin(kPi * x.x);
    const double sy2 = std::sin(kPi * x.y) * std::sin(kPi * x.y);
    Mat2 m;
    m.a00 = kPi * kPi * s2y * s2x;
    m.a01 = 2.0 * kPi * kPi * c2y * sx2;
    m.a10 = -2.0 * kPi * kPi * c2x * sy2;
    m.a11 = -kPi * kPi * s2x * s2y;
    return m;
}

Vec2 AnalyticStokes::velocity_factor_laplacian(Vec2 x) {
    const double s2x = std::sin(2.0 * kPi * x.x), c2x = std::cos(2.0 * kPi * x.x);
    const double s2y = std::sin(2.0 * kPi * x.y), c2y = std::cos(2.0 * kPi * x.y);
    const double pi3 = kPi * kPi * kPi;
    return {2.0 * pi3 * s2y * (2.0 * c2x - 1.0), -2.0 * pi3 * s2x * (2.0 * c2y - 1.0)};
}

double AnalyticStokes::pressure_factor(Vec2 x) { return std::cos(kPi * x.x) * std::sin(kPi * x.y); }

Vec2 AnalyticStokes::pressure_factor_gradient(Vec2 x) {
    return {-kPi * std::sin(kPi * x.x) * std::sin(kPi * x.y), kPi * std::cos(kPi * x.x) * std::cos(kPi * x.y)};
}

Vec2 AnalyticStokes::velocity(double t, Vec2 x) const { return std::sin(lambda * t) * velocity_factor(x); }

Mat2 AnalyticStokes::velocity_gradient(double t, Vec2 x) const {
    Mat2 m = velocity_factor_gradient(x);
    const double s = std::sin(lambda * t);
    m.a00 *= s;
    m.a01 *= s;
    m.a10 *= s;
    m.a11 *= s;
    return m;
}

Vec2 AnalyticStokes::velocity_time_derivative(double t, Vec2 x) const {
    return (lambda * std::cos(lambda * t)) * velocity_factor(x);
}

double AnalyticStokes::divergence(double t, Vec2 x) const {
    const Mat2 m = velocity_gradient(t, x);
    return m.a00 + m.a11;
}

Vec2 AnalyticStokes::laplacian(double t, Vec2 x) const { return std::sin(lambda * t) * velocity_factor_laplacian(x); }

double AnalyticStokes::pressure(double t, Vec2 x) const { return std::sin(lambda * t) * pressure_factor(x); }

Vec2 AnalyticStokes::pressure_gradient(double t, Vec2 x) const {
    return std::sin(lambda * t) * pressure_factor_gradient(x);
}

Vec2 AnalyticStokes::forcing(double t, Vec2 x) const {
    const double c = std::cos(lambda * t), s = std::sin(lambda * t);
    const Vec2 u = velocity_factor(x);
    const Vec2 lap = velocity_factor_laplacian(x);
    const Vec2 gp = pressure_factor_gradient(x);
    return {lambda * c * u.x + s * (-mu * lap.x + gp.x), lambda * c * u.y + s * (-mu * lap.y + gp.y)};
}

AveragedLoadAssembler::AveragedLoadAssembler(const FemSystem& system, const AnalyticStokes& exact, int quad_degree)
    : lambda_(exact.lambda) {
    const QuadratureRule rule = make_quadrature(quad_degree);
    const double mu = exact.mu;
    load_cos_ = assemble_velocity_load(system, rule, [&](const PointContext& pt) {
        return exact.lambda * AnalyticStokes::velocity_factor(pt.pos);
    });
    load_sin_ = assemble_velocity_load(system, rule, [&](const PointContext& pt) {
        const Vec2 lap = AnalyticStokes::velocity_factor_laplacian(pt.pos);
        const Vec2 gp = AnalyticStokes::pressure_factor_gradient(pt.pos);
        return Vec2{-mu * lap.x + gp.x, -mu * lap.y + gp.y};
    });
}

std::pair<double, double> AveragedLoadAssembler::average_coefficients(double lambda, double t0, double dt) {
    // (1/dt) int cos(lambda s) ds = cos(lambda t_mid) sinc(lambda dt / 2),
    // and likewise with sin; exact and stable as lambda*dt -> 0.
    const double t_mid = t0 + 0.5 * dt;
    const double k = sinc(0.5 * lambda * dt);
    return {std::cos(lambda * t_mid) * k, std::sin(lambda * t_mid) * k};
}

std::vector<double> AveragedLoadAssembler::load(double t0, double dt) const {
    const auto [c, s] = average_coefficients(lambda_, t0, dt);
    std::vector<double> out(load_cos_.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = c * load_cos_[i] + s * load_sin_[i];
    return out;
}

}  // namespace ctstokes
