#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <functional>

#include "ctstokes/quadrature.hpp"

using namespace ctstokes;

namespace {

double monomial_integral(int a, int b) {
    // int over reference triangle of x^a y^b = a! b! / (a+b+2)!
    double num = 1.0;
    for (int i = 2; i <= a; ++i) num *= i;
    for (int i = 2; i <= b; ++i) num *= i;
    double den = 1.0;
    for (int i = 2; i <= a + b + 2; ++i) den *= i;
    return num / den;
}

double apply(const QuadratureRule& rule, const std::function<double(double, double)>& f) {
    double s = 0.0;
    for (int k = 0; k < rule.num_points(); ++k) s += rule.weight[k] * f(rule.xi[k], rule.eta[k]);
    return s;
}

}  // namespace

TEST_CASE("weights sum to the reference area") {
    for (int degree : {2, 4, 6}) {
        const QuadratureRule rule = make_quadrature(degree);
        double sum = 0.0;
        for (double w : rule.weight) sum += w;
        CHECK(sum == doctest::Approx(0.5).epsilon(1e-14));
    }
}

TEST_CASE("named monomial values") {
    CHECK(apply(make_quadrature(2), [](double, double) { return 1.0; }) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(apply(make_quadrature(4), [](double x, double y) { return x * x * y * y; }) ==
          doctest::Approx(1.0 / 180.0).epsilon(1e-13));
    const double sextic = apply(make_quadrature(6), [](double x, double y) { return x * x * x * y * y * y; });
    CHECK(std::abs(sextic - monomial_integral(3, 3)) <= 1e-15);
}

TEST_CASE("rules integrate all monomials up to their degree") {
    for (int degree : {2, 4, 6}) {
        const QuadratureRule rule = make_quadrature(degree);
        for (int a = 0; a <= degree; ++a)
            for (int b = 0; a + b <= degree; ++b) {
                const double value =
                    apply(rule, [&](double x, double y) { return std::pow(x, a) * std::pow(y, b); });
                const double reference = monomial_integral(a, b);
                CHECK(std::abs(value - reference) <= 1e-14 * std::abs(reference));
            }
    }
}

TEST_CASE("points lie inside the reference triangle") {
    for (int degree : {2, 4, 6}) {
        const QuadratureRule rule = make_quadrature(degree);
        for (int k = 0; k < rule.num_points(); ++k) {
            CHECK(rule.xi[k] >= -1e-15);
            CHECK(rule.eta[k] >= -1e-15);
            CHECK(rule.xi[k] + rule.eta[k] <= 1.0 + 1e-15);
            CHECK(rule.weight[k] > 0.0);
        }
    }
}

TEST_CASE("unsupported degree throws") {
    CHECK_THROWS_AS(make_quadrature(3), std::invalid_argument);
    CHECK_THROWS_AS(make_quadrature(8), std::invalid_argument);
}

TEST_CASE("Gauss-Legendre rules on the unit interval") {
    for (int n = 1; n <= 5; ++n) {
        const GaussLegendre g = gauss_legendre_unit(n);
        // exact for polynomials up to degree 2n-1
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double value = 0.0;
            for (size_t k = 0; k < g.points.size(); ++k) value += g.weights[k] * std::pow(g.points[k], p);
            CHECK(value == doctest::Approx(1.0 / (p + 1)).epsilon(1e-13));
        }
    }
    CHECK_THROWS_AS(gauss_legendre_unit(6), std::invalid_argument);
}
