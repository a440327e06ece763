#pragma once

#include <vector>

namespace ctstokes {

// Symmetric Gauss rule on the reference triangle {(xi,eta): xi,eta>=0, xi+eta<=1}.
// Points are stored as (xi, eta); weights sum to the reference area 1/2, so a
// physical integral is |det J| * sum_i w_i f(x_i).
struct QuadratureRule {
    int degree = 0;
    std::vector<double> xi, eta, weight;
    int num_points() const { return static_cast<int>(weight.size()); }
};

// Supported degrees: 2 (3 points), 4 (6 points), 6 (12 points).
QuadratureRule make_quadrature(int degree);

// Gauss-Legendre points/weights on [0,1], for time quadrature (1..5 points).
struct GaussLegendre {
    std::vector<double> points, weights;
};
GaussLegendre gauss_legendre_unit(int num_points);

}  // namespace ctstokes
