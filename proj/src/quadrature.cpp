#include "ctstokes/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace ctstokes {

namespace {

void add_point(QuadratureRule& rule, double l1, double l2, double w) {
    // barycentric (l0,l1,l2) -> reference (xi,eta) = (l1,l2); weights are
    // normalized to sum 1 in the tables, 1/2 over the reference triangle.
    rule.xi.push_back(l1);
    rule.eta.push_back(l2);
    rule.weight.push_back(0.5 * w);
}

// Orbit of (a, b, b) with b = (1-a)/2: three cyclic permutations.
void add_sym3(QuadratureRule& rule, double a, double w) {
    const double b = 0.5 * (1.0 - a);
    add_point(rule, b, b, w);
    add_point(rule, a, b, w);
    add_point(rule, b, a, w);
}

// Full orbit of (a, b, 1-a-b): six permutations.
void add_sym6(QuadratureRule& rule, double a, double b, double w) {
    const double c = 1.0 - a - b;
    add_point(rule, b, c, w);
    add_point(rule, c, a, w);
    add_point(rule, a, b, w);
    add_point(rule, c, b, w);
    add_point(rule, b, a, w);
    add_point(rule, a, c, w);
}

}  // namespace

QuadratureRule make_quadrature(int degree) {
    QuadratureRule rule;
    rule.degree = degree;
    switch (degree) {
        case 2:
            // Edge-midpoint rule.
            add_sym3(rule, 0.0, 1.0 / 3.0);
            break;
        case 4:
            // Dunavant degree 4, 6 points.
            add_sym3(rule, 0.108103018168070, 0.223381589678011);
            add_sym3(rule, 0.816847572980459, 0.109951743655322);
            break;
        case 6:
            // Dunavant degree 6, 12 points.
            add_sym3(rule, 0.873821971016996, 0.050844906370207);
            add_sym3(rule, 0.501426509658179, 0.116786275726379);
            add_sym6(rule, 0.636502499121399, 0.310352451033785, 0.082851075618374);
            break;
        default:
            throw std::invalid_argument("make_quadrature: supported degrees are 2, 4, 6");
    }
    return rule;
}

GaussLegendre gauss_legendre_unit(int num_points) {
    GaussLegendre g;
    // Nodes/weights on [-1,1], mapped to [0,1].
    std::vector<double> x, w;
    switch (num_points) {
        case 1:
            x = {0.0};
            w = {2.0};
            break;
        case 2:
            x = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
            w = {1.0, 1.0};
            break;
        case 3:
            x = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
            w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
            break;
        case 4: {
            const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
            const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
            const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
            x = {-b, -a, a, b};
            w = {wb, wa, wa, wb};
            break;
        }
        case 5: {
            const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
            const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
            const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
            const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
            x = {-b, -a, 0.0, a, b};
            w = {wb, wa, 128.0 / 225.0, wa, wb};
            break;
        }
        default:
            throw std::invalid_argument("gauss_legendre_unit: 1..5 points supported");
    }
    for (size_t i = 0; i < x.size(); ++i) {
        g.points.push_back(0.5 * (x[i] + 1.0));
        g.weights.push_back(0.5 * w[i]);
    }
    return g;
}

}  // namespace ctstokes
