#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ctstokes/mesh.hpp"
#include "ctstokes/quadrature.hpp"
#include "ctstokes/sparse.hpp"

namespace ctstokes {

// P2 scalar shape functions on the reference triangle, barycentric
// l0 = 1-xi-eta, l1 = xi, l2 = eta.  Local nodes 0..2 are the vertices,
// 3..5 the midpoints of local edges (0,1), (1,2), (2,0).
void p2_shape(double xi, double eta, std::array<double, 6>& n);
void p2_shape_deriv(double xi, double eta, std::array<std::array<double, 2>, 6>& dn);
void p1_shape(double xi, double eta, std::array<double, 3>& n);

// Per-triangle geometry cache: affine map x = v0 + xi*e1 + eta*e2.
struct ElementGeometry {
    std::array<int, 6> p2_nodes;  // global scalar node ids (vertices, then V + edge)
    std::array<int, 3> p1_nodes;  // vertex ids
    Vec2 v0, e1, e2;
    double det = 0.0;  // = 2*area, positive for ccw triangles
    std::array<Vec2, 3> grad_bary;
};

// P2 vector space: one scalar node per vertex and per edge midpoint,
// velocity dof index = 2*node + component.
struct VelocitySpace {
    int scalar_nodes = 0;
    int dofs = 0;
    std::vector<Vec2> node_pos;
    std::vector<std::uint8_t> dirichlet;  // per dof, both components of boundary nodes
};

// P1 scalar space on vertices with lumped mass weights (sum = |D|).
struct PressureSpace {
    int dofs = 0;
    std::vector<double> lumped_mass;
};

// Assembled operators of the scheme.  M, K, D, G are stored without boundary
// conditions; the Dirichlet mask is applied where a system is solved.
struct FemSystem {
    Mesh mesh;
    double mu = 1.0;
    VelocitySpace velocity;
    PressureSpace pressure;
    SparseMatrix M;   // velocity mass
    SparseMatrix K;   // velocity stiffness (grad-grad)
    SparseMatrix Kp;  // pressure stiffness, pure Neumann
    SparseMatrix D;   // (q_i, div phi_j), pressure rows x velocity cols
    SparseMatrix G;   // (phi_i, grad q_j), velocity rows x pressure cols
    std::vector<ElementGeometry> geometry;

    // eliminate(M/dt + mu K) for the viscous step.
    SparseMatrix momentum_matrix(double dt) const;
    // eliminate(K + M): Riesz map of the full H1 inner product on the
    // Dirichlet velocity space, used for dual norms.
    SparseMatrix riesz_matrix() const;
    void zero_dirichlet(std::span<double> velocity_vector) const;
};

FemSystem assemble_system(const Mesh& mesh, double mu);

// Quadrature-point context handed to integrands: position, physical weight,
// and shape data to evaluate FE fields given coefficient vectors.
struct PointContext {
    Vec2 pos;
    int tri = 0;
    double weight = 0.0;  // quadrature weight * |det J|
    const ElementGeometry* geom = nullptr;
    std::array<double, 6> n2;
    std::array<Vec2, 6> g2;
    std::array<double, 3> n1;

    Vec2 p2_vec(std::span<const double> coeffs) const {
        Vec2 v;
        for (int i = 0; i < 6; ++i) {
            const int node = geom->p2_nodes[i];
            v.x += n2[i] * coeffs[2 * node];
            v.y += n2[i] * coeffs[2 * node + 1];
        }
        return v;
    }
    Mat2 p2_vec_grad(std::span<const double> coeffs) const {
        Mat2 m;
        for (int i = 0; i < 6; ++i) {
            const int node = geom->p2_nodes[i];
            const double cx = coeffs[2 * node], cy = coeffs[2 * node + 1];
            m.a00 += cx * g2[i].x;
            m.a01 += cx * g2[i].y;
            m.a10 += cy * g2[i].x;
            m.a11 += cy * g2[i].y;
        }
        return m;
    }
    double p2_div(std::span<const double> coeffs) const {
        double d = 0.0;
        for (int i = 0; i < 6; ++i) {
            const int node = geom->p2_nodes[i];
            d += coeffs[2 * node] * g2[i].x + coeffs[2 * node + 1] * g2[i].y;
        }
        return d;
    }
    double p1_value(std::span<const double> coeffs) const {
        double v = 0.0;
        for (int i = 0; i < 3; ++i) v += n1[i] * coeffs[geom->p1_nodes[i]];
        return v;
    }
    Vec2 p1_grad(std::span<const double> coeffs) const {
        Vec2 g;
        for (int i = 0; i < 3; ++i) {
            const double c = coeffs[geom->p1_nodes[i]];
            g.x += c * geom->grad_bary[i].x;
            g.y += c * geom->grad_bary[i].y;
        }
        return g;
    }
};

namespace detail {

// Reference-point shape tables for one rule.
struct ShapeTable {
    std::vector<std::array<double, 6>> n2;
    std::vector<std::array<std::array<double, 2>, 6>> dn2;
    std::vector<std::array<double, 3>> n1;
    explicit ShapeTable(const QuadratureRule& rule) {
        const int q = rule.num_points();
        n2.resize(q);
        dn2.resize(q);
        n1.resize(q);
        for (int k = 0; k < q; ++k) {
            p2_shape(rule.xi[k], rule.eta[k], n2[k]);
            p2_shape_deriv(rule.xi[k], rule.eta[k], dn2[k]);
            p1_shape(rule.xi[k], rule.eta[k], n1[k]);
        }
    }
};

inline void fill_point(PointContext& pt, const ElementGeometry& geom, const QuadratureRule& rule,
                       const ShapeTable& table, int k) {
    const double xi = rule.xi[k], eta = rule.eta[k];
    pt.pos = geom.v0 + xi * geom.e1 + eta * geom.e2;
    pt.weight = rule.weight[k] * geom.det;
    pt.geom = &geom;
    pt.n2 = table.n2[k];
    pt.n1 = table.n1[k];
    for (int i = 0; i < 6; ++i) {
        const double dxi = table.dn2[k][i][0], deta = table.dn2[k][i][1];
        pt.g2[i].x = (geom.e2.y * dxi - geom.e1.y * deta) / geom.det;
        pt.g2[i].y = (-geom.e2.x * dxi + geom.e1.x * deta) / geom.det;
    }
}

}  // namespace detail

// Quadrature approximation of int_D f over the mesh; f(const PointContext&) -> double.
template <class F>
double integrate_field(const FemSystem& system, const QuadratureRule& rule, F&& f) {
    const detail::ShapeTable table(rule);
    double total = 0.0;
    PointContext pt;
    for (size_t t = 0; t < system.geometry.size(); ++t) {
        pt.tri = static_cast<int>(t);
        for (int k = 0; k < rule.num_points(); ++k) {
            detail::fill_point(pt, system.geometry[t], rule, table, k);
            total += pt.weight * f(static_cast<const PointContext&>(pt));
        }
    }
    return total;
}

// Load vector L_i = int_D g . phi_i over all velocity dofs (no BC applied);
// g(const PointContext&) -> Vec2.
template <class G>
std::vector<double> assemble_velocity_load(const FemSystem& system, const QuadratureRule& rule, G&& g) {
    const detail::ShapeTable table(rule);
    std::vector<double> load(system.velocity.dofs, 0.0);
    PointContext pt;
    for (size_t t = 0; t < system.geometry.size(); ++t) {
        pt.tri = static_cast<int>(t);
        const auto& geom = system.geometry[t];
        for (int k = 0; k < rule.num_points(); ++k) {
            detail::fill_point(pt, geom, rule, table, k);
            const Vec2 value = g(static_cast<const PointContext&>(pt));
            for (int i = 0; i < 6; ++i) {
                const int node = geom.p2_nodes[i];
                load[2 * node] += pt.weight * pt.n2[i] * value.x;
                load[2 * node + 1] += pt.weight * pt.n2[i] * value.y;
            }
        }
    }
    return load;
}

// Nodal/edge-midpoint interpolation; f(Vec2) -> Vec2.
template <class F>
std::vector<double> interpolate_velocity(const FemSystem& system, F&& f) {
    std::vector<double> coeffs(system.velocity.dofs);
    for (int node = 0; node < system.velocity.scalar_nodes; ++node) {
        const Vec2 v = f(system.velocity.node_pos[node]);
        coeffs[2 * node] = v.x;
        coeffs[2 * node + 1] = v.y;
    }
    return coeffs;
}

// Vertex interpolation; f(Vec2) -> double.
template <class F>
std::vector<double> interpolate_pressure(const FemSystem& system, F&& f) {
    std::vector<double> coeffs(system.pressure.dofs);
    for (int v = 0; v < system.pressure.dofs; ++v) coeffs[v] = f(system.mesh.vertices[v]);
    return coeffs;
}

}  // namespace ctstokes
