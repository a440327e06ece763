#include "ctstokes/fem.hpp"

#include <stdexcept>

namespace ctstokes {

void p2_shape(double xi, double eta, std::array<double, 6>& n) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    n[0] = l0 * (2.0 * l0 - 1.0);
    n[1] = l1 * (2.0 * l1 - 1.0);
    n[2] = l2 * (2.0 * l2 - 1.0);
    n[3] = 4.0 * l0 * l1;
    n[4] = 4.0 * l1 * l2;
    n[5] = 4.0 * l2 * l0;
}

void p2_shape_deriv(double xi, double eta, std::array<std::array<double, 2>, 6>& dn) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    // dl0 = (-1,-1), dl1 = (1,0), dl2 = (0,1)
    dn[0] = {-(4.0 * l0 - 1.0), -(4.0 * l0 - 1.0)};
    dn[1] = {4.0 * l1 - 1.0, 0.0};
    dn[2] = {0.0, 4.0 * l2 - 1.0};
    dn[3] = {4.0 * (l0 - l1), -4.0 * l1};
    dn[4] = {4.0 * l2, 4.0 * l1};
    dn[5] = {-4.0 * l2, 4.0 * (l0 - l2)};
}

void p1_shape(double xi, double eta, std::array<double, 3>& n) {
    n[0] = 1.0 - xi - eta;
    n[1] = xi;
    n[2] = eta;
}

SparseMatrix FemSystem::momentum_matrix(double dt) const {
    if (!(dt > 0.0)) throw std::invalid_argument("momentum_matrix: dt must be positive");
    const SparseMatrix A = add_scaled(1.0 / dt, M, mu, K);
    return eliminate_dirichlet(A, velocity.dirichlet);
}

SparseMatrix FemSystem::riesz_matrix() const {
    const SparseMatrix A = add_scaled(1.0, K, 1.0, M);
    return eliminate_dirichlet(A, velocity.dirichlet);
}

void FemSystem::zero_dirichlet(std::span<double> velocity_vector) const {
    for (int i = 0; i < velocity.dofs; ++i)
        if (velocity.dirichlet[i]) velocity_vector[i] = 0.0;
}

FemSystem assemble_system(const Mesh& mesh, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("assemble_system: mu must be positive");
    FemSystem system;
    system.mesh = mesh;
    system.mu = mu;

    const int nv = mesh.num_vertices();
    const int ne = mesh.num_edges();
    const int scalar_nodes = nv + ne;

    auto& vel = system.velocity;
    vel.scalar_nodes = scalar_nodes;
    vel.dofs = 2 * scalar_nodes;
    vel.node_pos.resize(scalar_nodes);
    vel.dirichlet.assign(vel.dofs, 0);
    for (int v = 0; v < nv; ++v) {
        vel.node_pos[v] = mesh.vertices[v];
        if (mesh.boundary_vertex[v]) vel.dirichlet[2 * v] = vel.dirichlet[2 * v + 1] = 1;
    }
    for (int e = 0; e < ne; ++e) {
        const auto& edge = mesh.edges[e];
        vel.node_pos[nv + e] = 0.5 * (mesh.vertices[edge[0]] + mesh.vertices[edge[1]]);
        if (mesh.boundary_edge[e]) vel.dirichlet[2 * (nv + e)] = vel.dirichlet[2 * (nv + e) + 1] = 1;
    }

    system.pressure.dofs = nv;
    system.pressure.lumped_mass.assign(nv, 0.0);

    // Geometry cache.
    system.geometry.resize(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[t];
        ElementGeometry& g = system.geometry[t];
        g.p1_nodes = tri;
        g.p2_nodes = {tri[0], tri[1], tri[2], nv + mesh.triangle_edges[t][0], nv + mesh.triangle_edges[t][1],
                      nv + mesh.triangle_edges[t][2]};
        g.v0 = mesh.vertices[tri[0]];
        g.e1 = mesh.vertices[tri[1]] - g.v0;
        g.e2 = mesh.vertices[tri[2]] - g.v0;
        g.det = g.e1.x * g.e2.y - g.e2.x * g.e1.y;
        if (!(g.det > 0.0)) throw std::invalid_argument("assemble_system: triangle with nonpositive area");
        // physical gradients of barycentric coordinates
        g.grad_bary[0] = {(-g.e2.y + g.e1.y) / g.det, (g.e2.x - g.e1.x) / g.det};
        g.grad_bary[1] = {g.e2.y / g.det, -g.e2.x / g.det};
        g.grad_bary[2] = {-g.e1.y / g.det, g.e1.x / g.det};

        const double area = 0.5 * g.det;
        for (int i = 0; i < 3; ++i) system.pressure.lumped_mass[tri[i]] += area / 3.0;
    }

    // Degree-4 rule: exact for the P2 mass (degree 4), stiffness (2),
    // couplings (3) and the P1 Neumann stiffness (0).
    const QuadratureRule rule = make_quadrature(4);
    const detail::ShapeTable table(rule);
    const int nq = rule.num_points();

    TripletBuilder mass(2 * scalar_nodes, 2 * scalar_nodes);
    TripletBuilder stiff(2 * scalar_nodes, 2 * scalar_nodes);
    TripletBuilder pstiff(nv, nv);
    TripletBuilder div_op(nv, 2 * scalar_nodes);
    TripletBuilder grad_op(2 * scalar_nodes, nv);

    for (const auto& g : system.geometry) {
        double m_loc[6][6] = {}, k_loc[6][6] = {};
        double d_loc[3][6][2] = {};  // (q_i, dN_j/dx_c)
        double g_loc[6][3][2] = {};  // (N_i, dlambda_j/dx_c)
        for (int k = 0; k < nq; ++k) {
            const double w = rule.weight[k] * g.det;
            const auto& n2 = table.n2[k];
            const auto& n1 = table.n1[k];
            Vec2 gp[6];
            for (int i = 0; i < 6; ++i) {
                const double dxi = table.dn2[k][i][0], deta = table.dn2[k][i][1];
                gp[i] = {(g.e2.y * dxi - g.e1.y * deta) / g.det, (-g.e2.x * dxi + g.e1.x * deta) / g.det};
            }
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) {
                    m_loc[i][j] += w * n2[i] * n2[j];
                    k_loc[i][j] += w * dot(gp[i], gp[j]);
                }
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 6; ++j) {
                    d_loc[i][j][0] += w * n1[i] * gp[j].x;
                    d_loc[i][j][1] += w * n1[i] * gp[j].y;
                }
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 3; ++j) {
                    g_loc[i][j][0] += w * n2[i] * g.grad_bary[j].x;
                    g_loc[i][j][1] += w * n2[i] * g.grad_bary[j].y;
                }
        }
        const double area = 0.5 * g.det;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                for (int c = 0; c < 2; ++c) {
                    mass.add(2 * g.p2_nodes[i] + c, 2 * g.p2_nodes[j] + c, m_loc[i][j]);
                    stiff.add(2 * g.p2_nodes[i] + c, 2 * g.p2_nodes[j] + c, k_loc[i][j]);
                }
            }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                pstiff.add(g.p1_nodes[i], g.p1_nodes[j], area * dot(g.grad_bary[i], g.grad_bary[j]));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 6; ++j)
                for (int c = 0; c < 2; ++c) div_op.add(g.p1_nodes[i], 2 * g.p2_nodes[j] + c, d_loc[i][j][c]);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 3; ++j)
                for (int c = 0; c < 2; ++c) grad_op.add(2 * g.p2_nodes[i] + c, g.p1_nodes[j], g_loc[i][j][c]);
    }

    system.M = mass.compress();
    system.K = stiff.compress();
    system.Kp = pstiff.compress();
    system.D = div_op.compress();
    system.G = grad_op.compress();
    symmetrize(system.M);
    symmetrize(system.K);
    symmetrize(system.Kp);
    return system;
}

}  // namespace ctstokes
