#include "ctstokes/mesh.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>

namespace ctstokes {

Mesh build_structured_mesh(const Rect& rect, int nx, int ny) {
    if (nx < 1 || ny < 1) throw std::invalid_argument("build_structured_mesh: nx and ny must be >= 1");
    if (!(rect.xmin < rect.xmax) || !(rect.ymin < rect.ymax))
        throw std::invalid_argument("build_structured_mesh: degenerate rectangle");

    Mesh mesh;
    const int npx = nx + 1, npy = ny + 1;
    mesh.vertices.reserve(static_cast<size_t>(npx) * npy);
    for (int j = 0; j < npy; ++j)
        for (int i = 0; i < npx; ++i)
            mesh.vertices.push_back({rect.xmin + i * rect.width() / nx,
                                     rect.ymin + j * rect.height() / ny});

    auto vid = [npx](int i, int j) { return j * npx + i; };

    // Split every cell along the same diagonal (lower-left to upper-right).
    mesh.triangles.reserve(static_cast<size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int v00 = vid(i, j), v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }

    // Deduplicated edges in canonical order, plus per-triangle edge indices
    // for the local edges (0,1),(1,2),(2,0).
    std::map<std::pair<int, int>, int> edge_index;
    std::vector<int> edge_use_count;
    mesh.triangle_edges.resize(mesh.triangles.size());
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) {
            int a = tri[e], b = tri[(e + 1) % 3];
            if (a > b) std::swap(a, b);
            auto [it, inserted] = edge_index.try_emplace({a, b}, static_cast<int>(mesh.edges.size()));
            if (inserted) {
                mesh.edges.push_back({a, b});
                edge_use_count.push_back(0);
            }
            mesh.triangle_edges[t][e] = it->second;
            ++edge_use_count[it->second];
        }
    }

    mesh.boundary_edge.assign(mesh.edges.size(), 0);
    mesh.boundary_vertex.assign(mesh.vertices.size(), 0);
    for (size_t e = 0; e < mesh.edges.size(); ++e) {
        if (edge_use_count[e] == 1) {
            mesh.boundary_edge[e] = 1;
            mesh.boundary_vertex[mesh.edges[e][0]] = 1;
            mesh.boundary_vertex[mesh.edges[e][1]] = 1;
        }
    }
    return mesh;
}

double triangle_area(const Mesh& mesh, int tri) {
    const auto& t = mesh.triangles[tri];
    const Vec2 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

MeshStatistics mesh_statistics(const Mesh& mesh) {
    MeshStatistics stats;
    if (mesh.triangles.empty()) return stats;
    stats.min_area = stats.max_area = triangle_area(mesh, 0);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double a = triangle_area(mesh, t);
        stats.min_area = std::min(stats.min_area, a);
        stats.max_area = std::max(stats.max_area, a);
        stats.total_area += a;
    }
    return stats;
}

void write_mesh_text(const Mesh& mesh, std::ostream& out) {
    out << mesh.num_vertices() << "\n";
    for (const auto& v : mesh.vertices) out << v.x << " " << v.y << "\n";
    out << mesh.num_triangles() << "\n";
    for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
}

}  // namespace ctstokes
