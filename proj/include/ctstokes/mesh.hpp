#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ctstokes {

struct Vec2 {
    double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

// Row-major 2x2 matrix, used for velocity gradients.
struct Mat2 {
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;
};

inline Mat2 operator-(const Mat2& a, const Mat2& b) {
    return {a.a00 - b.a00, a.a01 - b.a01, a.a10 - b.a10, a.a11 - b.a11};
}
inline double frobenius_sq(const Mat2& m) {
    return m.a00 * m.a00 + m.a01 * m.a01 + m.a10 * m.a10 + m.a11 * m.a11;
}

struct Rect {
    double xmin = -1.0, xmax = 1.0, ymin = -1.0, ymax = 1.0;
    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double area() const { return width() * height(); }
};

// Triangulation of a rectangle with the connectivity needed for P1 (vertex)
// and P2 (vertex + edge midpoint) degrees of freedom.  Edges are deduplicated
// and stored with the lower vertex index first so dof numbering is
// deterministic across runs.
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;       // counterclockwise
    std::vector<std::array<int, 2>> edges;           // canonical order v0 < v1
    std::vector<std::array<int, 3>> triangle_edges;  // local edges (0,1),(1,2),(2,0)
    std::vector<std::uint8_t> boundary_vertex;
    std::vector<std::uint8_t> boundary_edge;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
};

struct MeshStatistics {
    double min_area = 0.0;
    double max_area = 0.0;
    double total_area = 0.0;
};

// Uniform grid of nx-by-ny cells, each cell split into two triangles along
// the same diagonal.  Throws std::invalid_argument on nx/ny = 0 or a
// degenerate rectangle.
Mesh build_structured_mesh(const Rect& rect, int nx, int ny);

double triangle_area(const Mesh& mesh, int tri);
MeshStatistics mesh_statistics(const Mesh& mesh);

// Plain-text dump (vertex count / coordinates / triangle list), debug only.
void write_mesh_text(const Mesh& mesh, std::ostream& out);

}  // namespace ctstokes
