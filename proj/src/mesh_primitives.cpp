#include "curvetac/mesh_primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace curvetac {

TriangleMesh make_icosphere(int subdivisions, double radius, const Vec3& centre) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                             {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : verts) v.normalize();
  std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  for (Vec3& v : verts) v = centre + radius * v;
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh make_grid(int cells, double half_extent, double height) {
  const int n = cells + 1;
  std::vector<Vec3> verts;
  verts.reserve(n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      verts.emplace_back(-half_extent + 2.0 * half_extent * i / cells,
                         -half_extent + 2.0 * half_extent * j / cells, height);
    }
  }
  std::vector<Face> faces;
  faces.reserve(2 * cells * cells);
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      const int a = j * n + i;
      const int b = a + 1;
      const int c = a + n + 1;
      const int d = a + n;
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh make_tri_grid(int cells, double half_extent, double height) {
  const int n = cells + 1;
  const double h = 2.0 * half_extent / cells;
  const double dy = h * std::sqrt(3.0) / 2.0;
  const int half_rows = static_cast<int>(std::lround(half_extent / dy));
  const int rows = 2 * half_rows + 1;
  std::vector<Vec3> verts;
  verts.reserve(static_cast<size_t>(rows) * n);
  for (int j = 0; j < rows; ++j) {
    const double shift = ((j + half_rows) % 2) ? 0.5 * h : 0.0;
    const double y0 = -half_rows * dy;
    for (int i = 0; i < n; ++i) verts.emplace_back(-half_extent + i * h + shift, y0 + j * dy, height);
  }
  std::vector<Face> faces;
  faces.reserve(2 * static_cast<size_t>(rows - 1) * cells);
  for (int j = 0; j + 1 < rows; ++j) {
    for (int i = 0; i < cells; ++i) {
      const int a = j * n + i;
      const int b = a + n;
      if ((j + half_rows) % 2 == 0) {
        faces.push_back({a, a + 1, b});
        faces.push_back({a + 1, b + 1, b});
      } else {
        faces.push_back({a, b + 1, b});
        faces.push_back({a, a + 1, b + 1});
      }
    }
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

namespace {

// Appends quads between consecutive rings of `segments` vertices each.
void stitch_rings(std::vector<Face>& faces, int first_ring, int ring_count, int segments) {
  for (int r = 0; r + 1 < ring_count; ++r) {
    const int base = (first_ring + r) * segments;
    for (int s = 0; s < segments; ++s) {
      const int a = base + s;
      const int b = base + (s + 1) % segments;
      const int c = b + segments;
      const int d = a + segments;
      faces.push_back({a, b, c});
      faces.push_back({a, c, d});
    }
  }
}

}  // namespace

TriangleMesh make_cylinder(double radius, double z0, double z1, int segments, int rings) {
  std::vector<Vec3> verts;
  for (int r = 0; r <= rings; ++r) {
    const double z = z0 + (z1 - z0) * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * std::numbers::pi * s / segments;
      verts.emplace_back(radius * std::cos(theta), radius * std::sin(theta), z);
    }
  }
  std::vector<Face> faces;
  stitch_rings(faces, 0, rings + 1, segments);
  return TriangleMesh(std::move(verts), std::move(faces));
}

TriangleMesh make_fingertip(double radius, double length, int segments, int tube_rings, int cap_rings) {
  std::vector<Vec3> verts;
  for (int r = 0; r <= tube_rings; ++r) {
    const double z = length * r / tube_rings;
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * std::numbers::pi * s / segments;
      verts.emplace_back(radius * std::cos(theta), radius * std::sin(theta), z);
    }
  }
  for (int i = 1; i < cap_rings; ++i) {
    const double phi = 0.5 * std::numbers::pi * i / cap_rings;
    const double rr = radius * std::cos(phi);
    const double z = length + radius * std::sin(phi);
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * std::numbers::pi * s / segments;
      verts.emplace_back(rr * std::cos(theta), rr * std::sin(theta), z);
    }
  }
  const int ring_count = tube_rings + cap_rings;  // equator shared, pole separate
  const int pole = static_cast<int>(verts.size());
  verts.emplace_back(0.0, 0.0, length + radius);

  std::vector<Face> faces;
  stitch_rings(faces, 0, ring_count, segments);
  const int last = (ring_count - 1) * segments;
  for (int s = 0; s < segments; ++s) {
    faces.push_back({last + s, last + (s + 1) % segments, pole});
  }
  return TriangleMesh(std::move(verts), std::move(faces));
}

}  // namespace curvetac
