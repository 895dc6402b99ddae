#include "mesh_bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace curvetac {

namespace {

constexpr int kLeafSize = 4;

double box_distance_sq(const Eigen::AlignedBox3d& box, const Vec3& q) {
  return box.squaredExteriorDistance(q);
}

// Slab test; returns entry parameter or nullopt.
std::optional<double> ray_box(const Eigen::AlignedBox3d& box, const Vec3& o, const Vec3& inv_dir,
                              double t_min, double t_max) {
  for (int a = 0; a < 3; ++a) {
    double t0 = (box.min()[a] - o[a]) * inv_dir[a];
    double t1 = (box.max()[a] - o[a]) * inv_dir[a];
    if (t0 > t1) std::swap(t0, t1);
    // NaN from 0 * inf keeps the previous interval
    if (t0 > t_min) t_min = t0;
    if (t1 < t_max) t_max = t1;
    if (t_max < t_min) return std::nullopt;
  }
  return t_min;
}

// Moller-Trumbore with a small barycentric slack so rays through shared
// edges and vertices never fall between triangles.
std::optional<double> ray_triangle(const Vec3& o, const Vec3& d, const Vec3& a, const Vec3& b,
                                   const Vec3& c) {
  constexpr double kSlack = 1e-12;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 p = d.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-300) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = o - a;
  const double u = s.dot(p) * inv;
  if (u < -kSlack || u > 1.0 + kSlack) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = d.dot(q) * inv;
  if (v < -kSlack || u + v > 1.0 + kSlack) return std::nullopt;
  return e2.dot(q) * inv;
}

}  // namespace

Vec3 closest_point_barycentric(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {1.0, 0.0, 0.0};

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return {0.0, 1.0, 0.0};

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return {1.0 - v, v, 0.0};
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return {0.0, 0.0, 1.0};

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return {1.0 - w, 0.0, w};
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {0.0, 1.0 - w, w};
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return {1.0 - v - w, v, w};
}

MeshBvh::MeshBvh(const std::vector<Vec3>& vertices, const std::vector<Face>& faces) {
  const int n = static_cast<int>(faces.size());
  face_boxes_.resize(n);
  std::vector<Vec3> centroids(n);
  for (int f = 0; f < n; ++f) {
    Eigen::AlignedBox3d box;
    for (int k = 0; k < 3; ++k) box.extend(vertices[faces[f][k]]);
    face_boxes_[f] = box;
    centroids[f] = (vertices[faces[f][0]] + vertices[faces[f][1]] + vertices[faces[f][2]]) / 3.0;
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * n / kLeafSize + 2);
  if (n > 0) build(centroids, 0, n);
}

int MeshBvh::build(std::vector<Vec3>& centroids, int begin, int end) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box;
  Eigen::AlignedBox3d centroid_box;
  for (int i = begin; i < end; ++i) {
    box.extend(face_boxes_[order_[i]]);
    centroid_box.extend(centroids[order_[i]]);
  }
  nodes_[index].box = box;
  if (end - begin <= kLeafSize) {
    nodes_[index].begin = begin;
    nodes_[index].end = end;
    return index;
  }
  int axis = 0;
  centroid_box.sizes().maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  // Ties on the split coordinate resolve by face index so the tree layout is
  // independent of the standard library's nth_element internals.
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double ca = centroids[a][axis];
                     const double cb = centroids[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const int left = build(centroids, begin, mid);
  const int right = build(centroids, mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

ClosestPointResult MeshBvh::closest_point(const std::vector<Vec3>& vertices,
                                          const std::vector<Face>& faces, const Vec3& q) const {
  ClosestPointResult best;
  double best_d2 = std::numeric_limits<double>::infinity();
  int best_face = -1;
  Vec3 best_bary = Vec3::Zero();
  Vec3 best_pos = Vec3::Zero();

  int stack[128];
  int top = 0;
  if (!nodes_.empty()) stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_distance_sq(node.box, q) > best_d2) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int f = order_[i];
        if (box_distance_sq(face_boxes_[f], q) > best_d2) continue;
        const Vec3& a = vertices[faces[f][0]];
        const Vec3& b = vertices[faces[f][1]];
        const Vec3& c = vertices[faces[f][2]];
        const Vec3 bary = closest_point_barycentric(q, a, b, c);
        const Vec3 pos = bary[0] * a + bary[1] * b + bary[2] * c;
        const double d2 = (pos - q).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && f < best_face)) {
          best_d2 = d2;
          best_face = f;
          best_bary = bary;
          best_pos = pos;
        }
      }
      continue;
    }
    const double dl = box_distance_sq(nodes_[node.left].box, q);
    const double dr = box_distance_sq(nodes_[node.right].box, q);
    // Push the farther child first so the nearer one is visited next.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  best.point.face = best_face;
  best.point.bary = best_bary;
  best.point.position = best_pos;
  best.distance = std::sqrt(best_d2);
  return best;
}

std::optional<RayHit> MeshBvh::raycast(const std::vector<Vec3>& vertices, const std::vector<Face>& faces,
                                       const Vec3& origin, const Vec3& dir, double t_min) const {
  const Vec3 inv_dir = dir.cwiseInverse();
  double best_t = std::numeric_limits<double>::infinity();
  int best_face = -1;

  int stack[128];
  int top = 0;
  if (!nodes_.empty()) stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!ray_box(node.box, origin, inv_dir, t_min, best_t)) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int f = order_[i];
        const auto t = ray_triangle(origin, dir, vertices[faces[f][0]], vertices[faces[f][1]],
                                    vertices[faces[f][2]]);
        if (t && *t > t_min && (*t < best_t || (*t == best_t && f < best_face))) {
          best_t = *t;
          best_face = f;
        }
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  if (best_face < 0) return std::nullopt;
  return RayHit{best_t, best_face};
}

}  // namespace curvetac
