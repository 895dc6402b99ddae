#pragma once

#include <optional>
#include <vector>

#include <Eigen/Geometry>

#include "curvetac/mesh.hpp"

namespace curvetac {

/// Axis-aligned bounding box tree over mesh faces.
class MeshBvh {
 public:
  MeshBvh(const std::vector<Vec3>& vertices, const std::vector<Face>& faces);

  ClosestPointResult closest_point(const std::vector<Vec3>& vertices, const std::vector<Face>& faces,
                                   const Vec3& q) const;
  std::optional<RayHit> raycast(const std::vector<Vec3>& vertices, const std::vector<Face>& faces,
                                const Vec3& origin, const Vec3& dir, double t_min) const;

 private:
  struct Node {
    Eigen::AlignedBox3d box;
    int left = -1;   // child index, or -1 for a leaf
    int right = -1;
    int begin = 0;   // leaf range into order_
    int end = 0;
  };

  int build(std::vector<Vec3>& centroids, int begin, int end);

  std::vector<Node> nodes_;
  std::vector<int> order_;
  std::vector<Eigen::AlignedBox3d> face_boxes_;
};

/// Closest point on triangle (a, b, c) to p; returns barycentric coordinates.
Vec3 closest_point_barycentric(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace curvetac
