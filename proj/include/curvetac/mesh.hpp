#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SparseCore>

namespace curvetac {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Rotation followed by translation: x' = R x + t.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  /// Orthonormal with determinant +1 within `tol`.
  bool is_proper(double tol = 1e-9) const;
};

/// A continuous location on the mesh: a face plus barycentric coordinates.
struct SurfacePoint {
  int face = -1;
  Vec3 bary = Vec3::Zero();
  Vec3 position = Vec3::Zero();
};

struct MeshEdge {
  std::array<int, 2> vertices;  // sorted ascending
  std::array<int, 2> faces;     // faces[1] == -1 on the boundary
};

struct ClosestPointResult {
  SurfacePoint point;
  double distance = 0.0;
};

struct RayHit {
  double t = 0.0;
  int face = -1;
};

class MeshBvh;

/// Validated, immutable triangle mesh of a sensor membrane.
///
/// Construction checks index ranges, face degeneracy, edge manifoldness,
/// consistent orientation, vertex manifoldness and single-component
/// connectivity; any violation throws ValidationError. Adjacency, normals and
/// a bounding volume hierarchy are built eagerly so every query is const.
class TriangleMesh {
 public:
  static constexpr double kMinFaceArea = 1e-12;

  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);
  ~TriangleMesh();
  TriangleMesh(const TriangleMesh& other);
  TriangleMesh& operator=(const TriangleMesh& other);
  TriangleMesh(TriangleMesh&&) noexcept;
  TriangleMesh& operator=(TriangleMesh&&) noexcept;

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const Vec3& vertex(int v) const { return vertices_[v]; }
  const Face& face(int f) const { return faces_[f]; }

  const std::vector<Vec3>& vertex_normals() const { return vertex_normals_; }
  const Vec3& face_normal(int f) const { return face_normals_[f]; }
  double face_area(int f) const { return face_areas_[f]; }

  const std::vector<MeshEdge>& edges() const { return edges_; }
  /// Edge index of the side (f[k], f[k+1]).
  int face_edge(int f, int k) const { return face_edges_[f][k]; }
  /// Face across side k of f, or -1 on the boundary.
  int face_across(int f, int k) const;
  std::span<const int> vertex_faces(int v) const;
  std::span<const int> vertex_neighbors(int v) const;
  bool is_boundary_vertex(int v) const { return boundary_vertex_[v] != 0; }

  /// Interior angle of face f at its k-th corner.
  double corner_angle(int f, int k) const;
  double mean_edge_length() const { return mean_edge_length_; }
  double bounding_diagonal() const { return bounding_diagonal_; }
  int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

  SurfacePoint surface_point(int face, const Vec3& bary) const;
  SurfacePoint vertex_point(int v) const;

  /// Closest point on the surface; ties resolve to the lowest face index.
  ClosestPointResult closest_point(const Vec3& q) const;
  /// First intersection along origin + t * dir with t > t_min.
  std::optional<RayHit> raycast(const Vec3& origin, const Vec3& dir, double t_min = 0.0) const;

  /// FNV-1a 64 over vertex coordinates and face indices, as 16 hex digits.
  std::string content_hash() const;

  TriangleMesh transformed(const RigidTransform& xf) const;

 private:
  void validate_and_index();

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> face_normals_;
  std::vector<double> face_areas_;
  std::vector<Vec3> vertex_normals_;
  std::vector<MeshEdge> edges_;
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<int> vertex_face_offsets_;
  std::vector<int> vertex_face_list_;
  std::vector<int> vertex_neighbor_offsets_;
  std::vector<int> vertex_neighbor_list_;
  std::vector<std::uint8_t> boundary_vertex_;
  double mean_edge_length_ = 0.0;
  double bounding_diagonal_ = 0.0;
  std::unique_ptr<MeshBvh> bvh_;
};

/// Closest point on the mesh to q (total function).
SurfacePoint closest_surface_point(const TriangleMesh& mesh, const Vec3& q);

/// Sparse cotangent Laplacian and lumped (barycentric) vertex areas.
///
/// Off-diagonal entries hold w_ij = (cot a_ij + cot b_ij) / 2 and the diagonal
/// is the negated row sum, so the operator is negative semi-definite.
struct CotanLaplacian {
  Eigen::SparseMatrix<double> laplacian;
  Eigen::VectorXd vertex_areas;
};

CotanLaplacian cotangent_laplacian(const TriangleMesh& mesh);

}  // namespace curvetac
