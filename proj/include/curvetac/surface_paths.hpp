#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "curvetac/mesh.hpp"

namespace curvetac {

/// Ordered polyline on the mesh surface, source first.
struct SurfacePolyline {
  std::vector<Vec3> points;
  double total_length = 0.0;
  /// Set by plane_slice_path when the source normal was parallel to the chord
  /// and the slicing plane had to be built from the target normal instead.
  bool fallback_plane = false;
};

/// Per-vertex geodesic distance from one source (metres).
struct DistanceField {
  std::vector<double> values;
  Vec3 source_position = Vec3::Zero();
};

double polyline_length(const std::vector<Vec3>& points);

// ---------------------------------------------------------------------------
// Plane slicing

/// Intersect the mesh with the plane through source and target that contains
/// the source normal, and return the piece of the intersection curve joining
/// them (the shorter piece when the curve is closed). Throws ValidationError
/// for source == target and NumericalError when no intersection component
/// contains both points.
SurfacePolyline plane_slice_path(const TriangleMesh& mesh, const SurfacePoint& source,
                                 const SurfacePoint& target);

/// Non-throwing variant used by the baker; nullopt when unreachable.
std::optional<SurfacePolyline> try_plane_slice_path(const TriangleMesh& mesh, const SurfacePoint& source,
                                                    const SurfacePoint& target);

// ---------------------------------------------------------------------------
// Graph geodesics

/// Dijkstra shortest-path tree over mesh edges rooted at one vertex.
/// Priority ties resolve by vertex index, so trees are deterministic.
class GeodesicTree {
 public:
  GeodesicTree(const TriangleMesh& mesh, int root);

  int root() const { return root_; }
  double distance(int v) const { return dist_[v]; }
  bool reachable(int v) const;
  /// Vertex path root -> v (inclusive).
  std::vector<int> path_to(int v) const;

 private:
  int root_;
  std::vector<double> dist_;
  std::vector<int> parent_;
};

/// Closest vertex of the point's face.
int nearest_face_vertex(const TriangleMesh& mesh, const SurfacePoint& p);

/// Shortest vertex-graph path between the vertices nearest to source and
/// target, with the exact endpoints attached. With `straighten`, the path is
/// iteratively shortened across the faces it passes through until the
/// relative length change drops below 1e-6 or 100 rounds have run.
SurfacePolyline dijkstra_geodesic(const TriangleMesh& mesh, const SurfacePoint& source,
                                  const SurfacePoint& target, bool straighten);

/// Same as dijkstra_geodesic but reuses a tree rooted at the source's nearest vertex.
std::optional<SurfacePolyline> geodesic_from_tree(const TriangleMesh& mesh, const GeodesicTree& tree,
                                                  const SurfacePoint& source, const SurfacePoint& target,
                                                  bool straighten);

/// Shorten a vertex path running from `source` through `vertex_path` to
/// `target` by unfolding the faces it crosses.
SurfacePolyline straighten_vertex_path(const TriangleMesh& mesh, const SurfacePoint& source,
                                       const std::vector<int>& vertex_path, const SurfacePoint& target);

/// Straightened geodesics from one source to many targets.
///
/// Builds one Dijkstra tree and, per target face, one optimised face corridor
/// (computed for the face centroid on first use). Each query refines the
/// cached corridor for its exact endpoint. Queries are const and thread-safe;
/// results do not depend on query order.
class GeodesicFan {
 public:
  GeodesicFan(const TriangleMesh& mesh, const SurfacePoint& source);
  ~GeodesicFan();
  GeodesicFan(const GeodesicFan&) = delete;
  GeodesicFan& operator=(const GeodesicFan&) = delete;

  std::optional<SurfacePolyline> path_to(const SurfacePoint& target) const;

 private:
  struct Cache;
  const TriangleMesh& mesh_;
  SurfacePoint source_;
  GeodesicTree tree_;
  std::unique_ptr<Cache> cache_;
};

// ---------------------------------------------------------------------------
// Endpoint directions

/// Unit direction of the path's final segment, projected into the plane
/// orthogonal to `target_normal`. Segments shorter than 1e-9 m are skipped.
/// Returns nullopt when no usable segment exists or the projection vanishes.
std::optional<Vec3> endpoint_direction(const SurfacePolyline& path, const Vec3& target_normal);

// ---------------------------------------------------------------------------
// Heat method

/// Prefactored operators for heat-method geodesic distance on one mesh.
///
/// Two sparse Cholesky factorisations are computed once: the backward-Euler
/// heat operator (A - t L) and the cotangent Laplacian with one vertex pinned.
/// After construction `distance_from` is const and may run concurrently.
class HeatGeodesicSolver {
 public:
  explicit HeatGeodesicSolver(const TriangleMesh& mesh, double t_scale = 1.0);
  ~HeatGeodesicSolver();
  HeatGeodesicSolver(const HeatGeodesicSolver&) = delete;
  HeatGeodesicSolver& operator=(const HeatGeodesicSolver&) = delete;

  double time_step() const { return time_step_; }
  DistanceField distance_from(const SurfacePoint& source) const;

 private:
  struct Factors;
  const TriangleMesh& mesh_;
  double time_step_;
  std::unique_ptr<Factors> factors_;
};

/// One-shot heat-method distance; time step t = t_scale * h^2 with h the mean
/// edge length. Throws ValidationError for t_scale <= 0 and NumericalError
/// when a linear solve fails.
DistanceField heat_distance_field(const TriangleMesh& mesh, const SurfacePoint& source, double t_scale = 1.0);

/// Value of the piecewise-linear field at a surface point.
double interpolate_distance(const TriangleMesh& mesh, const DistanceField& field, const SurfacePoint& p);

/// Unit tangent, pointing away from the source, of the minimal geodesic
/// arriving at the target. Face gradients of the piecewise-linear distance
/// are area-averaged at each vertex, blended with the target's barycentric
/// weights and projected into the target face, so the direction varies
/// continuously across faces. nullopt when the gradient vanishes.
std::optional<Vec3> distance_gradient_direction(const TriangleMesh& mesh, const DistanceField& field,
                                                const SurfacePoint& target);

}  // namespace curvetac
