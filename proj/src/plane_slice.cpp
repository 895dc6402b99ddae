#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "curvetac/errors.hpp"
#include "curvetac/surface_paths.hpp"

namespace curvetac {

namespace {

Vec3 interpolated_normal(const TriangleMesh& mesh, const SurfacePoint& p) {
  const Face& f = mesh.face(p.face);
  Vec3 n = Vec3::Zero();
  for (int k = 0; k < 3; ++k) n += p.bary[k] * mesh.vertex_normals()[f[k]];
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : mesh.face_normal(p.face);
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (a + t * ab - p).norm();
}

// The mesh cut by one plane. Vertices with signed distance exactly zero are
// classified as positive, so every face is either uncut or crossed on exactly
// two sides and the cut forms disjoint chains through the face graph.
class PlaneCut {
 public:
  PlaneCut(const TriangleMesh& mesh, const Vec3& origin, const Vec3& normal)
      : mesh_(mesh), origin_(origin), normal_(normal) {}

  double signed_distance(int v) const { return normal_.dot(mesh_.vertex(v) - origin_); }
  bool positive(int v) const { return signed_distance(v) >= 0.0; }

  bool side_crossed(int f, int k) const {
    const Face& fc = mesh_.face(f);
    return positive(fc[k]) != positive(fc[(k + 1) % 3]);
  }

  // The two crossed sides of f, or {-1, -1} when the face is not cut.
  std::array<int, 2> crossed_sides(int f) const {
    std::array<int, 2> sides{-1, -1};
    int n = 0;
    for (int k = 0; k < 3; ++k) {
      if (side_crossed(f, k)) sides[n++] = k;
    }
    return n == 2 ? sides : std::array<int, 2>{-1, -1};
  }

  Vec3 crossing_point(int f, int k) const {
    const Face& fc = mesh_.face(f);
    const int a = fc[k];
    const int b = fc[(k + 1) % 3];
    const double da = signed_distance(a);
    const double db = signed_distance(b);
    const double t = da / (da - db);
    return mesh_.vertex(a) + t * (mesh_.vertex(b) - mesh_.vertex(a));
  }

  // Distance from p to the piece of the cut inside face f (infinity if uncut).
  double segment_distance(int f, const Vec3& p) const {
    const auto sides = crossed_sides(f);
    if (sides[0] < 0) return std::numeric_limits<double>::infinity();
    return point_segment_distance(p, crossing_point(f, sides[0]), crossing_point(f, sides[1]));
  }

 private:
  const TriangleMesh& mesh_;
  Vec3 origin_;
  Vec3 normal_;
};

// Cut faces near a surface point whose cut piece passes within `tol` of it;
// the closest wins, ties to the lowest face index. -1 if none.
int locate_on_cut(const TriangleMesh& mesh, const PlaneCut& cut, const SurfacePoint& p, double tol) {
  if (cut.segment_distance(p.face, p.position) <= tol) return p.face;
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int v : mesh.face(p.face)) {
    for (int f : mesh.vertex_faces(v)) {
      const double d = cut.segment_distance(f, p.position);
      if (d <= tol && (d < best_d || (d == best_d && f < best))) {
        best = f;
        best_d = d;
      }
    }
  }
  return best;
}

bool near_target_face(const TriangleMesh& mesh, int f, const SurfacePoint& target) {
  if (f == target.face) return true;
  for (int v : mesh.face(f)) {
    for (int w : mesh.face(target.face)) {
      if (v == w) return true;
    }
  }
  return false;
}

void push_distinct(std::vector<Vec3>& pts, const Vec3& p, double eps) {
  if (pts.empty() || (pts.back() - p).norm() > eps) pts.push_back(p);
}

}  // namespace

double polyline_length(const std::vector<Vec3>& points) {
  double len = 0.0;
  for (size_t i = 1; i < points.size(); ++i) len += (points[i] - points[i - 1]).norm();
  return len;
}

std::optional<SurfacePolyline> try_plane_slice_path(const TriangleMesh& mesh, const SurfacePoint& source,
                                                    const SurfacePoint& target) {
  const double scale = std::max(1.0, mesh.bounding_diagonal());
  const double tol = 1e-8 * scale;
  const double dedupe = 1e-13 * scale;

  const Vec3 chord = target.position - source.position;
  if (chord.norm() <= 1e-12 * scale) return std::nullopt;

  SurfacePolyline result;
  Vec3 plane_normal = chord.cross(interpolated_normal(mesh, source));
  if (plane_normal.norm() <= 1e-9 * chord.norm()) {
    result.fallback_plane = true;
    plane_normal = chord.cross(interpolated_normal(mesh, target));
    if (plane_normal.norm() <= 1e-9 * chord.norm()) {
      Vec3 axis = Vec3::Zero();
      int min_axis = 0;
      chord.cwiseAbs().minCoeff(&min_axis);
      axis[min_axis] = 1.0;
      plane_normal = chord.cross(axis);
    }
  }
  plane_normal.normalize();

  const PlaneCut cut(mesh, source.position, plane_normal);
  const int start = locate_on_cut(mesh, cut, source, tol);
  if (start < 0) return std::nullopt;

  if (cut.segment_distance(start, target.position) <= tol && near_target_face(mesh, start, target)) {
    result.points = {source.position, target.position};
    result.total_length = chord.norm();
    return result;
  }

  const auto start_sides = cut.crossed_sides(start);
  std::optional<std::vector<Vec3>> best;
  double best_len = std::numeric_limits<double>::infinity();

  for (int side : start_sides) {
    std::vector<Vec3> pts{source.position};
    int face = start;
    int exit_side = side;
    bool reached = false;
    for (int steps = 0; steps <= mesh.num_faces(); ++steps) {
      push_distinct(pts, cut.crossing_point(face, exit_side), dedupe);
      const int edge = mesh.face_edge(face, exit_side);
      const int next = mesh.face_across(face, exit_side);
      if (next < 0 || next == start) break;  // boundary, or a closed loop that missed the target
      int entry = -1;
      for (int k = 0; k < 3; ++k) {
        if (mesh.face_edge(next, k) == edge) entry = k;
      }
      const auto sides = cut.crossed_sides(next);
      if (entry < 0 || sides[0] < 0) break;
      face = next;
      exit_side = sides[0] == entry ? sides[1] : sides[0];
      if (near_target_face(mesh, face, target) && cut.segment_distance(face, target.position) <= tol) {
        push_distinct(pts, target.position, dedupe);
        reached = true;
        break;
      }
    }
    if (!reached || pts.size() < 2) continue;
    const double len = polyline_length(pts);
    if (len < best_len) {
      best_len = len;
      best = std::move(pts);
    }
  }
  if (!best) return std::nullopt;
  result.points = std::move(*best);
  result.total_length = best_len;
  return result;
}

SurfacePolyline plane_slice_path(const TriangleMesh& mesh, const SurfacePoint& source,
                                 const SurfacePoint& target) {
  const double scale = std::max(1.0, mesh.bounding_diagonal());
  if ((target.position - source.position).norm() <= 1e-12 * scale) {
    throw ValidationError("plane slice: source and target coincide");
  }
  auto path = try_plane_slice_path(mesh, source, target);
  if (!path) throw NumericalError("plane slice: no intersection component joins source and target");
  return std::move(*path);
}

std::optional<Vec3> endpoint_direction(const SurfacePolyline& path, const Vec3& target_normal) {
  constexpr double kMinSegment = 1e-9;
  const auto& pts = path.points;
  for (size_t i = pts.size(); i-- > 1;) {
    const Vec3 seg = pts[i] - pts[i - 1];
    if (seg.norm() < kMinSegment) continue;
    const Vec3 n = target_normal.normalized();
    const Vec3 tangent = seg - seg.dot(n) * n;
    const double len = tangent.norm();
    if (len <= 1e-12 * seg.norm()) return std::nullopt;
    return Vec3(tangent / len);
  }
  return std::nullopt;
}

}  // namespace curvetac
