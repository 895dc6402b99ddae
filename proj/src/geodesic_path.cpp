#include <algorithm>
#include <array>
#include <optional>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <queue>

#include <Eigen/Core>

#include "curvetac/errors.hpp"
#include "curvetac/surface_paths.hpp"

namespace curvetac {

namespace {

using Vec2 = Eigen::Vector2d;

constexpr int kMaxStraightenRounds = 100;
constexpr double kRelativeTolerance = 1e-6;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

int local_index(const Face& f, int v) {
  for (int k = 0; k < 3; ++k) {
    if (f[k] == v) return k;
  }
  return -1;
}

bool face_has(const Face& f, int v) { return local_index(f, v) >= 0; }

bool face_has_edge(const Face& f, int a, int b) { return face_has(f, a) && face_has(f, b); }

// Walk around `pivot` starting at `from`, crossing the side after the pivot
// (dir = +1) or before it (dir = -1), until `stop` holds. Returns the faces
// visited after `from`, or nullopt on hitting the boundary.
std::optional<std::vector<int>> rotate_about(const TriangleMesh& mesh, int from, int pivot, int dir,
                                             const std::function<bool(int)>& stop, double* angle) {
  std::vector<int> visited;
  int face = from;
  double swept = 0.0;
  const int limit = static_cast<int>(mesh.vertex_faces(pivot).size()) + 1;
  for (int step = 0; step <= limit; ++step) {
    if (stop(face)) {
      if (angle) *angle = swept;
      return visited;
    }
    const int k = local_index(mesh.face(face), pivot);
    swept += mesh.corner_angle(face, k);
    const int side = dir > 0 ? k : (k + 2) % 3;
    const int next = mesh.face_across(face, side);
    if (next < 0) return std::nullopt;
    visited.push_back(next);
    face = next;
  }
  return std::nullopt;
}

// Rotate the shorter way around pivot (by swept angle); ties go to dir = +1.
std::optional<std::vector<int>> rotate_shorter(const TriangleMesh& mesh, int from, int pivot,
                                               const std::function<bool(int)>& stop) {
  double a_plus = 0.0;
  double a_minus = 0.0;
  auto plus = rotate_about(mesh, from, pivot, +1, stop, &a_plus);
  auto minus = rotate_about(mesh, from, pivot, -1, stop, &a_minus);
  if (plus && (!minus || a_plus <= a_minus)) return plus;
  return minus;
}

struct Portal {
  Vec2 left;
  Vec2 right;
  int left_vertex = -1;
  int right_vertex = -1;
  Vec3 left3;
  Vec3 right3;
};

struct Apex {
  Vec2 point;
  int portal = 0;
  int vertex = -1;
};

struct Unfolded {
  std::vector<Portal> portals;  // [source, shared edges..., target]
};

// Lay the face strip out in the plane, one face after another across shared
// edges. Shared vertices copy their 2D coordinates exactly from the previous
// face, so a vertex keeps bit-identical coordinates along a fan.
std::optional<Unfolded> unfold_strip(const TriangleMesh& mesh, const std::vector<int>& strip,
                                     const SurfacePoint& source, const SurfacePoint& target) {
  const size_t m = strip.size();
  std::vector<std::array<Vec2, 3>> coords(m);
  {
    const Face& f = mesh.face(strip[0]);
    const Vec3& a = mesh.vertex(f[0]);
    const Vec3 ab = mesh.vertex(f[1]) - a;
    const Vec3 ac = mesh.vertex(f[2]) - a;
    const double lab = ab.norm();
    coords[0][0] = Vec2(0.0, 0.0);
    coords[0][1] = Vec2(lab, 0.0);
    coords[0][2] = Vec2(ab.dot(ac) / lab, ab.cross(ac).norm() / lab);
  }

  Unfolded out;
  auto bary2 = [&](size_t j, const Vec3& b) {
    return Vec2(b[0] * coords[j][0] + b[1] * coords[j][1] + b[2] * coords[j][2]);
  };
  {
    Portal p;
    p.left = p.right = bary2(0, source.bary);
    p.left3 = p.right3 = source.position;
    out.portals.push_back(p);
  }

  for (size_t j = 0; j + 1 < m; ++j) {
    const int fa = strip[j];
    const int fb = strip[j + 1];
    int side = -1;
    for (int k = 0; k < 3; ++k) {
      if (mesh.face_across(fa, k) == fb) side = k;
    }
    if (side < 0) return std::nullopt;
    const Face& A = mesh.face(fa);
    const Face& B = mesh.face(fb);
    const int right_v = A[side];
    const int left_v = A[(side + 1) % 3];

    Portal p;
    p.left = coords[j][(side + 1) % 3];
    p.right = coords[j][side];
    p.left_vertex = left_v;
    p.right_vertex = right_v;
    p.left3 = mesh.vertex(left_v);
    p.right3 = mesh.vertex(right_v);
    out.portals.push_back(p);

    // Place fb: its copy of the shared edge, then the apex on the far side.
    const int kl = local_index(B, left_v);
    const int kr = local_index(B, right_v);
    const int kn = 3 - kl - kr;
    coords[j + 1][kl] = p.left;
    coords[j + 1][kr] = p.right;
    const Vec3& P = mesh.vertex(right_v);
    const Vec3 pq = mesh.vertex(left_v) - P;
    const Vec3 pr = mesh.vertex(B[kn]) - P;
    const double lpq = pq.norm();
    const double x = pr.dot(pq) / lpq;
    const double y = pr.cross(pq).norm() / lpq;
    const Vec2 e = (p.left - p.right) / (p.left - p.right).norm();
    const Vec2 n(e.y(), -e.x());  // right-hand normal of right->left: away from fa's interior
    coords[j + 1][kn] = p.right + x * e + y * n;
  }

  {
    Portal p;
    p.left = p.right = bary2(m - 1, target.bary);
    p.left3 = p.right3 = target.position;
    out.portals.push_back(p);
  }
  return out;
}

// Shortest path through a portal sequence ("string pulling").
std::vector<Apex> funnel(const std::vector<Portal>& portals) {
  std::vector<Apex> apices;
  Vec2 apex = portals[0].left;
  Vec2 left = apex;
  Vec2 right = apex;
  int apex_vertex = -1;
  int left_vertex = -1;
  int right_vertex = -1;
  int apex_index = 0;
  int left_index = 0;
  int right_index = 0;
  apices.push_back({apex, 0, -1});
  // The funnel can restart on the apex it already holds; record each corner once.
  auto push_apex = [&apices](const Vec2& point, int portal, int vertex) {
    const Apex& last = apices.back();
    if (last.point == point || (vertex >= 0 && last.vertex == vertex)) return;
    apices.push_back({point, portal, vertex});
  };

  auto same = [](const Vec2& a, int va, const Vec2& b, int vb) {
    return (va >= 0 && va == vb) || a == b;
  };

  const int n = static_cast<int>(portals.size());
  for (int i = 1; i < n; ++i) {
    const Portal& p = portals[i];

    if (cross2(right - apex, p.right - apex) >= 0.0) {
      if (same(apex, apex_vertex, right, right_vertex) || cross2(left - apex, p.right - apex) < 0.0) {
        right = p.right;
        right_vertex = p.right_vertex;
        right_index = i;
      } else {
        apex = left;
        apex_vertex = left_vertex;
        apex_index = left_index;
        push_apex(apex, apex_index, apex_vertex);
        right = left = apex;
        right_vertex = left_vertex = apex_vertex;
        right_index = left_index = apex_index;
        i = apex_index;
        continue;
      }
    }

    if (cross2(left - apex, p.left - apex) <= 0.0) {
      if (same(apex, apex_vertex, left, left_vertex) || cross2(right - apex, p.left - apex) > 0.0) {
        left = p.left;
        left_vertex = p.left_vertex;
        left_index = i;
      } else {
        apex = right;
        apex_vertex = right_vertex;
        apex_index = right_index;
        push_apex(apex, apex_index, apex_vertex);
        right = left = apex;
        right_vertex = left_vertex = apex_vertex;
        right_index = left_index = apex_index;
        i = apex_index;
        continue;
      }
    }
  }
  const Portal& last = portals.back();
  if (apices.back().portal != n - 1) {
    if (apices.back().point == last.left) apices.pop_back();
    apices.push_back({last.left, n - 1, -1});
  }
  return apices;
}

double apex_length(const std::vector<Apex>& apices) {
  double len = 0.0;
  for (size_t i = 1; i < apices.size(); ++i) len += (apices[i].point - apices[i - 1].point).norm();
  return len;
}

// Map the planar path back onto the mesh: one point per portal crossing.
std::vector<Vec3> lift_path(const std::vector<Portal>& portals, const std::vector<Apex>& apices, double eps) {
  std::vector<Vec3> pts;
  auto push = [&](const Vec3& p) {
    if (pts.empty() || (pts.back() - p).norm() > eps) pts.push_back(p);
  };
  push(portals.front().left3);
  size_t seg = 0;
  const int n = static_cast<int>(portals.size());
  for (int i = 1; i < n - 1; ++i) {
    while (seg + 1 < apices.size() && apices[seg + 1].portal < i) ++seg;
    const Portal& p = portals[i];
    const Apex& a = apices[seg];
    if (seg + 1 < apices.size() && apices[seg + 1].portal == i) {
      const Apex& b = apices[seg + 1];
      push(b.vertex == p.left_vertex ? p.left3 : p.right3);
      continue;
    }
    const Apex& b = apices[seg + 1];
    // Solve a + s (b - a) = right + t (left - right) for t.
    const Vec2 d = b.point - a.point;
    const Vec2 e = p.left - p.right;
    const double denom = cross2(d, e);
    double t;
    if (std::abs(denom) > 1e-12 * d.norm() * e.norm()) {
      t = cross2(d, a.point - p.right) / denom;
    } else {
      // Segment parallel to the portal or of zero length: nearest portal point.
      t = (a.point - p.right).dot(e) / e.squaredNorm();
    }
    t = std::clamp(t, 0.0, 1.0);
    push(p.right3 + t * (p.left3 - p.right3));
  }
  push(portals.back().left3);
  return pts;
}

struct StripPath {
  std::vector<int> strip;
  std::vector<Portal> portals;
  std::vector<Apex> apices;
  double length = 0.0;
};

std::optional<StripPath> solve_strip(const TriangleMesh& mesh, std::vector<int> strip, const SurfacePoint& source,
                                     const SurfacePoint& target) {
  auto unfolded = unfold_strip(mesh, strip, source, target);
  if (!unfolded) return std::nullopt;
  StripPath sp;
  sp.strip = std::move(strip);
  sp.portals = std::move(unfolded->portals);
  sp.apices = funnel(sp.portals);
  sp.length = apex_length(sp.apices);
  return sp;
}

// Faces crossed by a vertex path, turning the shorter way around each vertex.
std::optional<std::vector<int>> initial_strip(const TriangleMesh& mesh, const SurfacePoint& source,
                                              const std::vector<int>& vpath, const SurfacePoint& target) {
  std::vector<int> strip{source.face};
  int current = source.face;
  for (size_t i = 0; i < vpath.size(); ++i) {
    const int pivot = vpath[i];
    std::function<bool(int)> stop;
    if (i + 1 < vpath.size()) {
      const int next = vpath[i + 1];
      stop = [&mesh, pivot, next](int f) { return face_has_edge(mesh.face(f), pivot, next); };
    } else {
      const int goal = target.face;
      stop = [goal](int f) { return f == goal; };
    }
    auto turn = rotate_shorter(mesh, current, pivot, stop);
    if (!turn) return std::nullopt;
    for (int f : *turn) strip.push_back(f);
    if (!turn->empty()) current = turn->back();
  }
  if (current != target.face) return std::nullopt;
  return strip;
}

// Replace the run of strip faces around `vertex` containing portal
// `portal_index` by the faces on the other side of that vertex.
std::optional<std::vector<int>> flip_around(const TriangleMesh& mesh, const std::vector<int>& strip,
                                            int portal_index, int vertex) {
  if (mesh.is_boundary_vertex(vertex)) return std::nullopt;
  const int m = static_cast<int>(strip.size());
  // portal i joins strip[i-1] and strip[i]
  int a = portal_index - 1;
  int b = portal_index;
  if (a < 0 || b >= m) return std::nullopt;
  if (!face_has(mesh.face(strip[a]), vertex) || !face_has(mesh.face(strip[b]), vertex)) return std::nullopt;
  while (a > 0 && face_has(mesh.face(strip[a - 1]), vertex)) --a;
  while (b + 1 < m && face_has(mesh.face(strip[b + 1]), vertex)) ++b;

  const int k = local_index(mesh.face(strip[a]), vertex);
  int dir = 0;
  if (mesh.face_across(strip[a], k) == strip[a + 1]) dir = +1;
  if (mesh.face_across(strip[a], (k + 2) % 3) == strip[a + 1]) dir = -1;
  if (dir == 0) return std::nullopt;

  const int goal = strip[b];
  auto other = rotate_about(mesh, strip[a], vertex, -dir, [goal](int f) { return f == goal; }, nullptr);
  if (!other) return std::nullopt;

  std::vector<int> out(strip.begin(), strip.begin() + a + 1);
  out.insert(out.end(), other->begin(), other->end());
  out.insert(out.end(), strip.begin() + b + 1, strip.end());
  return out;
}

SurfacePolyline polyline_from_vertices(const TriangleMesh& mesh, const SurfacePoint& source,
                                       const std::vector<int>& vpath, const SurfacePoint& target) {
  SurfacePolyline out;
  const double eps = 1e-13 * std::max(1.0, mesh.bounding_diagonal());
  auto push = [&](const Vec3& p) {
    if (out.points.empty() || (out.points.back() - p).norm() > eps) out.points.push_back(p);
  };
  push(source.position);
  for (int v : vpath) push(mesh.vertex(v));
  push(target.position);
  out.total_length = polyline_length(out.points);
  return out;
}

SurfacePolyline direct_path(const TriangleMesh& mesh, const SurfacePoint& source, const SurfacePoint& target) {
  const double eps = 1e-13 * std::max(1.0, mesh.bounding_diagonal());
  SurfacePolyline direct;
  direct.points = {source.position};
  if ((target.position - source.position).norm() > eps) direct.points.push_back(target.position);
  direct.total_length = polyline_length(direct.points);
  return direct;
}

double vertex_angle_sum(const TriangleMesh& mesh, int v) {
  double sum = 0.0;
  for (int f : mesh.vertex_faces(v)) sum += mesh.corner_angle(f, local_index(mesh.face(f), v));
  return sum;
}

// A path bending around interior vertex p sweeps 2 pi - theta on the strip
// side, theta being the planar angle between its two segments. Going round
// the other side is locally shorter when the remaining angle is below pi.
bool other_side_shorter(const TriangleMesh& mesh, const std::vector<Apex>& apices, size_t i) {
  const Apex& apex = apices[i];
  if (apex.vertex < 0 || mesh.is_boundary_vertex(apex.vertex)) return false;
  const Vec2 a = apices[i - 1].point - apex.point;
  const Vec2 b = apices[i + 1].point - apex.point;
  if (a.squaredNorm() == 0.0 || b.squaredNorm() == 0.0) return false;
  const double theta = std::atan2(std::abs(cross2(a, b)), a.dot(b));
  const double other = vertex_angle_sum(mesh, apex.vertex) - (2.0 * std::numbers::pi - theta);
  return other < std::numbers::pi - 1e-9;
}

// Funnel the strip, then repeatedly move the corridor to the other side of
// apex vertices while that shortens the path.
std::optional<StripPath> optimize_strip(const TriangleMesh& mesh, std::vector<int> strip, const SurfacePoint& source,
                                        const SurfacePoint& target) {
  auto best = solve_strip(mesh, std::move(strip), source, target);
  if (!best) return std::nullopt;
  for (int round = 0; round < kMaxStraightenRounds; ++round) {
    const double before = best->length;
    bool changed = false;
    std::vector<size_t> candidates;
    for (size_t i = 1; i + 1 < best->apices.size(); ++i) {
      if (other_side_shorter(mesh, best->apices, i)) candidates.push_back(i);
    }
    if (candidates.empty()) break;
    if (candidates.size() > 1) {
      // Flip every candidate at once, last first so earlier portal indices stay valid.
      std::vector<int> strip = best->strip;
      for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
        const Apex& apex = best->apices[*it];
        if (auto flipped = flip_around(mesh, strip, apex.portal, apex.vertex)) strip = std::move(*flipped);
      }
      auto candidate = solve_strip(mesh, std::move(strip), source, target);
      if (candidate && candidate->length < best->length * (1.0 - 1e-12)) {
        best = std::move(candidate);
        continue;
      }
    }
    for (size_t i = 1; i + 1 < best->apices.size(); ++i) {
      if (!other_side_shorter(mesh, best->apices, i)) continue;
      const Apex& apex = best->apices[i];
      auto flipped = flip_around(mesh, best->strip, apex.portal, apex.vertex);
      if (!flipped) continue;
      auto candidate = solve_strip(mesh, std::move(*flipped), source, target);
      if (candidate && candidate->length < best->length * (1.0 - 1e-12)) {
        best = std::move(candidate);
        changed = true;
      }
    }
    if (!changed || (before - best->length) < kRelativeTolerance * before) break;
  }
  return best;
}

SurfacePolyline lift(const TriangleMesh& mesh, const StripPath& sp) {
  const double eps = 1e-13 * std::max(1.0, mesh.bounding_diagonal());
  SurfacePolyline out;
  out.points = lift_path(sp.portals, sp.apices, eps);
  out.total_length = polyline_length(out.points);
  return out;
}

}  // namespace

GeodesicTree::GeodesicTree(const TriangleMesh& mesh, int root)
    : root_(root),
      dist_(mesh.num_vertices(), std::numeric_limits<double>::infinity()),
      parent_(mesh.num_vertices(), -1) {
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist_[root] = 0.0;
  queue.emplace(0.0, root);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist_[v]) continue;
    for (int w : mesh.vertex_neighbors(v)) {
      const double nd = d + (mesh.vertex(v) - mesh.vertex(w)).norm();
      if (nd < dist_[w]) {
        dist_[w] = nd;
        parent_[w] = v;
        queue.emplace(nd, w);
      }
    }
  }
}

bool GeodesicTree::reachable(int v) const { return std::isfinite(dist_[v]); }

std::vector<int> GeodesicTree::path_to(int v) const {
  std::vector<int> path;
  if (!reachable(v)) return path;
  for (int at = v; at >= 0; at = parent_[at]) path.push_back(at);
  std::reverse(path.begin(), path.end());
  return path;
}

int nearest_face_vertex(const TriangleMesh& mesh, const SurfacePoint& p) {
  const Face& f = mesh.face(p.face);
  int best = f[0];
  double best_d = (mesh.vertex(f[0]) - p.position).norm();
  for (int k = 1; k < 3; ++k) {
    const double d = (mesh.vertex(f[k]) - p.position).norm();
    if (d < best_d || (d == best_d && f[k] < best)) {
      best = f[k];
      best_d = d;
    }
  }
  return best;
}

SurfacePolyline straighten_vertex_path(const TriangleMesh& mesh, const SurfacePoint& source,
                                       const std::vector<int>& vertex_path, const SurfacePoint& target) {
  SurfacePolyline fallback = polyline_from_vertices(mesh, source, vertex_path, target);
  if (source.face == target.face) return direct_path(mesh, source, target);
  auto strip = initial_strip(mesh, source, vertex_path, target);
  if (!strip) return fallback;
  auto best = optimize_strip(mesh, std::move(*strip), source, target);
  if (!best) return fallback;
  SurfacePolyline out = lift(mesh, *best);
  if (out.points.size() < 2 || out.total_length > fallback.total_length) return fallback;
  return out;
}

std::optional<SurfacePolyline> geodesic_from_tree(const TriangleMesh& mesh, const GeodesicTree& tree,
                                                  const SurfacePoint& source, const SurfacePoint& target,
                                                  bool straighten) {
  const int tv = nearest_face_vertex(mesh, target);
  if (!tree.reachable(tv)) return std::nullopt;
  const std::vector<int> vpath = tree.path_to(tv);
  if (!straighten) return polyline_from_vertices(mesh, source, vpath, target);
  return straighten_vertex_path(mesh, source, vpath, target);
}

SurfacePolyline dijkstra_geodesic(const TriangleMesh& mesh, const SurfacePoint& source,
                                  const SurfacePoint& target, bool straighten) {
  const double scale = std::max(1.0, mesh.bounding_diagonal());
  if ((target.position - source.position).norm() <= 1e-12 * scale) {
    throw ValidationError("geodesic: source and target coincide");
  }
  const GeodesicTree tree(mesh, nearest_face_vertex(mesh, source));
  auto path = geodesic_from_tree(mesh, tree, source, target, straighten);
  if (!path) throw NumericalError("geodesic: target unreachable from source");
  return std::move(*path);
}

struct GeodesicFan::Cache {
  explicit Cache(int faces) : once(new std::once_flag[faces]), strips(faces) {}
  std::unique_ptr<std::once_flag[]> once;
  std::vector<std::optional<std::vector<int>>> strips;
};

GeodesicFan::GeodesicFan(const TriangleMesh& mesh, const SurfacePoint& source)
    : mesh_(mesh),
      source_(source),
      tree_(mesh, nearest_face_vertex(mesh, source)),
      cache_(std::make_unique<Cache>(mesh.num_faces())) {}

GeodesicFan::~GeodesicFan() = default;

std::optional<SurfacePolyline> GeodesicFan::path_to(const SurfacePoint& target) const {
  const int tv = nearest_face_vertex(mesh_, target);
  if (!tree_.reachable(tv)) return std::nullopt;
  if (target.face == source_.face) return direct_path(mesh_, source_, target);

  const int f = target.face;
  std::call_once(cache_->once[f], [&] {
    const SurfacePoint centre = mesh_.surface_point(f, Vec3::Constant(1.0 / 3.0));
    const int cv = nearest_face_vertex(mesh_, centre);
    if (auto strip = initial_strip(mesh_, source_, tree_.path_to(cv), centre)) {
      if (auto best = optimize_strip(mesh_, std::move(*strip), source_, centre)) cache_->strips[f] = best->strip;
    }
  });

  const std::vector<int> vpath = tree_.path_to(tv);
  SurfacePolyline fallback = polyline_from_vertices(mesh_, source_, vpath, target);
  std::optional<StripPath> best;
  if (cache_->strips[f]) best = optimize_strip(mesh_, *cache_->strips[f], source_, target);
  if (!best) {
    if (auto strip = initial_strip(mesh_, source_, vpath, target)) best = optimize_strip(mesh_, std::move(*strip), source_, target);
  }
  if (!best) return fallback;
  SurfacePolyline out = lift(mesh_, *best);
  if (out.points.size() < 2 || out.total_length > fallback.total_length) return fallback;
  return out;
}

}  // namespace curvetac
