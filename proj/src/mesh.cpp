#include "curvetac/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include <Eigen/Geometry>

#include "curvetac/errors.hpp"
#include "mesh_bvh.hpp"

namespace curvetac {

namespace {

std::uint64_t edge_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

std::string face_label(int f) {
  return "face " + std::to_string(f);
}

}  // namespace

bool RigidTransform::is_proper(double tol) const {
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  validate_and_index();
  bvh_ = std::make_unique<MeshBvh>(vertices_, faces_);
}

TriangleMesh::~TriangleMesh() = default;
TriangleMesh::TriangleMesh(TriangleMesh&&) noexcept = default;
TriangleMesh& TriangleMesh::operator=(TriangleMesh&&) noexcept = default;

TriangleMesh::TriangleMesh(const TriangleMesh& other)
    : vertices_(other.vertices_),
      faces_(other.faces_),
      face_normals_(other.face_normals_),
      face_areas_(other.face_areas_),
      vertex_normals_(other.vertex_normals_),
      edges_(other.edges_),
      face_edges_(other.face_edges_),
      vertex_face_offsets_(other.vertex_face_offsets_),
      vertex_face_list_(other.vertex_face_list_),
      vertex_neighbor_offsets_(other.vertex_neighbor_offsets_),
      vertex_neighbor_list_(other.vertex_neighbor_list_),
      boundary_vertex_(other.boundary_vertex_),
      mean_edge_length_(other.mean_edge_length_),
      bounding_diagonal_(other.bounding_diagonal_),
      bvh_(std::make_unique<MeshBvh>(*other.bvh_)) {}

TriangleMesh& TriangleMesh::operator=(const TriangleMesh& other) {
  if (this != &other) {
    TriangleMesh copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void TriangleMesh::validate_and_index() {
  const int nv = num_vertices();
  const int nf = num_faces();
  if (nv == 0 || nf == 0) throw ValidationError("mesh has no faces");

  for (const Vec3& p : vertices_) {
    if (!p.allFinite()) throw ValidationError("mesh has a non-finite vertex coordinate");
  }

  face_normals_.resize(nf);
  face_areas_.resize(nf);
  for (int f = 0; f < nf; ++f) {
    const Face& fc = faces_[f];
    for (int k = 0; k < 3; ++k) {
      if (fc[k] < 0 || fc[k] >= nv) {
        throw ValidationError(face_label(f) + " references vertex " + std::to_string(fc[k]) +
                              " but the mesh has " + std::to_string(nv) + " vertices");
      }
    }
    if (fc[0] == fc[1] || fc[1] == fc[2] || fc[0] == fc[2]) {
      throw ValidationError(face_label(f) + " repeats a vertex index");
    }
    const Vec3 n = (vertices_[fc[1]] - vertices_[fc[0]]).cross(vertices_[fc[2]] - vertices_[fc[0]]);
    const double area = 0.5 * n.norm();
    if (!(area >= kMinFaceArea)) {
      std::ostringstream msg;
      msg << face_label(f) << " is degenerate (area " << area << " m^2)";
      throw ValidationError(msg.str());
    }
    face_areas_[f] = area;
    face_normals_[f] = n.normalized();
  }

  // Undirected edges; each directed half must occur once for a consistently
  // oriented manifold.
  std::unordered_map<std::uint64_t, int> edge_index;
  std::unordered_map<std::uint64_t, int> directed;
  edge_index.reserve(3 * nf);
  directed.reserve(3 * nf);
  face_edges_.resize(nf);
  edges_.clear();
  for (int f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const int a = faces_[f][k];
      const int b = faces_[f][(k + 1) % 3];
      if (!directed.emplace(edge_key(a, b), f).second) {
        throw ValidationError("non-manifold or inconsistently oriented edge (" + std::to_string(a) +
                              ", " + std::to_string(b) + ") at " + face_label(f));
      }
      const int lo = std::min(a, b);
      const int hi = std::max(a, b);
      auto [it, inserted] = edge_index.emplace(edge_key(lo, hi), static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back(MeshEdge{{lo, hi}, {f, -1}});
      } else {
        MeshEdge& e = edges_[it->second];
        if (e.faces[1] != -1) {
          throw ValidationError("non-manifold edge (" + std::to_string(lo) + ", " + std::to_string(hi) +
                                ") shared by more than two faces");
        }
        e.faces[1] = f;
      }
      face_edges_[f][k] = it->second;
    }
  }

  // Vertex -> face incidence (CSR).
  vertex_face_offsets_.assign(nv + 1, 0);
  for (const Face& fc : faces_) {
    for (int v : fc) ++vertex_face_offsets_[v + 1];
  }
  for (int v = 0; v < nv; ++v) {
    if (vertex_face_offsets_[v + 1] == 0) {
      throw ValidationError("vertex " + std::to_string(v) +
                            " is not referenced by any face (mesh is not a single connected component)");
    }
    vertex_face_offsets_[v + 1] += vertex_face_offsets_[v];
  }
  vertex_face_list_.resize(vertex_face_offsets_[nv]);
  {
    std::vector<int> cursor(vertex_face_offsets_.begin(), vertex_face_offsets_.end() - 1);
    for (int f = 0; f < nf; ++f) {
      for (int v : faces_[f]) vertex_face_list_[cursor[v]++] = f;
    }
  }

  boundary_vertex_.assign(nv, 0);
  for (const MeshEdge& e : edges_) {
    if (e.faces[1] < 0) {
      boundary_vertex_[e.vertices[0]] = 1;
      boundary_vertex_[e.vertices[1]] = 1;
    }
  }

  // Each vertex's faces must form a single fan around it.
  for (int v = 0; v < nv; ++v) {
    const auto incident = vertex_faces(v);
    std::vector<int> stack{incident[0]};
    std::vector<int> seen{incident[0]};
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      for (int k = 0; k < 3; ++k) {
        const Face& fc = faces_[f];
        if (fc[k] != v && fc[(k + 1) % 3] != v) continue;
        const int g = face_across(f, k);
        if (g >= 0 && std::find(seen.begin(), seen.end(), g) == seen.end()) {
          seen.push_back(g);
          stack.push_back(g);
        }
      }
    }
    if (seen.size() != incident.size()) {
      throw ValidationError("non-manifold vertex " + std::to_string(v) +
                            " (its faces do not form a single fan)");
    }
  }

  // Edge connectivity over faces.
  {
    std::vector<std::uint8_t> reached(nf, 0);
    std::vector<int> stack{0};
    reached[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      for (int k = 0; k < 3; ++k) {
        const int g = face_across(f, k);
        if (g >= 0 && !reached[g]) {
          reached[g] = 1;
          ++count;
          stack.push_back(g);
        }
      }
    }
    if (count != nf) {
      throw ValidationError("mesh has multiple connected components (" + std::to_string(count) + " of " +
                            std::to_string(nf) + " faces reachable from face 0)");
    }
  }

  vertex_neighbor_offsets_.assign(nv + 1, 0);
  for (const MeshEdge& e : edges_) {
    ++vertex_neighbor_offsets_[e.vertices[0] + 1];
    ++vertex_neighbor_offsets_[e.vertices[1] + 1];
  }
  for (int v = 0; v < nv; ++v) vertex_neighbor_offsets_[v + 1] += vertex_neighbor_offsets_[v];
  vertex_neighbor_list_.resize(vertex_neighbor_offsets_[nv]);
  {
    std::vector<int> cursor(vertex_neighbor_offsets_.begin(), vertex_neighbor_offsets_.end() - 1);
    for (const MeshEdge& e : edges_) {
      vertex_neighbor_list_[cursor[e.vertices[0]]++] = e.vertices[1];
      vertex_neighbor_list_[cursor[e.vertices[1]]++] = e.vertices[0];
    }
    for (int v = 0; v < nv; ++v) {
      std::sort(vertex_neighbor_list_.begin() + vertex_neighbor_offsets_[v],
                vertex_neighbor_list_.begin() + vertex_neighbor_offsets_[v + 1]);
    }
  }

  // Area-weighted vertex normals.
  vertex_normals_.assign(nv, Vec3::Zero());
  for (int f = 0; f < nf; ++f) {
    for (int v : faces_[f]) vertex_normals_[v] += face_areas_[f] * face_normals_[f];
  }
  for (int v = 0; v < nv; ++v) {
    const double len = vertex_normals_[v].norm();
    if (len <= 0.0) throw ValidationError("vertex " + std::to_string(v) + " has a vanishing normal");
    vertex_normals_[v] /= len;
  }

  double total = 0.0;
  for (const MeshEdge& e : edges_) total += (vertices_[e.vertices[0]] - vertices_[e.vertices[1]]).norm();
  mean_edge_length_ = total / static_cast<double>(edges_.size());

  Eigen::AlignedBox3d box;
  for (const Vec3& p : vertices_) box.extend(p);
  bounding_diagonal_ = box.diagonal().norm();
}

int TriangleMesh::face_across(int f, int k) const {
  const MeshEdge& e = edges_[face_edges_[f][k]];
  return e.faces[0] == f ? e.faces[1] : e.faces[0];
}

std::span<const int> TriangleMesh::vertex_faces(int v) const {
  return {vertex_face_list_.data() + vertex_face_offsets_[v],
          static_cast<size_t>(vertex_face_offsets_[v + 1] - vertex_face_offsets_[v])};
}

std::span<const int> TriangleMesh::vertex_neighbors(int v) const {
  return {vertex_neighbor_list_.data() + vertex_neighbor_offsets_[v],
          static_cast<size_t>(vertex_neighbor_offsets_[v + 1] - vertex_neighbor_offsets_[v])};
}

double TriangleMesh::corner_angle(int f, int k) const {
  const Face& fc = faces_[f];
  const Vec3& p = vertices_[fc[k]];
  const Vec3 a = vertices_[fc[(k + 1) % 3]] - p;
  const Vec3 b = vertices_[fc[(k + 2) % 3]] - p;
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

SurfacePoint TriangleMesh::surface_point(int f, const Vec3& bary) const {
  const Face& fc = faces_[f];
  SurfacePoint sp;
  sp.face = f;
  sp.bary = bary;
  sp.position = bary[0] * vertices_[fc[0]] + bary[1] * vertices_[fc[1]] + bary[2] * vertices_[fc[2]];
  return sp;
}

SurfacePoint TriangleMesh::vertex_point(int v) const {
  const int f = vertex_faces(v)[0];
  Vec3 bary = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    if (faces_[f][k] == v) bary[k] = 1.0;
  }
  return surface_point(f, bary);
}

ClosestPointResult TriangleMesh::closest_point(const Vec3& q) const {
  return bvh_->closest_point(vertices_, faces_, q);
}

std::optional<RayHit> TriangleMesh::raycast(const Vec3& origin, const Vec3& dir, double t_min) const {
  return bvh_->raycast(vertices_, faces_, origin, dir, t_min);
}

std::string TriangleMesh::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const Vec3& p : vertices_) {
    for (int a = 0; a < 3; ++a) {
      const double c = p[a];
      mix(&c, sizeof(c));
    }
  }
  for (const Face& fc : faces_) {
    for (int v : fc) {
      const std::int32_t i = v;
      mix(&i, sizeof(i));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TriangleMesh TriangleMesh::transformed(const RigidTransform& xf) const {
  std::vector<Vec3> moved(vertices_.size());
  for (size_t i = 0; i < vertices_.size(); ++i) moved[i] = xf.apply(vertices_[i]);
  return TriangleMesh(std::move(moved), faces_);
}

SurfacePoint closest_surface_point(const TriangleMesh& mesh, const Vec3& q) {
  return mesh.closest_point(q).point;
}

}  // namespace curvetac
