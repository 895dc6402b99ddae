#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "curvetac/errors.hpp"
#include "curvetac/mesh.hpp"
#include "curvetac/mesh_io.hpp"
#include "curvetac/mesh_primitives.hpp"

using namespace curvetac;

namespace {

constexpr const char* kTriangleStl = R"(solid tri
facet normal 0 0 1
  outer loop
    vertex 0 0 0
    vertex 1 0 0
    vertex 0 1 0
  endloop
endfacet
endsolid tri
)";

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "curvetac_test_mesh";
  std::filesystem::create_directories(dir);
  return dir;
}

// Edge count straight from the face list.
int count_edges(const std::vector<Face>& faces) {
  std::set<std::pair<int, int>> edges;
  for (const Face& f : faces) {
    for (int k = 0; k < 3; ++k) edges.insert(std::minmax(f[k], f[(k + 1) % 3]));
  }
  return static_cast<int>(edges.size());
}

}  // namespace

TEST_CASE("ascii stl with one triangle") {
  const TriangleMesh m = parse_stl(kTriangleStl);
  CHECK(m.num_vertices() == 3);
  CHECK(m.num_faces() == 1);
  CHECK(m.face_area(0) == doctest::Approx(0.5));
}

TEST_CASE("binary stl round trip merges shared vertices") {
  const TriangleMesh sphere = make_icosphere(2);
  const auto path = temp_dir() / "sphere.stl";
  save_stl_binary(sphere, path);
  const TriangleMesh loaded = load_mesh(path);
  CHECK(loaded.num_vertices() == sphere.num_vertices());
  CHECK(loaded.num_faces() == sphere.num_faces());
  CHECK(loaded.euler_characteristic() == 2);
}

TEST_CASE("icosphere obj is a closed manifold") {
  const auto path = temp_dir() / "ico4.obj";
  save_obj(make_icosphere(4), path);
  const TriangleMesh m = load_mesh(path, MeshFormat::obj);
  REQUIRE(m.num_vertices() == 2562);
  const int edges = count_edges(m.faces());
  CHECK(m.num_vertices() - edges + m.num_faces() == 2);
  CHECK(m.num_edges() == edges);
}

TEST_CASE("obj ignores materials and texture indices") {
  const std::string obj =
      "mtllib x.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nvt 0 0\nusemtl red\nf 1/1 2/1 3/1\nf 2 4 3\n";
  const TriangleMesh m = parse_obj(obj);
  CHECK(m.num_faces() == 2);
}

TEST_CASE("invalid meshes are rejected") {
  SUBCASE("zero-area face") {
    const std::string stl =
        "solid z\nfacet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 2 0 0\nendloop\nendfacet\n"
        "endsolid z\n";
    CHECK_THROWS_AS(parse_stl(stl), ValidationError);
  }
  SUBCASE("index out of range") {
    CHECK_THROWS_AS(TriangleMesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {Face{0, 1, 3}}), ValidationError);
  }
  SUBCASE("three faces on one edge") {
    std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1)};
    CHECK_THROWS_AS(TriangleMesh(v, {Face{0, 1, 2}, Face{1, 0, 3}, Face{0, 1, 4}}), ValidationError);
  }
  SUBCASE("two components") {
    std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0),
                           Vec3(5, 0, 0), Vec3(6, 0, 0), Vec3(5, 1, 0)};
    CHECK_THROWS_AS(TriangleMesh(v, {Face{0, 1, 2}, Face{3, 4, 5}}), ValidationError);
  }
  SUBCASE("inconsistent orientation") {
    std::vector<Vec3> v = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
    CHECK_THROWS_AS(TriangleMesh(v, {Face{0, 1, 2}, Face{1, 2, 3}}), ValidationError);
  }
  SUBCASE("unparsable files") {
    CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0\n"), FormatError);
    CHECK_THROWS_AS(parse_stl(std::string(90, '\0')), FormatError);
    CHECK_THROWS_AS(load_mesh(temp_dir() / "missing.stl"), FormatError);
  }
}

TEST_CASE("closest point queries") {
  const TriangleMesh sphere = make_icosphere(4);

  SUBCASE("point on a face interior") {
    const SurfacePoint p = sphere.surface_point(17, Vec3(0.2, 0.3, 0.5));
    const ClosestPointResult r = sphere.closest_point(p.position);
    CHECK(r.distance < 1e-12);
    CHECK(r.point.face == 17);
    CHECK((r.point.bary - p.bary).norm() < 1e-9);
  }
  SUBCASE("centre of the unit sphere") {
    CHECK(std::abs(sphere.closest_point(Vec3::Zero()).distance - 1.0) < 0.01);
  }
  SUBCASE("beyond a vertex along its normal") {
    const int v = 123;
    const ClosestPointResult r = sphere.closest_point(sphere.vertex(v) + 0.3 * sphere.vertex_normals()[v]);
    CHECK((r.point.position - sphere.vertex(v)).norm() < 1e-12);
    CHECK(r.point.bary.maxCoeff() == doctest::Approx(1.0));
  }
  SUBCASE("projection is idempotent") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
      const ClosestPointResult r = sphere.closest_point(Vec3(u(rng), u(rng), u(rng)));
      const ClosestPointResult again = sphere.closest_point(r.point.position);
      CHECK(again.distance < 1e-12);
      CHECK(std::abs(r.point.bary.sum() - 1.0) < 1e-9);
      CHECK(r.point.bary.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("raycast hits the nearest surface") {
  const TriangleMesh sphere = make_icosphere(3, 1.0, Vec3(0, 0, 5));
  const auto hit = sphere.raycast(Vec3::Zero(), Vec3(0, 0, 1));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(4.0).epsilon(0.01));
  CHECK_FALSE(sphere.raycast(Vec3::Zero(), Vec3(1, 0, 0)));
}

TEST_CASE("vertex normals on an icosphere") {
  const TriangleMesh sphere = make_icosphere(3);
  double worst = 0.0;
  for (int v = 0; v < sphere.num_vertices(); ++v) {
    const Vec3& n = sphere.vertex_normals()[v];
    CHECK(std::abs(n.norm() - 1.0) < 1e-6);
    worst = std::max(worst, std::acos(std::clamp(n.dot(sphere.vertex(v).normalized()), -1.0, 1.0)));
  }
  CHECK(worst * 180.0 / std::numbers::pi <= 2.0);
}

TEST_CASE("cotangent laplacian") {
  SUBCASE("rows sum to zero and the operator is symmetric") {
    const TriangleMesh m = make_fingertip(0.01, 0.03, 32, 15, 8);
    const CotanLaplacian lap = cotangent_laplacian(m);
    const Eigen::VectorXd rows = lap.laplacian * Eigen::VectorXd::Ones(m.num_vertices());
    CHECK(rows.cwiseAbs().maxCoeff() < 1e-9);
    const Eigen::SparseMatrix<double> diff = lap.laplacian - Eigen::SparseMatrix<double>(lap.laplacian.transpose());
    CHECK(diff.norm() <= 1e-9 * lap.laplacian.norm());
    CHECK(lap.vertex_areas.minCoeff() > 0.0);
  }
  SUBCASE("flat grid coordinates are harmonic in the interior") {
    const TriangleMesh grid = make_grid(12, 1.0);
    const CotanLaplacian lap = cotangent_laplacian(grid);
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::VectorXd x(grid.num_vertices());
      for (int v = 0; v < grid.num_vertices(); ++v) x[v] = grid.vertex(v)[axis];
      const Eigen::VectorXd lx = lap.laplacian * x;
      for (int v = 0; v < grid.num_vertices(); ++v) {
        if (!grid.is_boundary_vertex(v)) CHECK(std::abs(lx[v]) < 1e-12);
      }
    }
  }
  SUBCASE("lumped areas of the unit sphere sum to 4 pi") {
    const CotanLaplacian lap = cotangent_laplacian(make_icosphere(4));
    CHECK(std::abs(lap.vertex_areas.sum() / (4.0 * std::numbers::pi) - 1.0) < 0.01);
  }
}

TEST_CASE("rigid transforms") {
  RigidTransform xf;
  xf.rotation = Eigen::AngleAxisd(0.3, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  xf.translation = Vec3(0.1, -0.2, 0.3);
  CHECK(xf.is_proper());
  RigidTransform mirror;
  mirror.rotation(0, 0) = -1.0;
  CHECK_FALSE(mirror.is_proper());

  const TriangleMesh m = make_icosphere(1);
  const TriangleMesh moved = m.transformed(xf);
  CHECK((moved.vertex(5) - xf.apply(m.vertex(5))).norm() < 1e-15);
  CHECK(moved.content_hash() != m.content_hash());
  CHECK(m.content_hash() == make_icosphere(1).content_hash());
}

TEST_CASE("procedural membranes") {
  CHECK(make_icosphere(2).num_vertices() == 162);
  const TriangleMesh tip = make_fingertip(0.01, 0.03, 128, 61, 32);
  CHECK(tip.num_faces() >= 20000);
  CHECK(tip.euler_characteristic() == 1);
  const TriangleMesh tube = make_cylinder(1.0, 0.0, 1.0, 16, 4);
  CHECK(tube.euler_characteristic() == 0);
  CHECK(tube.vertex_normals()[0].dot(Vec3(tube.vertex(0).x(), tube.vertex(0).y(), 0.0)) > 0.0);
}
