#include <cmath>
#include <vector>

#include "curvetac/mesh.hpp"

namespace curvetac {

CotanLaplacian cotangent_laplacian(const TriangleMesh& mesh) {
  const int nv = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(12 * mesh.num_faces());
  Eigen::VectorXd areas = Eigen::VectorXd::Zero(nv);

  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& fc = mesh.face(f);
    for (int k = 0; k < 3; ++k) {
      // The corner at k is opposite the edge (k+1, k+2).
      const int i = fc[(k + 1) % 3];
      const int j = fc[(k + 2) % 3];
      const Vec3 a = mesh.vertex(i) - mesh.vertex(fc[k]);
      const Vec3 b = mesh.vertex(j) - mesh.vertex(fc[k]);
      const double w = 0.5 * a.dot(b) / a.cross(b).norm();
      triplets.emplace_back(i, j, w);
      triplets.emplace_back(j, i, w);
      triplets.emplace_back(i, i, -w);
      triplets.emplace_back(j, j, -w);
    }
    const double third = mesh.face_area(f) / 3.0;
    for (int v : fc) areas[v] += third;
  }

  CotanLaplacian out;
  out.laplacian.resize(nv, nv);
  out.laplacian.setFromTriplets(triplets.begin(), triplets.end());
  out.laplacian.makeCompressed();
  out.vertex_areas = std::move(areas);
  return out;
}

}  // namespace curvetac
