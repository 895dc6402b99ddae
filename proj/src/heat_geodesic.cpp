#include <cmath>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "curvetac/errors.hpp"
#include "curvetac/surface_paths.hpp"

namespace curvetac {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
constexpr int kPinnedVertex = 0;
constexpr double kIterativeTolerance = 1e-10;

// Cholesky with a conjugate-gradient fallback when the factorisation fails.
class SpdSolver {
 public:
  SpdSolver(const SparseMatrix& m, const char* what) : matrix_(m), what_(what) {
    ldlt_.compute(matrix_);
    if (ldlt_.info() != Eigen::Success) {
      use_cg_ = true;
      cg_.setTolerance(kIterativeTolerance);
      cg_.compute(matrix_);
      if (cg_.info() != Eigen::Success) throw NumericalError(std::string(what_) + ": preconditioner setup failed");
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x;
    bool ok = true;
    if (use_cg_) {
      x = cg_.solve(rhs);
      ok = cg_.info() == Eigen::Success;
    } else {
      x = ldlt_.solve(rhs);
      ok = ldlt_.info() == Eigen::Success;
    }
    const double residual = (matrix_ * x - rhs).norm();
    const double scale = std::max(1.0, rhs.norm());
    if (!ok || !x.allFinite() || residual > 1e-6 * scale) {
      throw NumericalError(std::string(what_) + ": linear solve failed (residual norm " + std::to_string(residual) +
                           ")");
    }
    return x;
  }

 private:
  SparseMatrix matrix_;
  const char* what_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg_;
  bool use_cg_ = false;
};

// Gradient of a piecewise-linear function on face f.
Vec3 face_gradient(const TriangleMesh& mesh, int f, const Eigen::Ref<const Eigen::VectorXd>& u) {
  const Face& fc = mesh.face(f);
  const Vec3& n = mesh.face_normal(f);
  Vec3 g = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    const Vec3 e = mesh.vertex(fc[(k + 2) % 3]) - mesh.vertex(fc[(k + 1) % 3]);
    g += u[fc[k]] * n.cross(e);
  }
  return g / (2.0 * mesh.face_area(f));
}

double cot_at(const Vec3& apex, const Vec3& a, const Vec3& b) {
  const Vec3 u = a - apex;
  const Vec3 v = b - apex;
  return u.dot(v) / u.cross(v).norm();
}

// Copy of m with the rows and columns of `fixed` replaced by identity rows.
SparseMatrix with_identity_rows(const SparseMatrix& m, const std::vector<char>& fixed) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(m.nonZeros());
  for (int col = 0; col < m.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
      if (fixed[it.row()] || fixed[it.col()]) continue;
      entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int i = 0; i < m.rows(); ++i) {
    if (fixed[i]) entries.emplace_back(i, i, 1.0);
  }
  SparseMatrix out(m.rows(), m.cols());
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

}  // namespace

struct HeatGeodesicSolver::Factors {
  Factors(const SparseMatrix& heat, const SparseMatrix& poisson)
      : heat_solver(heat, "heat diffusion"), poisson_solver(poisson, "distance recovery") {}
  SpdSolver heat_solver;
  SpdSolver poisson_solver;
  // Meshes with boundary: heat flow with zero boundary values, averaged with
  // the free-boundary solution.
  std::vector<char> boundary;
  std::unique_ptr<SpdSolver> dirichlet_solver;
};

HeatGeodesicSolver::HeatGeodesicSolver(const TriangleMesh& mesh, double t_scale) : mesh_(mesh) {
  if (!(t_scale > 0.0) || !std::isfinite(t_scale)) {
    throw ValidationError("heat method: t_scale must be positive, got " + std::to_string(t_scale));
  }
  const double h = mesh.mean_edge_length();
  time_step_ = t_scale * h * h;

  const CotanLaplacian cl = cotangent_laplacian(mesh);
  const int n = mesh.num_vertices();

  SparseMatrix mass(n, n);
  {
    std::vector<Eigen::Triplet<double>> diag;
    diag.reserve(n);
    for (int i = 0; i < n; ++i) diag.emplace_back(i, i, cl.vertex_areas[i]);
    mass.setFromTriplets(diag.begin(), diag.end());
  }
  const SparseMatrix heat = mass - time_step_ * cl.laplacian;

  std::vector<Eigen::Triplet<double>> pinned;
  pinned.reserve(cl.laplacian.nonZeros());
  for (int col = 0; col < cl.laplacian.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(cl.laplacian, col); it; ++it) {
      if (it.row() == kPinnedVertex || it.col() == kPinnedVertex) continue;
      pinned.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), -it.value());
    }
  }
  pinned.emplace_back(kPinnedVertex, kPinnedVertex, 1.0);
  SparseMatrix poisson(n, n);
  poisson.setFromTriplets(pinned.begin(), pinned.end());

  factors_ = std::make_unique<Factors>(heat, poisson);
  factors_->boundary.assign(n, 0);
  bool has_boundary = false;
  for (int i = 0; i < n; ++i) {
    if (mesh.is_boundary_vertex(i)) factors_->boundary[i] = has_boundary = true;
  }
  if (has_boundary) {
    factors_->dirichlet_solver =
        std::make_unique<SpdSolver>(with_identity_rows(heat, factors_->boundary), "heat diffusion");
  }
}

HeatGeodesicSolver::~HeatGeodesicSolver() = default;

DistanceField HeatGeodesicSolver::distance_from(const SurfacePoint& source) const {
  const int n = mesh_.num_vertices();
  const Face& sf = mesh_.face(source.face);

  Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < 3; ++k) delta[sf[k]] += source.bary[k];
  Eigen::VectorXd u = factors_->heat_solver.solve(delta);
  if (factors_->dirichlet_solver) {
    Eigen::VectorXd fixed_delta = delta;
    for (int i = 0; i < n; ++i) {
      if (factors_->boundary[i]) fixed_delta[i] = 0.0;
    }
    u = 0.5 * (u + factors_->dirichlet_solver->solve(fixed_delta));
  }

  Eigen::VectorXd divergence = Eigen::VectorXd::Zero(n);
  for (int f = 0; f < mesh_.num_faces(); ++f) {
    Vec3 x = face_gradient(mesh_, f, u);
    const double len = x.norm();
    if (!(len > 0.0)) continue;
    x = -x / len;
    const Face& fc = mesh_.face(f);
    for (int k = 0; k < 3; ++k) {
      const Vec3& pi = mesh_.vertex(fc[k]);
      const Vec3& p1 = mesh_.vertex(fc[(k + 1) % 3]);
      const Vec3& p2 = mesh_.vertex(fc[(k + 2) % 3]);
      const double cot2 = cot_at(p2, pi, p1);  // opposite edge pi-p1
      const double cot1 = cot_at(p1, pi, p2);  // opposite edge pi-p2
      divergence[fc[k]] += 0.5 * (cot2 * (p1 - pi).dot(x) + cot1 * (p2 - pi).dot(x));
    }
  }

  // -L phi = -div with the pinned row replaced by phi[pin] = 0.
  Eigen::VectorXd rhs = -divergence;
  rhs.array() -= rhs.mean();
  rhs[kPinnedVertex] = 0.0;
  Eigen::VectorXd phi = factors_->poisson_solver.solve(rhs);

  double at_source = 0.0;
  for (int k = 0; k < 3; ++k) at_source += source.bary[k] * phi[sf[k]];

  DistanceField field;
  field.source_position = source.position;
  field.values.resize(n);
  for (int i = 0; i < n; ++i) field.values[i] = std::max(0.0, phi[i] - at_source);
  return field;
}

DistanceField heat_distance_field(const TriangleMesh& mesh, const SurfacePoint& source, double t_scale) {
  const HeatGeodesicSolver solver(mesh, t_scale);
  return solver.distance_from(source);
}

double interpolate_distance(const TriangleMesh& mesh, const DistanceField& field, const SurfacePoint& p) {
  const Face& f = mesh.face(p.face);
  double d = 0.0;
  for (int k = 0; k < 3; ++k) d += p.bary[k] * field.values[f[k]];
  return d;
}

std::optional<Vec3> distance_gradient_direction(const TriangleMesh& mesh, const DistanceField& field,
                                                const SurfacePoint& target) {
  const Eigen::Map<const Eigen::VectorXd> values(field.values.data(), static_cast<Eigen::Index>(field.values.size()));
  const Face& tf = mesh.face(target.face);
  const Vec3& normal = mesh.face_normal(target.face);

  // Area-weighted vertex gradients, blended with the target's barycentrics.
  Vec3 g = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    if (target.bary[k] == 0.0) continue;
    Vec3 vg = Vec3::Zero();
    for (int f : mesh.vertex_faces(tf[k])) vg += mesh.face_area(f) * face_gradient(mesh, f, values);
    g += target.bary[k] * vg.normalized();
  }
  g -= g.dot(normal) * normal;
  if (!(g.norm() > 1e-12) || !g.allFinite()) g = face_gradient(mesh, target.face, values);
  const double len = g.norm();
  if (!(len > 1e-12)) return std::nullopt;
  return Vec3(g / len);
}

}  // namespace curvetac
