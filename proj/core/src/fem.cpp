#include "cavpend/fem.hpp"

#include <cmath>
#include <string>

#include <Eigen/KLUSupport>

#include "cavpend/errors.hpp"

namespace cavpend {

ElementGeometry element_geometry(const Mesh& mesh, int element) {
  ElementGeometry g;
  g.area = mesh.area(element);
  for (int i = 0; i < 3; ++i) {
    const int f = mesh.element_face(element, i);
    const Face& face = mesh.faces()[f];
    g.faces[i] = f;
    g.midpoints[i] = face.midpoint;
    g.basis_gradients[i] = face.length / g.area * mesh.outward_normal(element, i);
  }
  return g;
}

std::vector<ElementGeometry> element_geometries(const Mesh& mesh) {
  std::vector<ElementGeometry> out;
  out.reserve(mesh.num_elements());
  for (int k = 0; k < mesh.num_elements(); ++k) out.push_back(element_geometry(mesh, k));
  return out;
}

double integrate_midpoint(const Mesh& mesh, int element, const std::function<double(const Vec2&)>& f) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) sum += f(mesh.faces()[mesh.element_face(element, i)].midpoint);
  return mesh.area(element) / 3.0 * sum;
}

std::array<QuadraturePoint, 7> degree5_rule(const Mesh& mesh, int element) {
  static const double s15 = std::sqrt(15.0);
  static const double a1 = (9.0 - 2.0 * s15) / 21.0;
  static const double b1 = (6.0 + s15) / 21.0;
  static const double a2 = (9.0 + 2.0 * s15) / 21.0;
  static const double b2 = (6.0 - s15) / 21.0;
  static const double w1 = (155.0 + s15) / 1200.0;
  static const double w2 = (155.0 - s15) / 1200.0;

  const auto& tri = mesh.triangles()[element];
  const Vec2& p0 = mesh.vertices()[tri[0]];
  const Vec2& p1 = mesh.vertices()[tri[1]];
  const Vec2& p2 = mesh.vertices()[tri[2]];
  const double area = mesh.area(element);
  auto at = [&](double l0, double l1, double l2, double w) {
    return QuadraturePoint{l0 * p0 + l1 * p1 + l2 * p2, w * area};
  };
  return {at(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225),
          at(a1, b1, b1, w1), at(b1, a1, b1, w1), at(b1, b1, a1, w1),
          at(a2, b2, b2, w2), at(b2, a2, b2, w2), at(b2, b2, a2, w2)};
}

double face_flux(const Mesh& mesh, const CRField& w, int face) {
  const Face& f = mesh.faces()[face];
  return f.length * w[face].dot(f.normal);
}

CRField cr_interpolate(const std::function<Vec2(const Vec2&)>& f, const Mesh& mesh) {
  CRField u(mesh);
  for (int i = 0; i < mesh.num_faces(); ++i) u[i] = f(mesh.faces()[i].midpoint);
  return u;
}

CRScalarField cr_interpolate_scalar(const std::function<double(const Vec2&)>& f, const Mesh& mesh) {
  CRScalarField u(mesh);
  for (int i = 0; i < mesh.num_faces(); ++i) u.dof[i] = f(mesh.faces()[i].midpoint);
  return u;
}

Vec2 cr_evaluate(const CRField& u, const Mesh& mesh, int element, const Vec2& x) {
  const ElementGeometry g = element_geometry(mesh, element);
  Vec2 value = Vec2::Zero();
  for (int i = 0; i < 3; ++i) {
    const double phi = 1.0 + g.basis_gradients[i].dot(x - g.midpoints[i]);
    value += phi * u[g.faces[i]];
  }
  return value;
}

std::vector<Mat2> elem_gradient(const CRField& u, const Mesh& mesh) {
  std::vector<Mat2> grads(mesh.num_elements());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementGeometry g = element_geometry(mesh, k);
    Mat2 G = Mat2::Zero();
    for (int i = 0; i < 3; ++i) G += u[g.faces[i]] * g.basis_gradients[i].transpose();
    grads[k] = G;
  }
  return grads;
}

std::vector<Vec2> elem_gradient(const CRScalarField& u, const Mesh& mesh) {
  std::vector<Vec2> grads(mesh.num_elements());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementGeometry g = element_geometry(mesh, k);
    Vec2 G = Vec2::Zero();
    for (int i = 0; i < 3; ++i) G += u.dof[g.faces[i]] * g.basis_gradients[i];
    grads[k] = G;
  }
  return grads;
}

std::vector<double> elem_divergence_integral(const CRField& u, const Mesh& mesh) {
  std::vector<double> div(mesh.num_elements(), 0.0);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    for (int i = 0; i < 3; ++i) {
      const int f = mesh.element_face(k, i);
      div[k] += mesh.face_sign(k, i) * face_flux(mesh, u, f);
    }
  }
  return div;
}

double viscous_entry(const ElementGeometry& geom, int test_local, int test_comp, int trial_local,
                     int trial_comp, double mu, double lambda) {
  const Vec2& gt = geom.basis_gradients[test_local];
  const Vec2& gs = geom.basis_gradients[trial_local];
  const int i = trial_comp;
  const int j = test_comp;
  const double shear = mu * ((i == j ? gs.dot(gt) : 0.0) + gs[j] * gt[i]);
  const double bulk = (lambda - 2.0 * mu / 3.0) * (gs[i] * gt[j]);  // grouped so the matrix is exactly symmetric
  return geom.area * (shear + bulk);
}

SparseMatrix assemble_viscous(const Mesh& mesh, double mu, double lambda) {
  Triplets triplets;
  triplets.reserve(36 * static_cast<size_t>(mesh.num_elements()));
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementGeometry g = element_geometry(mesh, k);
    for (int t = 0; t < 3; ++t) {
      for (int j = 0; j < 2; ++j) {
        for (int s = 0; s < 3; ++s) {
          for (int i = 0; i < 2; ++i) {
            triplets.emplace_back(vector_dof(g.faces[t], j), vector_dof(g.faces[s], i),
                                  viscous_entry(g, t, j, s, i, mu, lambda));
          }
        }
      }
    }
  }
  const int n = 2 * mesh.num_faces();
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

struct LinearSolver::Impl {
  Eigen::KLU<SparseMatrix> lu;
  std::vector<int> outer;
  std::vector<int> inner;
  bool analyzed = false;

  bool same_pattern(const SparseMatrix& m) const {
    if (!analyzed) return false;
    const auto no = static_cast<size_t>(m.outerSize() + 1);
    const auto ni = static_cast<size_t>(m.nonZeros());
    return outer.size() == no && inner.size() == ni &&
           std::equal(outer.begin(), outer.end(), m.outerIndexPtr()) &&
           std::equal(inner.begin(), inner.end(), m.innerIndexPtr());
  }
};

LinearSolver::LinearSolver() : impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Eigen::VectorXd LinearSolver::solve(const SparseSystem& system, const char* what) {
  SparseMatrix copy;
  const SparseMatrix* ap = &system.matrix;
  if (!system.matrix.isCompressed()) {
    copy = system.matrix;
    copy.makeCompressed();
    ap = &copy;
  }
  const SparseMatrix& a = *ap;
  if (!impl_->same_pattern(a)) {
    impl_->lu.analyzePattern(a);
    impl_->outer.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1);
    impl_->inner.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
    impl_->analyzed = true;
  }
  impl_->lu.factorize(a);
  if (impl_->lu.info() != Eigen::Success) {
    throw SolverError(std::string(what) + ": sparse LU factorization failed (status " +
                      std::to_string(impl_->lu.kluCommon().status) + ")");
  }
  Eigen::VectorXd x = impl_->lu.solve(system.rhs);
  const Eigen::VectorXd r = a * x - system.rhs;
  double norm_a = 0.0;
  for (int c = 0; c < a.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) norm_a = std::max(norm_a, std::abs(it.value()));
  }
  const double scale = norm_a * x.cwiseAbs().maxCoeff() + system.rhs.cwiseAbs().maxCoeff();
  last_residual_ = scale > 0.0 ? r.cwiseAbs().maxCoeff() / scale : r.cwiseAbs().maxCoeff();
  if (!std::isfinite(last_residual_) || last_residual_ > 1e-10) {
    throw SolverError(std::string(what) + ": linear solve residual " + std::to_string(last_residual_) +
                      " exceeds 1e-10");
  }
  return x;
}

}  // namespace cavpend
