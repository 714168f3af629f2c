#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "cavpend/mesh.hpp"

namespace cavpend {

/// Piecewise-constant field, one value per triangle.
struct P0Field {
  std::vector<double> values;

  P0Field() = default;
  explicit P0Field(const Mesh& mesh, double value = 0.0) : values(mesh.num_elements(), value) {}
  explicit P0Field(std::vector<double> v) : values(std::move(v)) {}

  double& operator[](int k) { return values[k]; }
  double operator[](int k) const { return values[k]; }
  int size() const { return static_cast<int>(values.size()); }
};

/// Vector Crouzeix-Raviart field: one face-mean 2-vector per face.
struct CRField {
  std::vector<Vec2> dof;

  CRField() = default;
  explicit CRField(const Mesh& mesh) : dof(mesh.num_faces(), Vec2::Zero()) {}

  Vec2& operator[](int f) { return dof[f]; }
  const Vec2& operator[](int f) const { return dof[f]; }
  int size() const { return static_cast<int>(dof.size()); }
};

/// Scalar Crouzeix-Raviart field.
struct CRScalarField {
  std::vector<double> dof;

  CRScalarField() = default;
  explicit CRScalarField(const Mesh& mesh) : dof(mesh.num_faces(), 0.0) {}

  int size() const { return static_cast<int>(dof.size()); }
};

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
};

/// e3 x x in the plane: (-x2, x1).
inline Vec2 rot90(const Vec2& x) { return {-x.y(), x.x()}; }
/// e3 . (a x b) in the plane.
inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Per-element quantities the assembly kernels share.
struct ElementGeometry {
  double area = 0.0;
  std::array<int, 3> faces{};
  std::array<Vec2, 3> midpoints{};
  /// Gradient of the CR basis function attached to local face i: |s_i| n_i / |K|.
  std::array<Vec2, 3> basis_gradients{};
};

ElementGeometry element_geometry(const Mesh& mesh, int element);
std::vector<ElementGeometry> element_geometries(const Mesh& mesh);

// ---- quadrature -------------------------------------------------------------

/// Edge-midpoint rule, exact to degree 2: |K|/3 * sum of f at the three edge midpoints.
double integrate_midpoint(const Mesh& mesh, int element, const std::function<double(const Vec2&)>& f);

struct QuadraturePoint {
  Vec2 point;
  double weight;  // absolute (already scaled by the element area)
};

/// 7-point symmetric rule exact to degree 5, for post-processing integrals
/// where the integrand is not polynomial.
std::array<QuadraturePoint, 7> degree5_rule(const Mesh& mesh, int element);

/// Face flux of a CR field: |s| w_s . n_s with n_s the stored face normal.
double face_flux(const Mesh& mesh, const CRField& w, int face);

// ---- interpolation and gradients -------------------------------------------

/// CR interpolant: each face dof is the midpoint value of `f`, which equals the
/// face mean for affine fields.
CRField cr_interpolate(const std::function<Vec2(const Vec2&)>& f, const Mesh& mesh);
CRScalarField cr_interpolate_scalar(const std::function<double(const Vec2&)>& f, const Mesh& mesh);

/// Value of a CR field at a point inside `element` (affine representative).
Vec2 cr_evaluate(const CRField& u, const Mesh& mesh, int element, const Vec2& x);

/// Constant gradient per element, G(a, b) = d u_a / d x_b.
std::vector<Mat2> elem_gradient(const CRField& u, const Mesh& mesh);
std::vector<Vec2> elem_gradient(const CRScalarField& u, const Mesh& mesh);

/// Elementwise integral of div u, via the face fluxes of the element.
std::vector<double> elem_divergence_integral(const CRField& u, const Mesh& mesh);

// ---- assembly ----------------------------------------------------------------

/// Global index of component `comp` of face `face` in interleaved numbering.
inline int vector_dof(int face, int comp) { return 2 * face + comp; }

/// Element viscous stiffness entry: integral over K of S(phi_s e_i) : grad(phi_t e_j)
/// with S(u) = 2 mu D(u) + (lambda - 2 mu / 3) I div u.
double viscous_entry(const ElementGeometry& geom, int test_local, int test_comp, int trial_local,
                     int trial_comp, double mu, double lambda);

/// Global viscous matrix over all 2*num_faces vector dofs:
/// a^T M b = sum_K int_K S(a) : grad b.
SparseMatrix assemble_viscous(const Mesh& mesh, double mu, double lambda);

/// Direct sparse LU. Caches the symbolic analysis while the sparsity pattern
/// is unchanged between calls.
class LinearSolver {
 public:
  LinearSolver();
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  /// Solves and checks the relative residual; throws SolverError with the
  /// residual on failure.
  Eigen::VectorXd solve(const SparseSystem& system, const char* what);

  double last_relative_residual() const { return last_residual_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double last_residual_ = 0.0;
};

}  // namespace cavpend
