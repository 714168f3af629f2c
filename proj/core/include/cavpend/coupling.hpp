#pragma once

#include <span>
#include <vector>

#include "cavpend/fem.hpp"
#include "cavpend/rigid.hpp"

namespace cavpend {

/// Unknown numbering for the coupled velocity / angular-velocity solve.
///
/// Interior face f contributes unknowns 2*interior_index[f] + {0, 1}; the
/// angular velocity is the last velocity-block unknown `omega_index()`.
/// Boundary faces carry no unknowns: their dof is omega * rigid_trace[f].
struct VelocityDofLayout {
  std::vector<int> interior_index;  // -1 on boundary faces
  std::vector<int> interior_faces;
  std::vector<Vec2> rigid_trace;    // face mean of e3 x x
  int num_interior = 0;

  explicit VelocityDofLayout(const Mesh& mesh);
  VelocityDofLayout() = default;

  int velocity_unknowns() const { return 2 * num_interior; }
  int omega_index() const { return 2 * num_interior; }
};

/// Mesh-derived data reused by every coupled solve on one mesh.
struct CoupledDiscretization {
  std::vector<ElementGeometry> geometry;
  VelocityDofLayout layout;

  explicit CoupledDiscretization(const Mesh& mesh) : geometry(element_geometries(mesh)), layout(mesh) {}
};

/// Rigid-rotation field omega e3 x x, exact in CR.
CRField rigid_rotation(const Mesh& mesh, double omega);

/// v = u - omega e3 x x.
CRField relative_velocity(const CRField& u, double omega, const Mesh& mesh);

/// Inputs shared by the compressible and incompressible momentum /
/// angular-momentum rows.
struct CoupledRowInputs {
  const Mesh& mesh;
  const std::vector<ElementGeometry>& geometry;
  const VelocityDofLayout& layout;
  std::span<const double> rho_next;  // per element
  std::span<const double> rho_prev;  // per element
  const CRField& u_prev;
  double omega_prev;
  Vec2 g_half;
  double mu;
  double lambda;
  double dt;
  double inertia;
  Vec2 body_first_moment;
};

/// Appends the momentum rows (tested against interior CR basis functions)
/// and the angular-momentum row to `triplets` / `rhs`. Every structural
/// entry is emitted even when zero, so the sparsity pattern is fixed for a
/// given mesh. Pressure contributions are left to the caller.
void assemble_coupled_rows(const CoupledRowInputs& in, Triplets& triplets, Eigen::VectorXd& rhs);

/// Scatters a solution vector back into a full CR field (boundary dofs from omega).
CRField unpack_velocity(const Eigen::VectorXd& x, const VelocityDofLayout& layout, const Mesh& mesh);

}  // namespace cavpend
