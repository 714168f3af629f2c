#pragma once

#include <memory>

#include "cavpend/coupling.hpp"
#include "cavpend/fem.hpp"
#include "cavpend/gas.hpp"
#include "cavpend/rigid.hpp"

namespace cavpend {

struct FluidState {
  P0Field rho;  // density per element
  CRField u;    // body-frame velocity, boundary dofs equal omega e3 x x
};

struct CoupledState {
  FluidState fluid;
  BodyState body;
  double time = 0.0;
  long step = 0;
};

/// Projection of the initial data: constant density `rho0`, rigid velocity
/// omega0 e3 x x (zero for omega0 = 0), gravity (cos theta0, sin theta0).
CoupledState initial_state(const Mesh& mesh, double rho0, double theta0, double omega0);

/// Implicit upwind transport of the density by a frozen velocity:
/// |K| (rho_K - rho_prev_K)/dt + sum_faces F_s rho_up = 0, F_s = |s| v_s . n.
/// Boundary fluxes are taken as exactly zero. Throws SolverError if the
/// solve fails or a non-positive density appears.
P0Field continuity_step(const P0Field& rho_prev, const CRField& v_prev, const Mesh& mesh, double dt,
                        LinearSolver* solver = nullptr);

/// Assembly of the continuity matrix and right-hand side (exposed for tests).
SparseSystem assemble_continuity(const P0Field& rho_prev, const CRField& v_prev, const Mesh& mesh, double dt);

struct MomentumInputs {
  const P0Field& rho_next;
  const P0Field& rho_prev;
  const CRField& u_prev;
  double omega_prev;
  Vec2 g_half;
  double dt;
};

struct MomentumResult {
  CRField u;
  double omega = 0.0;
};

/// Coupled momentum / angular-momentum system in (interior velocity dofs, omega_next).
SparseSystem assemble_momentum_angular(const MomentumInputs& in, const BodyGeometry& geometry, const GasParams& gas,
                                       const Mesh& mesh);

MomentumResult momentum_angular_step(const MomentumInputs& in, const BodyGeometry& geometry, const GasParams& gas,
                                     const Mesh& mesh, LinearSolver* solver = nullptr);

/// Total energy: I w^2/2 + 1/2 int rho |u|^2 + int [P(rho) - P'(rho_bar)(rho - rho_bar) - P(rho_bar)]
/// - (body first moment + int rho x) . g.
double discrete_energy(const CoupledState& state, const BodyGeometry& geometry, const GasParams& gas,
                       const Mesh& mesh);

double total_mass(const P0Field& rho, const Mesh& mesh);

/// Stateful stepper. Caches element geometry, the dof layout and the
/// symbolic factorizations across steps; one instance per simulation.
class CompressibleSolver {
 public:
  CompressibleSolver(std::shared_ptr<const Mesh> mesh, BodyGeometry geometry, GasParams gas);

  /// gravity_step, then continuity_step with v_prev = u_prev - omega_prev e3 x x,
  /// then momentum_angular_step. Advances time by dt.
  CoupledState step(const CoupledState& state, double dt);

  const Mesh& mesh() const { return *mesh_; }
  const BodyGeometry& geometry() const { return geometry_; }
  const GasParams& gas() const { return gas_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  BodyGeometry geometry_;
  GasParams gas_;
  CoupledDiscretization discretization_;
  LinearSolver continuity_solver_;
  LinearSolver momentum_solver_;
};

/// Convenience single step with a throwaway solver.
CoupledState step(const CoupledState& state, const BodyGeometry& geometry, const GasParams& gas,
                  const std::shared_ptr<const Mesh>& mesh, double dt);

}  // namespace cavpend
