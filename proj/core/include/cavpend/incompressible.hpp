#pragma once

#include <memory>

#include "cavpend/coupling.hpp"
#include "cavpend/fem.hpp"
#include "cavpend/rigid.hpp"

namespace cavpend {

/// Constant-density fluid: velocity plus zero-mean pressure.
struct IncompressibleState {
  CRField u;
  P0Field p;
  double rho_c = 1.0;
};

struct IncompressibleStepResult {
  IncompressibleState fluid;
  BodyState body;
};

/// Saddle-point system in (interior velocity dofs, omega_next, pressure, mean
/// multiplier). Exposed for tests; `g_half` is the midpoint gravity.
SparseSystem assemble_incompressible(const IncompressibleState& state, const BodyState& body, const Vec2& g_half,
                                     const BodyGeometry& geometry, double mu, double lambda, const Mesh& mesh,
                                     double dt);

/// One step: gravity_step, then the coupled Stokes-type solve with
/// elementwise div u = 0 and zero-mean pressure.
IncompressibleStepResult incompressible_step(const IncompressibleState& state, const BodyState& body,
                                             const BodyGeometry& geometry, double mu, double lambda,
                                             const Mesh& mesh, double dt, LinearSolver* solver = nullptr);

/// I w^2/2 + rho_c/2 int |u|^2 - (body first moment + rho_c int x) . g.
double incompressible_energy(const IncompressibleState& state, const BodyState& body, const BodyGeometry& geometry,
                             const Mesh& mesh);

/// Stateful stepper keeping the symbolic factorization between steps.
class IncompressibleSolver {
 public:
  IncompressibleSolver(std::shared_ptr<const Mesh> mesh, BodyGeometry geometry, double mu, double lambda);

  IncompressibleStepResult step(const IncompressibleState& state, const BodyState& body, double dt);

  const Mesh& mesh() const { return *mesh_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  BodyGeometry geometry_;
  double mu_;
  double lambda_;
  CoupledDiscretization discretization_;
  LinearSolver solver_;
};

}  // namespace cavpend
