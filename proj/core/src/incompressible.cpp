#include "cavpend/incompressible.hpp"

#include "cavpend/errors.hpp"

namespace cavpend {

namespace {

SparseSystem assemble(const IncompressibleState& state, const BodyState& body, const Vec2& g_half,
                      const BodyGeometry& geometry, double mu, double lambda, const Mesh& mesh, double dt,
                      const CoupledDiscretization& disc) {
  const VelocityDofLayout& layout = disc.layout;
  const int nt = mesh.num_elements();
  const int w_col = layout.omega_index();
  const int p0 = w_col + 1;
  const int mean_row = p0 + nt;
  const int n = mean_row + 1;

  SparseSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(n);
  Triplets triplets;
  triplets.reserve(60 * static_cast<size_t>(nt));

  const std::vector<double> rho(nt, state.rho_c);
  const CoupledRowInputs rows{mesh,   disc.geometry, layout, rho, rho, state.u, body.omega, g_half, mu, lambda,
                              dt,     body_inertia(geometry), geometry.first_moment()};
  assemble_coupled_rows(rows, triplets, sys.rhs);

  for (int k = 0; k < nt; ++k) {
    const ElementGeometry& g = disc.geometry[k];
    const int pk = p0 + k;
    for (int s = 0; s < 3; ++s) {
      const int idx = layout.interior_index[g.faces[s]];
      for (int i = 0; i < 2; ++i) {
        // -int p div phi and -int q div u: the same coefficient, transposed.
        const double c = -g.area * g.basis_gradients[s][i];
        if (idx >= 0) {
          triplets.emplace_back(2 * idx + i, pk, c);
          triplets.emplace_back(pk, 2 * idx + i, c);
        } else {
          triplets.emplace_back(pk, w_col, c * layout.rigid_trace[g.faces[s]][i]);
        }
      }
    }
    triplets.emplace_back(pk, mean_row, g.area);
    triplets.emplace_back(mean_row, pk, g.area);
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

IncompressibleStepResult solve(const IncompressibleState& state, const BodyState& body,
                               const BodyGeometry& geometry, double mu, double lambda, const Mesh& mesh,
                               double dt, const CoupledDiscretization& disc, LinearSolver& solver) {
  if (!(dt > 0.0)) throw InvalidParameter("time step must be positive");
  const Vec2 g_next = gravity_step(body.gravity, body.omega, dt);
  const Vec2 g_half = 0.5 * (body.gravity + g_next);
  const SparseSystem sys = assemble(state, body, g_half, geometry, mu, lambda, mesh, dt, disc);
  const Eigen::VectorXd x = solver.solve(sys, "incompressible saddle system");

  const int w_col = disc.layout.omega_index();
  IncompressibleStepResult r;
  r.fluid.rho_c = state.rho_c;
  r.fluid.u = unpack_velocity(x, disc.layout, mesh);
  r.fluid.p = P0Field(std::vector<double>(x.data() + w_col + 1, x.data() + w_col + 1 + mesh.num_elements()));
  r.body.omega = x[w_col];
  r.body.gravity = g_next;
  r.body.theta = theta_from_g(g_next, body.theta);
  return r;
}

}  // namespace

SparseSystem assemble_incompressible(const IncompressibleState& state, const BodyState& body, const Vec2& g_half,
                                     const BodyGeometry& geometry, double mu, double lambda, const Mesh& mesh,
                                     double dt) {
  const CoupledDiscretization disc(mesh);
  return assemble(state, body, g_half, geometry, mu, lambda, mesh, dt, disc);
}

IncompressibleStepResult incompressible_step(const IncompressibleState& state, const BodyState& body,
                                             const BodyGeometry& geometry, double mu, double lambda,
                                             const Mesh& mesh, double dt, LinearSolver* solver) {
  const CoupledDiscretization disc(mesh);
  LinearSolver local;
  return solve(state, body, geometry, mu, lambda, mesh, dt, disc, solver ? *solver : local);
}

double incompressible_energy(const IncompressibleState& state, const BodyState& body, const BodyGeometry& geometry,
                             const Mesh& mesh) {
  double kinetic = 0.5 * body_inertia(geometry) * body.omega * body.omega;
  Vec2 first_moment = geometry.first_moment();
  for (int k = 0; k < mesh.num_elements(); ++k) {
    double u2 = 0.0;
    for (int i = 0; i < 3; ++i) u2 += state.u[mesh.element_face(k, i)].squaredNorm();
    kinetic += 0.5 * state.rho_c * mesh.area(k) / 3.0 * u2;
    first_moment += state.rho_c * mesh.area(k) * mesh.centroid(k);
  }
  return kinetic - first_moment.dot(body.gravity);
}

IncompressibleSolver::IncompressibleSolver(std::shared_ptr<const Mesh> mesh, BodyGeometry geometry, double mu,
                                           double lambda)
    : mesh_(std::move(mesh)), geometry_(geometry), mu_(mu), lambda_(lambda), discretization_(*mesh_) {
  geometry_.validate();
  if (!(mu > 0.0)) throw InvalidParameter("shear viscosity mu must be positive");
  if (!(lambda >= 0.0)) throw InvalidParameter("bulk viscosity lambda must be non-negative");
}

IncompressibleStepResult IncompressibleSolver::step(const IncompressibleState& state, const BodyState& body,
                                                    double dt) {
  return solve(state, body, geometry_, mu_, lambda_, *mesh_, dt, discretization_, solver_);
}

}  // namespace cavpend
