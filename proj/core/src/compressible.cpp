#include "cavpend/compressible.hpp"

#include <cmath>
#include <sstream>

#include "cavpend/errors.hpp"

namespace cavpend {

void GasParams::validate() const {
  if (!(a > 0.0)) throw InvalidParameter("gas parameter a must be positive");
  if (!(gamma > 1.0)) throw InvalidParameter("adiabatic exponent gamma must exceed 1");
  if (!(mu > 0.0)) throw InvalidParameter("shear viscosity mu must be positive");
  if (!(lambda >= 0.0)) throw InvalidParameter("bulk viscosity lambda must be non-negative");
}

CoupledState initial_state(const Mesh& mesh, double rho0, double theta0, double omega0) {
  if (!(rho0 > 0.0)) throw InvalidParameter("initial density must be positive");
  CoupledState s;
  s.fluid.rho = P0Field(mesh, rho0);
  s.fluid.u = rigid_rotation(mesh, omega0);
  s.body.omega = omega0;
  s.body.gravity = gravity_from_theta(theta0);
  s.body.theta = theta0;
  return s;
}

double total_mass(const P0Field& rho, const Mesh& mesh) {
  double m = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) m += mesh.area(k) * rho[k];
  return m;
}

SparseSystem assemble_continuity(const P0Field& rho_prev, const CRField& v_prev, const Mesh& mesh, double dt) {
  const int n = mesh.num_elements();
  Triplets triplets;
  triplets.reserve(n + 4 * static_cast<size_t>(mesh.num_faces()));
  SparseSystem sys;
  sys.rhs.resize(n);
  for (int k = 0; k < n; ++k) {
    triplets.emplace_back(k, k, mesh.area(k) / dt);
    sys.rhs[k] = mesh.area(k) / dt * rho_prev[k];
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces()[f];
    if (face.boundary) continue;
    const int k = face.elements[0];
    const int l = face.elements[1];
    const double flux = face_flux(mesh, v_prev, f);  // out of k
    const double out_k = std::max(flux, 0.0);
    const double out_l = std::max(-flux, 0.0);
    // Outflow leaves with the density of the donor element.
    triplets.emplace_back(k, k, out_k);
    triplets.emplace_back(l, k, -out_k);
    triplets.emplace_back(l, l, out_l);
    triplets.emplace_back(k, l, -out_l);
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

P0Field continuity_step(const P0Field& rho_prev, const CRField& v_prev, const Mesh& mesh, double dt,
                        LinearSolver* solver) {
  if (!(dt > 0.0)) throw InvalidParameter("time step must be positive");
  const SparseSystem sys = assemble_continuity(rho_prev, v_prev, mesh, dt);
  LinearSolver local;
  LinearSolver& s = solver ? *solver : local;
  const Eigen::VectorXd x = s.solve(sys, "continuity");
  P0Field rho(std::vector<double>(x.data(), x.data() + x.size()));
  for (int k = 0; k < rho.size(); ++k) {
    if (!(rho[k] > 0.0)) {
      std::ostringstream msg;
      msg << "continuity: non-positive density " << rho[k] << " in element " << k;
      throw SolverError(msg.str());
    }
  }
  return rho;
}

namespace {

SparseSystem assemble_momentum(const MomentumInputs& in, const BodyGeometry& body, const GasParams& gas,
                               const Mesh& mesh, const CoupledDiscretization& cache) {
  const int n = cache.layout.velocity_unknowns() + 1;
  SparseSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(n);
  Triplets triplets;
  triplets.reserve(40 * static_cast<size_t>(mesh.num_elements()));

  const CoupledRowInputs rows{mesh,
                              cache.geometry,
                              cache.layout,
                              in.rho_next.values,
                              in.rho_prev.values,
                              in.u_prev,
                              in.omega_prev,
                              in.g_half,
                              gas.mu,
                              gas.lambda,
                              in.dt,
                              body_inertia(body),
                              body.first_moment()};
  assemble_coupled_rows(rows, triplets, sys.rhs);

  // - int p(rho_next) div phi moves to the right-hand side.
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const ElementGeometry& g = cache.geometry[k];
    const double p = gas.pressure(in.rho_next[k]);
    for (int t = 0; t < 3; ++t) {
      const int idx = cache.layout.interior_index[g.faces[t]];
      if (idx < 0) continue;
      for (int j = 0; j < 2; ++j) sys.rhs[2 * idx + j] += p * g.area * g.basis_gradients[t][j];
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

MomentumResult solve_momentum(const MomentumInputs& in, const BodyGeometry& body, const GasParams& gas,
                              const Mesh& mesh, const CoupledDiscretization& cache, LinearSolver& solver) {
  const SparseSystem sys = assemble_momentum(in, body, gas, mesh, cache);
  const Eigen::VectorXd x = solver.solve(sys, "momentum/angular");
  MomentumResult r;
  r.omega = x[cache.layout.omega_index()];
  r.u = unpack_velocity(x, cache.layout, mesh);
  return r;
}

}  // namespace

SparseSystem assemble_momentum_angular(const MomentumInputs& in, const BodyGeometry& geometry, const GasParams& gas,
                                       const Mesh& mesh) {
  const CoupledDiscretization cache(mesh);
  return assemble_momentum(in, geometry, gas, mesh, cache);
}

MomentumResult momentum_angular_step(const MomentumInputs& in, const BodyGeometry& geometry, const GasParams& gas,
                                     const Mesh& mesh, LinearSolver* solver) {
  const CoupledDiscretization cache(mesh);
  LinearSolver local;
  return solve_momentum(in, geometry, gas, mesh, cache, solver ? *solver : local);
}

double discrete_energy(const CoupledState& state, const BodyGeometry& geometry, const GasParams& gas,
                       const Mesh& mesh) {
  const P0Field& rho = state.fluid.rho;
  const double rho_bar = total_mass(rho, mesh) / mesh.total_area();
  const double p_bar = gas.potential(rho_bar);
  const double dp_bar = gas.potential_derivative(rho_bar);

  const double omega = state.body.omega;
  double kinetic = 0.5 * body_inertia(geometry) * omega * omega;
  double internal = 0.0;
  Vec2 first_moment = geometry.first_moment();
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const double area = mesh.area(k);
    double u2 = 0.0;
    for (int i = 0; i < 3; ++i) u2 += state.fluid.u[mesh.element_face(k, i)].squaredNorm();
    kinetic += 0.5 * rho[k] * area / 3.0 * u2;
    internal += area * (gas.potential(rho[k]) - dp_bar * (rho[k] - rho_bar) - p_bar);
    first_moment += rho[k] * area * mesh.centroid(k);
  }
  return kinetic + internal - first_moment.dot(state.body.gravity);
}

CompressibleSolver::CompressibleSolver(std::shared_ptr<const Mesh> mesh, BodyGeometry geometry, GasParams gas)
    : mesh_(std::move(mesh)), geometry_(geometry), gas_(gas), discretization_(*mesh_) {
  geometry_.validate();
  gas_.validate();
}

CoupledState CompressibleSolver::step(const CoupledState& state, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("time step must be positive");
  const Mesh& mesh = *mesh_;
  const BodyState& body = state.body;

  const Vec2 g_next = gravity_step(body.gravity, body.omega, dt);
  const Vec2 g_half = 0.5 * (body.gravity + g_next);

  const CRField v_prev = relative_velocity(state.fluid.u, body.omega, mesh);
  P0Field rho_next = continuity_step(state.fluid.rho, v_prev, mesh, dt, &continuity_solver_);

  const MomentumInputs in{rho_next, state.fluid.rho, state.fluid.u, body.omega, g_half, dt};
  MomentumResult m = solve_momentum(in, geometry_, gas_, mesh, discretization_, momentum_solver_);

  CoupledState next;
  next.fluid.rho = std::move(rho_next);
  next.fluid.u = std::move(m.u);
  next.body.omega = m.omega;
  next.body.gravity = g_next;
  next.body.theta = theta_from_g(g_next, body.theta);
  next.time = state.time + dt;
  next.step = state.step + 1;
  return next;
}

CoupledState step(const CoupledState& state, const BodyGeometry& geometry, const GasParams& gas,
                  const std::shared_ptr<const Mesh>& mesh, double dt) {
  CompressibleSolver solver(mesh, geometry, gas);
  return solver.step(state, dt);
}

}  // namespace cavpend
