#pragma once

#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cavpend/fem.hpp"
#include "cavpend/gas.hpp"
#include "cavpend/mesh.hpp"

namespace cavpend {

using Vec3 = Eigen::Vector3d;

/// Axis-aligned box in 2 or 3 dimensions.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dims() const { return static_cast<int>(lo.size()); }
};

/// Integrals of the hydrostatic profile over a cavity.
struct ProfileIntegrals {
  double mass = 0.0;
  Vec3 first_moment = Vec3::Zero();
  /// int [P(rho) - P'(rho_bar)(rho - rho_bar) - P(rho_bar)].
  double pressure_potential = 0.0;
};

/// Fluid cavity holding a fixed total mass. Mesh cavities are integrated with
/// a degree-5 triangle rule; box cavities in closed form.
class Cavity {
 public:
  static Cavity from_mesh(std::shared_ptr<const Mesh> mesh, double mass);
  static Cavity from_box(Box box, double mass);

  double mass() const { return mass_; }
  double volume() const { return volume_; }
  double mean_density() const { return mass_ / volume_; }
  int dims() const;
  bool is_box() const { return box_.has_value(); }
  const Mesh* mesh() const { return mesh_.get(); }

  /// max over the cavity of x . direction.
  double max_projection(const Vec3& direction) const;
  /// max over the cavity of |x|.
  double max_radius() const;

  /// Mass of [k x.g + c]_+^(1/(gamma-1)) with k = (gamma-1)/(a gamma).
  double profile_mass(const Vec3& g, double c, const GasParams& gas) const;
  ProfileIntegrals profile_integrals(const Vec3& g, double c, const GasParams& gas) const;

 private:
  Cavity() = default;

  std::shared_ptr<const Mesh> mesh_;
  std::optional<Box> box_;
  double mass_ = 0.0;
  double volume_ = 0.0;
};

struct SteadyState {
  Vec3 g = Vec3::Zero();
  double c = 0.0;
  double d = 0.0;
  double alpha = 0.0;
  double energy = 0.0;
};

/// rho(x) = [((gamma-1)/(a gamma)) x.g + c]_+^(1/(gamma-1)).
double density_profile(const Vec3& g, double c, const GasParams& gas, const Vec3& x);

/// The c for which the profile carries `mass`, by bisection to a relative
/// mass error below 1e-12. Throws InvalidParameter for mass <= 0.
double solve_c(const Vec3& g, double mass, const Cavity& cavity, const GasParams& gas);
inline double solve_c(const Vec3& g, const Cavity& cavity, const GasParams& gas) {
  return solve_c(g, cavity.mass(), cavity, gas);
}

/// In-plane part of the profile's first moment (third component zeroed).
Vec3 Pi(const Vec3& g, double c, const Cavity& cavity, const GasParams& gas);

/// Gravity direction at orientation alpha: |g0| (cos alpha, sin alpha, 0).
Vec3 gravity_at(double alpha, double g_norm);

/// e3 . (g x (Pi(g) + l)) at g = gravity_at(alpha, g_norm); zero exactly at equilibria.
double equilibrium_residual(double alpha, const Cavity& cavity, const Vec3& body_moment, const GasParams& gas,
                            double g_norm);

/// Total energy of the rest state (rho_s, 0, 0, g): pressure potential minus
/// (l + int rho_s x) . g.
double steady_energy(const SteadyState& state, const Cavity& cavity, const Vec3& body_moment, const GasParams& gas);

/// The same energy functional evaluated for a piecewise-constant density on a
/// mesh cavity (the solver's discrete representation).
double steady_energy_p0(const P0Field& rho, const Vec2& g, const Mesh& mesh, const Vec2& body_moment,
                        const GasParams& gas);

/// Completes a steady state at orientation alpha: c, d = (Pi + l).g/|g|^2, energy.
SteadyState steady_state_at(double alpha, const Cavity& cavity, const Vec3& body_moment, const GasParams& gas,
                            double g_norm);

struct EquilibriumReport {
  std::vector<SteadyState> states;
  /// Residual vanishes on the whole scan (continuum of equilibria); `states` is empty.
  bool degenerate = false;
  double max_abs_residual = 0.0;
};

/// Scans alpha on a uniform grid of n_scan points, bisects every sign change
/// to |residual| <= 1e-11 and deduplicates roots closer than 1e-8 rad.
EquilibriumReport find_equilibria(const Cavity& cavity, const Vec3& body_moment, const GasParams& gas,
                                  double g_norm, int n_scan = 360);

struct MinimizerSelection {
  SteadyState state;
  std::size_t index = 0;
  /// Another state lies within 1e-12 of the minimal energy.
  bool tie = false;
};

MinimizerSelection select_minimizer(const std::vector<SteadyState>& states);

/// Numerical check of the uniqueness hypotheses: Lipschitz bound delta1 of
/// Pi sampled over grid pairs, min |d| over the roots, and min <Pi(g), l>.
struct UniquenessDiagnostic {
  double delta1 = 0.0;
  double min_abs_d = 0.0;
  double min_pi_dot_l = 0.0;
  /// min |d| > 2 delta1 and <Pi, l> > 0 everywhere on the sample.
  bool hypotheses_hold = false;
};

UniquenessDiagnostic uniqueness_diagnostic(const Cavity& cavity, const Vec3& body_moment, const GasParams& gas,
                                           double g_norm, const std::vector<SteadyState>& roots, int samples = 72);

/// Center of mass of body plus steady fluid, (l + int rho_s x) / (m_B + M).
Vec3 system_center_of_mass(const SteadyState& state, const Cavity& cavity, const Vec3& body_moment,
                           double body_mass, const GasParams& gas);

/// Element averages of the steady profile on a mesh cavity.
P0Field project_profile(const Vec3& g, double c, const GasParams& gas, const Mesh& mesh);

}  // namespace cavpend
