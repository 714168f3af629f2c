#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "cavpend/errors.hpp"
#include "cavpend/mesh.hpp"
#include "cavpend/rigid.hpp"
#include "cavpend/steady.hpp"

using namespace cavpend;

namespace {

constexpr double kPi = std::numbers::pi;

GasParams cube_gas() {
  GasParams gas;
  gas.gamma = 2.0;
  gas.a = 0.5;
  return gas;
}

Cavity cube(double mass = 8.0) { return Cavity::from_box({{-1, -1, -1}, {1, 1, 1}}, mass); }

struct DiskSystem {
  std::shared_ptr<const Mesh> mesh;
  Cavity cavity;
  Vec3 l;
  BodyGeometry body;
};

DiskSystem disk_system(double h = 0.02) {
  BodyGeometry body;
  auto mesh = std::make_shared<const Mesh>(generate_disk_mesh(body.cavity_center(), body.inner_radius, h));
  const double mass = mesh->total_area();  // unit mean density
  const Vec2 l2 = body.first_moment();
  return {mesh, Cavity::from_mesh(mesh, mass), Vec3(l2.x(), l2.y(), 0.0), body};
}

// Independent brute-force integral over a 2D box: composite Gauss-Legendre
// on a fine tensor grid. Used only as an oracle for the closed forms.
double brute_box_moment(const Box& box, const Vec3& g, double c, const GasParams& gas, int weight) {
  const int n = 400;
  const double k = gas.profile_coefficient();
  const double p = 1.0 / (gas.gamma - 1.0);
  const double gl[2] = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
  const double hx = (box.hi[0] - box.lo[0]) / n, hy = (box.hi[1] - box.lo[1]) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (double a : gl)
        for (double b : gl) {
          const double x = box.lo[0] + (i + 0.5 + 0.5 * a) * hx;
          const double y = box.lo[1] + (j + 0.5 + 0.5 * b) * hy;
          const double br = k * (x * g.x() + y * g.y()) + c;
          if (br <= 0.0) continue;
          const double w = weight < 0 ? 1.0 : (weight == 0 ? x : y);
          sum += 0.25 * hx * hy * w * std::pow(br, p);
        }
  return sum;
}

}  // namespace

TEST(DensityProfile, CubeGasIsLinear) {
  const GasParams gas = cube_gas();
  EXPECT_DOUBLE_EQ(gas.profile_coefficient(), 1.0);
  const Vec3 g(1, 0, 0);
  EXPECT_NEAR(density_profile(g, 1.0, gas, {0.3, 0.2, -0.1}), 1.3, 1e-15);
  EXPECT_EQ(density_profile(g, 1.0, gas, {-1.5, 0.0, 0.0}), 0.0);
}

TEST(DensityProfile, CutoffAndZeroGravity) {
  const GasParams gas;
  const Vec3 g(0.6, 0.8, 0);
  const Cavity c = cube(1.0);
  const double cut = -c.max_projection(gas.profile_coefficient() * g);
  EXPECT_EQ(c.profile_mass(g, cut, gas), 0.0);
  EXPECT_EQ(c.profile_mass(g, cut - 1.0, gas), 0.0);
  EXPECT_NEAR(density_profile(Vec3::Zero(), 0.8, gas, {0.1, 0.2, 0}), std::pow(0.8, 1.5), 1e-15);
}

TEST(SolveC, CubeMassEightGivesOne) {
  const Vec3 g(1, 0, 0);
  EXPECT_NEAR(cube().profile_mass(g, 1.0, cube_gas()), 8.0, 1e-14);
  EXPECT_NEAR(solve_c(g, cube(), cube_gas()), 1.0, 1e-12);
}

TEST(SolveC, CubeMassFourReading) {
  // (x1 + c)_+ over (-1,1)^3 with c < 1: 4 (1 + c)^2 / 2 = 4  =>  c = sqrt(2) - 1.
  EXPECT_NEAR(solve_c({1, 0, 0}, cube(4.0), cube_gas()), std::sqrt(2.0) - 1.0, 1e-12);
}

TEST(SolveC, MonotoneInMassAndVanishingLimit) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(0.05, 3.0);
  const GasParams gas;
  const Cavity box = Cavity::from_box({{-0.5, -0.2}, {0.7, 0.4}}, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double angle = U(rng) * 2.0;
    const Vec3 g(std::cos(angle), std::sin(angle), 0.0);
    const double m1 = U(rng), m2 = m1 + U(rng);
    EXPECT_LT(solve_c(g, m1, box, gas), solve_c(g, m2, box, gas));
  }
  // M -> 0: c approaches -max(k x.g) from above (the support shrinks to a corner).
  const Vec3 g(1, 0, 0);
  const double limit = -box.max_projection(gas.profile_coefficient() * g);
  const double c_small = solve_c(g, 1e-10, box, gas);
  EXPECT_GT(c_small, limit);
  EXPECT_LT(c_small - limit, 1e-4);
}

TEST(SolveC, MassResidualAndErrors) {
  const GasParams gas;
  const DiskSystem s = disk_system();
  const Vec3 g(std::cos(0.4), std::sin(0.4), 0.0);
  const double c = solve_c(g, s.cavity, gas);
  EXPECT_LT(std::abs(s.cavity.profile_mass(g, c, gas) - s.cavity.mass()) / s.cavity.mass(), 1e-12);
  EXPECT_THROW(solve_c(g, 0.0, s.cavity, gas), InvalidParameter);
  EXPECT_THROW(solve_c(g, -1.0, s.cavity, gas), InvalidParameter);
}

TEST(Pi, CubeValues) {
  const GasParams gas = cube_gas();
  const Vec3 l(1, 0, 0);
  const Vec3 p1 = Pi({1, 0, 0}, 1.0, cube(), gas);
  EXPECT_NEAR(p1.x(), 8.0 / 3.0, 1e-12);
  EXPECT_NEAR(p1.y(), 0.0, 1e-12);
  EXPECT_EQ(p1.z(), 0.0);
  const Vec3 p2 = Pi({-1, 0, 0}, 1.0, cube(), gas) + l;
  EXPECT_NEAR(p2.x(), -5.0 / 3.0, 1e-12);
  EXPECT_NEAR((Pi({1, 0, 0}, 1.0, cube(), gas) + l - Vec3(11.0 / 3.0, 0, 0)).norm(), 0.0, 1e-12);
}

TEST(Pi, BoxClosedFormAgreesWithBruteForce) {
  const GasParams gas;  // gamma = 5/3: non-polynomial profile
  const Box box{{-0.5, -0.2}, {0.7, 0.4}};
  const Cavity cav = Cavity::from_box(box, 1.0);
  for (double angle : {0.0, 0.3, 1.2, 2.5, -0.7, 1e-7}) {
    const Vec3 g = 40.0 * Vec3(std::cos(angle), std::sin(angle), 0.0);  // strong tilt: support cut off
    const double c = 0.5;
    const ProfileIntegrals ints = cav.profile_integrals(g, c, gas);
    EXPECT_NEAR(ints.mass, brute_box_moment(box, g, c, gas, -1), 2e-6) << angle;
    EXPECT_NEAR(ints.first_moment.x(), brute_box_moment(box, g, c, gas, 0), 2e-6) << angle;
    EXPECT_NEAR(ints.first_moment.y(), brute_box_moment(box, g, c, gas, 1), 2e-6) << angle;
  }
}

TEST(Pi, BoxClosedFormAgreesWithMeshQuadrature) {
  const GasParams gas;
  const Box box{{-0.5, -0.5}, {0.5, 0.5}};
  // Strong tilt so the support boundary crosses the box: the profile has a kink.
  const Vec3 g = 30.0 * Vec3(std::cos(0.8), std::sin(0.8), 0.0);
  const double c = 0.3;
  const ProfileIntegrals exact = Cavity::from_box(box, 1.0).profile_integrals(g, c, gas);
  double prev = 1.0;
  for (int n : {20, 40}) {
    auto mesh = std::make_shared<const Mesh>(generate_rectangle_mesh({-0.5, -0.5}, {0.5, 0.5}, n, n));
    const ProfileIntegrals q = Cavity::from_mesh(mesh, 1.0).profile_integrals(g, c, gas);
    const double err = std::abs(q.mass - exact.mass) + (q.first_moment - exact.first_moment).norm();
    EXPECT_LT(err, 1e-3);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Pi, SymmetricCavityAlignedGravity) {
  const GasParams gas;
  const DiskSystem s = disk_system();
  const Vec3 g(1, 0, 0);
  const Vec3 p = Pi(g, solve_c(g, s.cavity, gas), s.cavity, gas);
  EXPECT_LT(std::abs(p.y()), 1e-12);
}

TEST(Residual, DiskOnAxis) {
  const GasParams gas;
  const DiskSystem s = disk_system();
  EXPECT_LT(std::abs(equilibrium_residual(0.0, s.cavity, s.l, gas, 1.0)), 1e-12);
  const double r = equilibrium_residual(kPi / 4.0, s.cavity, s.l, gas, 1.0);
  const double ml = s.cavity.mass() * s.body.length + s.l.x();
  EXPECT_LT(r, 0.0);
  EXPECT_NEAR(r, -ml * std::sin(kPi / 4.0), 1e-3 * ml);
  for (double a : {0.3, 1.1, 2.0}) {
    EXPECT_NEAR(equilibrium_residual(a, s.cavity, s.l, gas, 1.0) + equilibrium_residual(-a, s.cavity, s.l, gas, 1.0),
                0.0, 1e-13);
  }
}

TEST(Equilibria, DiskHasExactlyTwo) {
  const GasParams gas;
  const DiskSystem s = disk_system();
  const EquilibriumReport rep = find_equilibria(s.cavity, s.l, gas, 1.0, 72);
  ASSERT_FALSE(rep.degenerate);
  ASSERT_EQ(rep.states.size(), 2u);
  EXPECT_LT(std::abs(rep.states[0].alpha), 1e-8);
  EXPECT_LT(std::abs(rep.states[1].alpha - kPi), 1e-8);
  EXPECT_GT(rep.states[0].d, 0.0);
  EXPECT_LT(rep.states[1].d, 0.0);
  EXPECT_LT(rep.states[0].energy, rep.states[1].energy);

  const MinimizerSelection sel = select_minimizer(rep.states);
  EXPECT_EQ(sel.index, 0u);
  EXPECT_FALSE(sel.tie);
}

TEST(Equilibria, StateInvariants) {
  const GasParams gas;
  const DiskSystem s = disk_system();
  for (const SteadyState& st : find_equilibria(s.cavity, s.l, gas, 1.0, 36).states) {
    EXPECT_NEAR(st.g.norm(), 1.0, 1e-15);
    EXPECT_LT(std::abs(s.cavity.profile_mass(st.g, st.c, gas) - s.cavity.mass()) / s.cavity.mass(), 1e-10);
    const Vec3 aligned = st.d * st.g - Pi(st.g, st.c, s.cavity, gas) - s.l;
    EXPECT_LE(aligned.norm(), 1e-8 * (std::abs(st.d) + s.l.norm()));
    // d > 0 iff the center of mass lies on the gravity side of the pivot.
    const Vec3 com = system_center_of_mass(st, s.cavity, s.l, s.body.mass(), gas);
    EXPECT_EQ(st.d > 0.0, com.dot(st.g) > 0.0);
  }
}

TEST(Equilibria, EnergyGapMatchesCenterOfMassShift) {
  // E(0) - E(pi) = -|g| M_total (sigma_+ + sigma_-), sigma from the centers of mass.
  const GasParams gas;
  const DiskSystem s = disk_system();
  const SteadyState down = steady_state_at(0.0, s.cavity, s.l, gas, 1.0);
  const SteadyState up = steady_state_at(kPi, s.cavity, s.l, gas, 1.0);
  const double m_total = s.body.mass() + s.cavity.mass();
  const double sigma_plus = system_center_of_mass(down, s.cavity, s.l, s.body.mass(), gas).x();
  const double sigma_minus = system_center_of_mass(up, s.cavity, s.l, s.body.mass(), gas).x();
  const ProfileIntegrals pd = s.cavity.profile_integrals(down.g, down.c, gas);
  const ProfileIntegrals pu = s.cavity.profile_integrals(up.g, up.c, gas);
  const double expected = -m_total * (sigma_plus + sigma_minus) + (pd.pressure_potential - pu.pressure_potential);
  EXPECT_NEAR(down.energy - up.energy, expected, 1e-9);
  // The pressure terms are equal by mirror symmetry, so the identity holds as printed.
  EXPECT_NEAR(pd.pressure_potential, pu.pressure_potential, 1e-12);
}

TEST(Equilibria, CenteredDiskWithoutBodyMomentIsDegenerate) {
  const GasParams gas;
  auto mesh = std::make_shared<const Mesh>(generate_disk_mesh({0.0, 0.0}, 0.1, 0.02));
  const Cavity cav = Cavity::from_mesh(mesh, mesh->total_area());
  const EquilibriumReport rep = find_equilibria(cav, Vec3::Zero(), gas, 1.0, 72);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_TRUE(rep.states.empty());
}

TEST(Equilibria, CubeHasBothPositiveRoots) {
  const GasParams gas = cube_gas();
  const EquilibriumReport rep = find_equilibria(cube(), {1, 0, 0}, gas, 1.0, 360);
  ASSERT_FALSE(rep.degenerate);
  bool found_down = false, found_up = false;
  for (const SteadyState& s : rep.states) {
    if (std::abs(s.alpha) < 1e-8 || std::abs(s.alpha - 2 * kPi) < 1e-8) {
      found_down = true;
      EXPECT_NEAR(s.d, 11.0 / 3.0, 1e-12);
      EXPECT_NEAR(s.c, 1.0, 1e-12);
    }
    if (std::abs(s.alpha - kPi) < 1e-8) {
      found_up = true;
      EXPECT_NEAR(s.d, 5.0 / 3.0, 1e-12);
      EXPECT_NEAR(s.c, 1.0, 1e-12);
    }
  }
  EXPECT_TRUE(found_down);
  EXPECT_TRUE(found_up);
}

TEST(Energy, MeanDensityHasNoPressureTerm) {
  const GasParams gas;
  const DiskSystem s = disk_system();
  // g = 0 profile is the constant mean density.
  const ProfileIntegrals ints = s.cavity.profile_integrals(Vec3::Zero(), std::pow(1.0, 2.0 / 3.0), gas);
  EXPECT_NEAR(ints.pressure_potential, 0.0, 1e-15);
}

TEST(Energy, P0FormulaAgreesWithContinuousOnProjectedProfile) {
  const GasParams gas;
  const DiskSystem s = disk_system(0.01);
  const SteadyState st = steady_state_at(0.0, s.cavity, s.l, gas, 1.0);
  const P0Field rho = project_profile(st.g, st.c, gas, *s.mesh);
  const double e = steady_energy_p0(rho, {1.0, 0.0}, *s.mesh, {s.l.x(), s.l.y()}, gas);
  EXPECT_NEAR(e, st.energy, 1e-8);
  EXPECT_NEAR(steady_energy(st, s.cavity, s.l, gas), st.energy, 1e-15);
}

TEST(Minimizer, TiesAndSingletons) {
  SteadyState a, b;
  a.energy = 1.0;
  b.energy = 1.0 + 5e-13;
  EXPECT_TRUE(select_minimizer({a, b}).tie);
  b.energy = 2.0;
  const MinimizerSelection sel = select_minimizer({b, a});
  EXPECT_FALSE(sel.tie);
  EXPECT_EQ(sel.index, 1u);
  EXPECT_EQ(select_minimizer({b}).index, 0u);
  EXPECT_THROW(select_minimizer({}), InvalidParameter);
}

TEST(Uniqueness, CubeViolatesHypotheses) {
  const GasParams gas = cube_gas();
  const EquilibriumReport rep = find_equilibria(cube(), {1, 0, 0}, gas, 1.0, 72);
  const UniquenessDiagnostic diag = uniqueness_diagnostic(cube(), {1, 0, 0}, gas, 1.0, rep.states);
  EXPECT_FALSE(diag.hypotheses_hold);
  EXPECT_LT(diag.min_abs_d, 2.0 * diag.delta1);
}

TEST(Uniqueness, DiskDiagnosticIsFinite) {
  const GasParams gas;
  const DiskSystem s = disk_system();
  const EquilibriumReport rep = find_equilibria(s.cavity, s.l, gas, 1.0, 36);
  const UniquenessDiagnostic diag = uniqueness_diagnostic(s.cavity, s.l, gas, 1.0, rep.states, 24);
  EXPECT_GT(diag.delta1, 0.0);
  EXPECT_TRUE(std::isfinite(diag.delta1));
  EXPECT_GT(diag.min_pi_dot_l, 0.0);
}

TEST(Cavity, Validation) {
  EXPECT_THROW(Cavity::from_box({{0, 0}, {0, 1}}, 1.0), InvalidParameter);
  EXPECT_THROW(Cavity::from_box({{0}, {1}}, 1.0), InvalidParameter);
  EXPECT_THROW(Cavity::from_box({{0, 0}, {1, 1}}, 0.0), InvalidParameter);
  EXPECT_THROW(find_equilibria(cube(), {1, 0, 0}, cube_gas(), 1.0, 4), InvalidParameter);
}
