#include "cavpend/steady.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "cavpend/errors.hpp"

namespace cavpend {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double positive_power(double t, double n) { return t > 0.0 ? std::pow(t, n) : 0.0; }

// Integrals of [sum_d a_d x_d + c]_+^n (optionally times x_j) over a box,
// dimension by dimension. Along a dimension with coefficient a the integrand
// has the antiderivative [.]_+^(n+1) / (a (n+1)); the difference of the two
// end values cancels badly once the span |a| len is small compared with the
// bracket, so such dimensions (which carry no kink) go to Gauss-Legendre.
class BoxIntegrator {
 public:
  BoxIntegrator(const Box& box, const std::array<double, 3>& coeff) : box_(box) {
    const int dims = box.dims();
    for (int d = 0; d < dims; ++d) {
      order_[d] = d;
      a_[d] = coeff[d];
      span_[d] = std::abs(coeff[d]) * (box.hi[d] - box.lo[d]);
    }
    std::sort(order_.begin(), order_.begin() + dims, [&](int l, int r) { return span_[l] > span_[r]; });
    // tail_[i]: half-width of the bracket range over order_[i..].
    tail_[dims] = 0.0;
    for (int i = dims - 1; i >= 0; --i) tail_[i] = tail_[i + 1] + span_[order_[i]];
  }

  // Bracket offset at the box center.
  double center_offset(double c) const {
    double off = c;
    for (int d = 0; d < box_.dims(); ++d) off += a_[d] * 0.5 * (box_.lo[d] + box_.hi[d]);
    return off;
  }

  // int [.]_+^n x_weight over the box (weight -1: no factor).
  double integrate(double n, double c, int weight) const { return recurse(0, n, c, weight); }

 private:
  // Offsets `c` are relative to the origin along dims not yet integrated.
  double recurse(int i, double n, double c, int weight) const {
    const int dims = box_.dims();
    if (i == dims) return positive_power(c, n);
    const int d = order_[i];
    const double lo = box_.lo[d];
    const double hi = box_.hi[d];
    const double a = a_[d];

    // Bracket range over the remaining sub-box.
    double center = c;
    for (int k = i; k < dims; ++k) center += a_[order_[k]] * 0.5 * (box_.lo[order_[k]] + box_.hi[order_[k]]);
    const double rmin = center - 0.5 * tail_[i];
    const double rmax = center + 0.5 * tail_[i];
    if (rmax <= 0.0) return 0.0;

    if (a == 0.0 || (rmin > 0.0 && span_[d] <= 0.1 * rmin)) {
      if (a == 0.0 && weight != d) return (hi - lo) * recurse(i + 1, n, c, weight);
      auto f = [&](double x) {
        const double w = (weight == d) ? x : 1.0;
        return w * recurse(i + 1, n, c + a * x, weight);
      };
      return boost::math::quadrature::gauss<double, 10>::integrate(f, lo, hi);
    }

    const double n1 = n + 1.0;
    const double j1_hi = recurse(i + 1, n1, c + a * hi, weight);
    const double j1_lo = recurse(i + 1, n1, c + a * lo, weight);
    if (weight != d) return (j1_hi - j1_lo) / (a * n1);
    // Integration by parts about the interval midpoint m:
    // int x J_n = m int J_n + [(x-m) J_{n+1}/(a(n+1))] - [J_{n+2}/(a^2 (n+1)(n+2))].
    const double m = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double n2 = n + 2.0;
    const double j2_hi = recurse(i + 1, n2, c + a * hi, weight);
    const double j2_lo = recurse(i + 1, n2, c + a * lo, weight);
    const double base = (j1_hi - j1_lo) / (a * n1);
    return m * base + half * (j1_hi + j1_lo) / (a * n1) - (j2_hi - j2_lo) / (a * a * n1 * n2);
  }

  const Box& box_;
  std::array<int, 3> order_{};
  std::array<double, 3> a_{};
  std::array<double, 3> span_{};
  std::array<double, 4> tail_{};
};

std::array<double, 3> box_coefficients(const Vec3& g, const GasParams& gas) {
  const double k = gas.profile_coefficient();
  return {k * g.x(), k * g.y(), k * g.z()};
}

double box_volume(const Box& box) {
  double v = 1.0;
  for (int d = 0; d < box.dims(); ++d) v *= box.hi[d] - box.lo[d];
  return v;
}

Vec3 embed(const Vec2& x) { return {x.x(), x.y(), 0.0}; }

double mesh_profile_mass(const Mesh& mesh, const Vec3& g, double c, const GasParams& gas) {
  const double k = gas.profile_coefficient();
  const double p = 1.0 / (gas.gamma - 1.0);
  const Vec2 g2(g.x(), g.y());
  double mass = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (const QuadraturePoint& q : degree5_rule(mesh, e)) mass += q.weight * positive_power(k * q.point.dot(g2) + c, p);
  return mass;
}

void check_gas(const GasParams& gas) {
  if (!(gas.gamma > 1.0)) throw InvalidParameter("adiabatic exponent gamma must exceed 1");
  if (!(gas.a > 0.0)) throw InvalidParameter("pressure constant a must be positive");
}

}  // namespace

Cavity Cavity::from_mesh(std::shared_ptr<const Mesh> mesh, double mass) {
  if (!mesh || mesh->num_elements() == 0) throw InvalidParameter("cavity mesh is empty");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidParameter("fluid mass must be positive");
  Cavity cavity;
  cavity.volume_ = mesh->total_area();
  cavity.mesh_ = std::move(mesh);
  cavity.mass_ = mass;
  return cavity;
}

Cavity Cavity::from_box(Box box, double mass) {
  const int dims = box.dims();
  if (dims < 2 || dims > 3 || static_cast<int>(box.hi.size()) != dims)
    throw InvalidParameter("box cavity must have 2 or 3 matching bounds");
  for (int d = 0; d < dims; ++d)
    if (!(box.lo[d] < box.hi[d])) throw InvalidParameter("box cavity bounds must satisfy lo < hi");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidParameter("fluid mass must be positive");
  Cavity cavity;
  cavity.volume_ = box_volume(box);
  cavity.box_ = std::move(box);
  cavity.mass_ = mass;
  return cavity;
}

int Cavity::dims() const { return box_ ? box_->dims() : 2; }

double Cavity::max_projection(const Vec3& direction) const {
  if (box_) {
    double m = 0.0;
    for (int d = 0; d < box_->dims(); ++d) m += std::max(direction[d] * box_->lo[d], direction[d] * box_->hi[d]);
    return m;
  }
  double m = -std::numeric_limits<double>::infinity();
  for (const Vec2& v : mesh_->vertices()) m = std::max(m, embed(v).dot(direction));
  return m;
}

double Cavity::max_radius() const {
  if (box_) {
    double r2 = 0.0;
    for (int d = 0; d < box_->dims(); ++d) {
      const double e = std::max(std::abs(box_->lo[d]), std::abs(box_->hi[d]));
      r2 += e * e;
    }
    return std::sqrt(r2);
  }
  double r = 0.0;
  for (const Vec2& v : mesh_->vertices()) r = std::max(r, v.norm());
  return r;
}

double Cavity::profile_mass(const Vec3& g, double c, const GasParams& gas) const {
  if (box_) return BoxIntegrator(*box_, box_coefficients(g, gas)).integrate(1.0 / (gas.gamma - 1.0), c, -1);
  return mesh_profile_mass(*mesh_, g, c, gas);
}

ProfileIntegrals Cavity::profile_integrals(const Vec3& g, double c, const GasParams& gas) const {
  const double p = 1.0 / (gas.gamma - 1.0);
  const double rho_bar = mean_density();
  ProfileIntegrals out;
  double rho_gamma = 0.0;  // int rho^gamma = int [.]_+^(p+1)
  if (box_) {
    const BoxIntegrator integrator(*box_, box_coefficients(g, gas));
    out.mass = integrator.integrate(p, c, -1);
    for (int d = 0; d < box_->dims(); ++d) out.first_moment[d] = integrator.integrate(p, c, d);
    rho_gamma = integrator.integrate(p + 1.0, c, -1);
  } else {
    const double k = gas.profile_coefficient();
    const Vec2 g2(g.x(), g.y());
    for (int e = 0; e < mesh_->num_elements(); ++e) {
      for (const QuadraturePoint& q : degree5_rule(*mesh_, e)) {
        const double bracket = k * q.point.dot(g2) + c;
        if (bracket <= 0.0) continue;
        const double rho = std::pow(bracket, p);
        out.mass += q.weight * rho;
        out.first_moment += q.weight * rho * embed(q.point);
        rho_gamma += q.weight * rho * bracket;
      }
    }
  }
  out.pressure_potential = gas.a / (gas.gamma - 1.0) * rho_gamma -
                           gas.potential_derivative(rho_bar) * (out.mass - rho_bar * volume_) -
                           gas.potential(rho_bar) * volume_;
  return out;
}

double density_profile(const Vec3& g, double c, const GasParams& gas, const Vec3& x) {
  check_gas(gas);
  return positive_power(gas.profile_coefficient() * x.dot(g) + c, 1.0 / (gas.gamma - 1.0));
}

double solve_c(const Vec3& g, double mass, const Cavity& cavity, const GasParams& gas) {
  check_gas(gas);
  if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidParameter("fluid mass must be positive");
  const double k = gas.profile_coefficient();
  // Below c_lo the profile vanishes on the whole cavity.
  const double c_lo_start = -cavity.max_projection(k * g);
  double lo = c_lo_start;
  double step = std::max(1.0, std::abs(lo));
  double hi = lo + step;
  int expansions = 0;
  while (cavity.profile_mass(g, hi, gas) < mass) {
    lo = hi;
    step *= 2.0;
    hi += step;
    if (++expansions > 200) throw SolverError("solve_c: could not bracket the mass constraint");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double m = cavity.profile_mass(g, mid, gas);
    if (std::abs(m - mass) <= 1e-14 * mass) return mid;
    (m < mass ? lo : hi) = mid;
  }
  const double m_lo = cavity.profile_mass(g, lo, gas);
  const double m_hi = cavity.profile_mass(g, hi, gas);
  return std::abs(m_lo - mass) <= std::abs(m_hi - mass) ? lo : hi;
}

Vec3 Pi(const Vec3& g, double c, const Cavity& cavity, const GasParams& gas) {
  Vec3 moment = cavity.profile_integrals(g, c, gas).first_moment;
  moment.z() = 0.0;
  return moment;
}

Vec3 gravity_at(double alpha, double g_norm) { return {g_norm * std::cos(alpha), g_norm * std::sin(alpha), 0.0}; }

double equilibrium_residual(double alpha, const Cavity& cavity, const Vec3& body_moment, const GasParams& gas,
                            double g_norm) {
  const Vec3 g = gravity_at(alpha, g_norm);
  const double c = solve_c(g, cavity, gas);
  const Vec3 total = Pi(g, c, cavity, gas) + body_moment;
  return g.x() * total.y() - g.y() * total.x();
}

double steady_energy(const SteadyState& state, const Cavity& cavity, const Vec3& body_moment, const GasParams& gas) {
  const ProfileIntegrals ints = cavity.profile_integrals(state.g, state.c, gas);
  Vec3 moment = ints.first_moment + body_moment;
  return ints.pressure_potential - moment.dot(state.g);
}

double steady_energy_p0(const P0Field& rho, const Vec2& g, const Mesh& mesh, const Vec2& body_moment,
                        const GasParams& gas) {
  double mass = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) mass += rho[k] * mesh.area(k);
  const double rho_bar = mass / mesh.total_area();
  const double p_bar = gas.potential(rho_bar);
  const double dp_bar = gas.potential_derivative(rho_bar);
  double internal = 0.0;
  Vec2 moment = body_moment;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const double area = mesh.area(k);
    internal += area * (gas.potential(rho[k]) - dp_bar * (rho[k] - rho_bar) - p_bar);
    moment += rho[k] * area * mesh.centroid(k);
  }
  return internal - moment.dot(g);
}

SteadyState steady_state_at(double alpha, const Cavity& cavity, const Vec3& body_moment, const GasParams& gas,
                            double g_norm) {
  SteadyState s;
  s.alpha = alpha;
  s.g = gravity_at(alpha, g_norm);
  s.c = solve_c(s.g, cavity, gas);
  const ProfileIntegrals ints = cavity.profile_integrals(s.g, s.c, gas);
  Vec3 total = ints.first_moment + body_moment;
  total.z() = 0.0;
  s.d = total.dot(s.g) / s.g.squaredNorm();
  s.energy = ints.pressure_potential - (ints.first_moment + body_moment).dot(s.g);
  return s;
}

EquilibriumReport find_equilibria(const Cavity& cavity, const Vec3& body_moment, const GasParams& gas,
                                  double g_norm, int n_scan) {
  if (n_scan < 8) throw InvalidParameter("equilibrium scan needs at least 8 points");
  if (!(g_norm > 0.0)) throw InvalidParameter("gravity magnitude must be positive");
  auto residual = [&](double alpha) { return equilibrium_residual(alpha, cavity, body_moment, gas, g_norm); };

  std::vector<double> alphas(n_scan), r(n_scan);
  EquilibriumReport report;
  for (int k = 0; k < n_scan; ++k) {
    alphas[k] = kTwoPi * k / n_scan;
    r[k] = residual(alphas[k]);
    report.max_abs_residual = std::max(report.max_abs_residual, std::abs(r[k]));
  }
  const double scale = g_norm * (body_moment.norm() + cavity.mass() * cavity.max_radius());
  if (report.max_abs_residual <= 1e-10 * scale) {
    report.degenerate = true;
    return report;
  }

  std::vector<double> roots;
  for (int k = 0; k < n_scan; ++k) {
    if (r[k] == 0.0) {
      roots.push_back(alphas[k]);
      continue;
    }
    const int next = (k + 1) % n_scan;
    if (r[next] == 0.0 || (r[k] > 0.0) == (r[next] > 0.0)) continue;
    double lo = alphas[k];
    double hi = (next == 0) ? kTwoPi : alphas[next];
    double r_lo = r[k];
    double root = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      root = 0.5 * (lo + hi);
      const double r_mid = residual(root);
      if (std::abs(r_mid) <= 1e-11 && hi - lo <= 1e-12) break;
      if (r_mid == 0.0 || root <= lo || root >= hi) break;
      if ((r_mid > 0.0) == (r_lo > 0.0)) {
        lo = root;
        r_lo = r_mid;
      } else {
        hi = root;
      }
    }
    roots.push_back(std::fmod(root, kTwoPi));
  }

  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double a : roots) {
    if (!unique.empty() && a - unique.back() <= 1e-8) continue;
    unique.push_back(a);
  }
  if (unique.size() > 1 && unique.front() + kTwoPi - unique.back() <= 1e-8) unique.pop_back();
  if (unique.empty()) throw SolverError("find_equilibria: no equilibrium found on the orientation scan");

  for (double a : unique) report.states.push_back(steady_state_at(a, cavity, body_moment, gas, g_norm));
  return report;
}

MinimizerSelection select_minimizer(const std::vector<SteadyState>& states) {
  if (states.empty()) throw InvalidParameter("select_minimizer needs at least one steady state");
  MinimizerSelection sel;
  for (std::size_t i = 1; i < states.size(); ++i)
    if (states[i].energy < states[sel.index].energy) sel.index = i;
  sel.state = states[sel.index];
  for (std::size_t i = 0; i < states.size(); ++i)
    if (i != sel.index && std::abs(states[i].energy - sel.state.energy) < 1e-12) sel.tie = true;
  return sel;
}

UniquenessDiagnostic uniqueness_diagnostic(const Cavity& cavity, const Vec3& body_moment, const GasParams& gas,
                                           double g_norm, const std::vector<SteadyState>& roots, int samples) {
  if (samples < 2) throw InvalidParameter("uniqueness diagnostic needs at least 2 samples");
  std::vector<Vec3> gs(samples), pis(samples);
  UniquenessDiagnostic diag;
  diag.min_pi_dot_l = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    gs[k] = gravity_at(kTwoPi * k / samples, g_norm);
    pis[k] = Pi(gs[k], solve_c(gs[k], cavity, gas), cavity, gas);
    diag.min_pi_dot_l = std::min(diag.min_pi_dot_l, pis[k].dot(body_moment));
  }
  for (int i = 0; i < samples; ++i)
    for (int j = i + 1; j < samples; ++j)
      diag.delta1 = std::max(diag.delta1, (pis[i] - pis[j]).norm() / (gs[i] - gs[j]).norm());
  diag.min_abs_d = std::numeric_limits<double>::infinity();
  for (const SteadyState& s : roots) diag.min_abs_d = std::min(diag.min_abs_d, std::abs(s.d));
  diag.hypotheses_hold = !roots.empty() && diag.min_abs_d > 2.0 * diag.delta1 && diag.min_pi_dot_l > 0.0;
  return diag;
}

Vec3 system_center_of_mass(const SteadyState& state, const Cavity& cavity, const Vec3& body_moment,
                           double body_mass, const GasParams& gas) {
  const ProfileIntegrals ints = cavity.profile_integrals(state.g, state.c, gas);
  return (ints.first_moment + body_moment) / (body_mass + ints.mass);
}

P0Field project_profile(const Vec3& g, double c, const GasParams& gas, const Mesh& mesh) {
  const double k = gas.profile_coefficient();
  const double p = 1.0 / (gas.gamma - 1.0);
  const Vec2 g2(g.x(), g.y());
  P0Field rho(mesh);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    double integral = 0.0;
    for (const QuadraturePoint& q : degree5_rule(mesh, e)) integral += q.weight * positive_power(k * q.point.dot(g2) + c, p);
    rho[e] = integral / mesh.area(e);
  }
  return rho;
}

}  // namespace cavpend
