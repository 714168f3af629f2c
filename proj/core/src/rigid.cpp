#include "cavpend/rigid.hpp"

#include <cmath>
#include <numbers>

#include "cavpend/errors.hpp"

namespace cavpend {

void BodyGeometry::validate() const {
  if (!(inner_radius > 0.0)) throw InvalidParameter("body inner radius R0 must be positive");
  if (!(outer_radius > inner_radius)) throw InvalidParameter("body requires R0 < R1");
  if (!(density > 0.0)) throw InvalidParameter("body density must be positive");
  if (!std::isfinite(length)) throw InvalidParameter("pendulum length must be finite");
}

double BodyGeometry::mass() const {
  return density * std::numbers::pi * (outer_radius * outer_radius - inner_radius * inner_radius);
}

Vec2 BodyGeometry::first_moment() const { return mass() * cavity_center(); }

double body_inertia(const BodyGeometry& geometry) {
  const double r0 = geometry.inner_radius;
  const double r1 = geometry.outer_radius;
  return geometry.mass() * (geometry.length * geometry.length + 0.5 * (r0 * r0 + r1 * r1));
}

Vec2 gravity_step(const Vec2& g_prev, double omega_prev, double dt) {
  // (I + s J) g_next = (I - s J) g_prev, J = e3 x, s = omega dt / 2.
  const double s = 0.5 * omega_prev * dt;
  const double denom = 1.0 + s * s;
  const Vec2 jg(-g_prev.y(), g_prev.x());
  return ((1.0 - s * s) * g_prev - 2.0 * s * jg) / denom;
}

double theta_from_g(const Vec2& g, double previous_theta) {
  if (g.x() == 0.0 && g.y() == 0.0) throw InvalidParameter("cannot recover an angle from a zero gravity vector");
  const double principal = std::atan2(g.y(), g.x());
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return principal + two_pi * std::round((previous_theta - principal) / two_pi);
}

}  // namespace cavpend
