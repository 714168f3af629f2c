#pragma once

#include <cmath>

#include "cavpend/mesh.hpp"

namespace cavpend {

/// Annular pendulum body: the ring R0 <= |x - (L, 0)| <= R1 in the body
/// frame, pivot at the origin.
struct BodyGeometry {
  double length = 0.4;        // L, pivot to cavity center
  double inner_radius = 0.1;  // R0, also the cavity radius
  double outer_radius = 0.2;  // R1
  double density = 1.0;       // rho_B, mass per area

  void validate() const;

  double mass() const;
  /// m_B * (L, 0).
  Vec2 first_moment() const;
  Vec2 cavity_center() const { return {length, 0.0}; }
};

/// Moment of inertia of the annulus about the pivot axis,
/// m_B * (L^2 + (R0^2 + R1^2) / 2).
double body_inertia(const BodyGeometry& geometry);

struct BodyState {
  double omega = 0.0;
  Vec2 gravity{1.0, 0.0};  // body-frame gravity
  double theta = 0.0;      // unwrapped swing angle recovered from `gravity`
};

/// Cayley update of the body-frame gravity:
/// (g_next - g_prev)/dt + omega_prev e3 x (g_prev + g_next)/2 = 0.
/// Norm preserving; rotates g by -2 atan(omega dt / 2).
Vec2 gravity_step(const Vec2& g_prev, double omega_prev, double dt);

/// Angle with cos = g1/|g|, sin = g2/|g|, unwrapped to be the representative
/// closest to `previous_theta`. Throws InvalidParameter on a zero vector.
double theta_from_g(const Vec2& g, double previous_theta);

/// Body-frame gravity of unit magnitude for a swing angle.
inline Vec2 gravity_from_theta(double theta, double magnitude = 1.0) {
  return magnitude * Vec2(std::cos(theta), std::sin(theta));
}

}  // namespace cavpend
