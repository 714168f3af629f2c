#pragma once

#include <cmath>
#include <random>

#include "cavpend/compressible.hpp"
#include "cavpend/mesh.hpp"

namespace fixtures {

using cavpend::CRField;
using cavpend::Mesh;
using cavpend::P0Field;
using cavpend::Vec2;

inline P0Field random_density(const Mesh& mesh, unsigned seed, double lo = 0.5, double hi = 1.5) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(lo, hi);
  P0Field rho(mesh);
  for (auto& r : rho.values) r = U(rng);
  return rho;
}

inline CRField random_velocity(const Mesh& mesh, unsigned seed, double scale = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-scale, scale);
  CRField u(mesh);
  for (auto& d : u.dof) d = Vec2(U(rng), U(rng));
  return u;
}

// Random field whose boundary dofs carry the rigid trace omega e3 x x.
inline CRField random_velocity_with_rigid_trace(const Mesh& mesh, unsigned seed, double omega, double scale = 1.0) {
  CRField u = random_velocity(mesh, seed, scale);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& face = mesh.faces()[f];
    if (face.boundary) u[f] = omega * Vec2(-face.midpoint.y(), face.midpoint.x());
  }
  return u;
}

// Index of the face obtained by reflecting face f across the line y = y0.
inline std::vector<int> mirror_faces(const Mesh& mesh, double y0 = 0.0) {
  std::vector<int> map(mesh.num_faces(), -1);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Vec2 m = mesh.faces()[f].midpoint;
    const Vec2 r(m.x(), 2.0 * y0 - m.y());
    for (int h = 0; h < mesh.num_faces(); ++h)
      if ((mesh.faces()[h].midpoint - r).norm() < 1e-12) map[f] = h;
  }
  return map;
}

}  // namespace fixtures
