#include "cavpend/coupling.hpp"

#include "cavpend/errors.hpp"

namespace cavpend {

VelocityDofLayout::VelocityDofLayout(const Mesh& mesh)
    : interior_index(mesh.num_faces(), -1), rigid_trace(mesh.num_faces()) {
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces()[f];
    rigid_trace[f] = rot90(face.midpoint);
    if (!face.boundary) {
      interior_index[f] = num_interior++;
      interior_faces.push_back(f);
    }
  }
}

CRField rigid_rotation(const Mesh& mesh, double omega) {
  CRField u(mesh);
  for (int f = 0; f < mesh.num_faces(); ++f) u[f] = omega * rot90(mesh.faces()[f].midpoint);
  return u;
}

CRField relative_velocity(const CRField& u, double omega, const Mesh& mesh) {
  CRField v(mesh);
  for (int f = 0; f < mesh.num_faces(); ++f) v[f] = u[f] - omega * rot90(mesh.faces()[f].midpoint);
  return v;
}

void assemble_coupled_rows(const CoupledRowInputs& in, Triplets& triplets, Eigen::VectorXd& rhs) {
  const VelocityDofLayout& layout = in.layout;
  const int w_col = layout.omega_index();
  const double dt = in.dt;

  double angular_rhs = in.inertia * in.omega_prev / dt;
  Vec2 fluid_first_moment = Vec2::Zero();
  double omega_diag = in.inertia / dt;

  for (int k = 0; k < in.mesh.num_elements(); ++k) {
    const ElementGeometry& g = in.geometry[k];
    const double rn = in.rho_next[k];
    const double rp = in.rho_prev[k];
    const double w = g.area / 3.0;  // midpoint-rule weight

    std::array<Vec2, 3> v;
    for (int s = 0; s < 3; ++s) {
      v[s] = in.u_prev[g.faces[s]] - in.omega_prev * layout.rigid_trace[g.faces[s]];
    }

    for (int t = 0; t < 3; ++t) {
      const int row_face = layout.interior_index[g.faces[t]];
      if (row_face < 0) continue;
      for (int j = 0; j < 2; ++j) {
        const int row = 2 * row_face + j;
        for (int s = 0; s < 3; ++s) {
          const int col_face = layout.interior_index[g.faces[s]];
          for (int i = 0; i < 2; ++i) {
            double c = viscous_entry(g, t, j, s, i, in.mu, in.lambda);
            if (i == j) {
              // 1/2 int rho (v . grad u) . phi - 1/2 int rho (v . grad phi) . u
              c += 0.5 * rn * w * (v[t].dot(g.basis_gradients[s]) - v[s].dot(g.basis_gradients[t]));
              if (s == t) c += w * 0.5 * (rn + rp) / dt;
            }
            if (s == t && i != j) {
              // int rho omega e3 x u . phi; (e3 x u)_0 = -u_1, (e3 x u)_1 = u_0
              c += rn * in.omega_prev * w * (j == 0 ? -1.0 : 1.0);
            }
            if (col_face >= 0) {
              triplets.emplace_back(row, 2 * col_face + i, c);
            } else {
              triplets.emplace_back(row, w_col, c * layout.rigid_trace[g.faces[s]][i]);
            }
          }
        }
        rhs[row] += w * rp * in.u_prev[g.faces[t]][j] / dt + rn * w * in.g_half[j];
      }
    }

    // Angular row: (1/dt) int rho_next x cross u_next, midpoint rule.
    for (int s = 0; s < 3; ++s) {
      const Vec2& m = g.midpoints[s];
      const int col_face = layout.interior_index[g.faces[s]];
      const double scale = rn * w / dt;
      if (col_face >= 0) {
        triplets.emplace_back(w_col, 2 * col_face, -m.y() * scale);
        triplets.emplace_back(w_col, 2 * col_face + 1, m.x() * scale);
      } else {
        omega_diag += scale * cross(m, layout.rigid_trace[g.faces[s]]);
      }
      angular_rhs += rp * w / dt * cross(m, in.u_prev[g.faces[s]]);
    }
    fluid_first_moment += rn * g.area * in.mesh.centroid(k);
  }
  triplets.emplace_back(w_col, w_col, omega_diag);
  angular_rhs += cross(in.body_first_moment + fluid_first_moment, in.g_half);
  rhs[w_col] += angular_rhs;
}

CRField unpack_velocity(const Eigen::VectorXd& x, const VelocityDofLayout& layout, const Mesh& mesh) {
  const double omega = x[layout.omega_index()];
  CRField u(mesh);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const int idx = layout.interior_index[f];
    u[f] = idx >= 0 ? Vec2(x[2 * idx], x[2 * idx + 1]) : Vec2(omega * layout.rigid_trace[f]);
  }
  return u;
}

}  // namespace cavpend
