#pragma once

#include <cmath>

namespace cavpend {

/// Barotropic gas: p = a rho^gamma, viscous stress 2 mu D(u) + (lambda - 2 mu/3) I div u.
struct GasParams {
  double a = 10.0;
  double gamma = 5.0 / 3.0;
  double mu = 100.0;
  double lambda = 0.0;

  void validate() const;

  double pressure(double rho) const { return a * std::pow(rho, gamma); }
  /// Pressure potential P(rho) = a rho^gamma / (gamma - 1).
  double potential(double rho) const { return a * std::pow(rho, gamma) / (gamma - 1.0); }
  double potential_derivative(double rho) const {
    return a * gamma * std::pow(rho, gamma - 1.0) / (gamma - 1.0);
  }
  /// Coefficient (gamma - 1) / (a gamma) of the hydrostatic profile.
  double profile_coefficient() const { return (gamma - 1.0) / (a * gamma); }
};

}  // namespace cavpend
