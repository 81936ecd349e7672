#pragma once

// Radial shooting for the self-similar eigenproblem
//   F(D^2 phi) - (1/2) r phi' = alpha phi,   phi(0) = 1, phi'(0) = 0,
// with F restricted to radial Hessian spectra.

#include <vector>

#include "anomex/grid.hpp"
#include "anomex/operator.hpp"

namespace anomex {

struct ShootingOutcome {
  enum class Class { CrossesZero, SlowDecay, FastDecay };

  Class classification = Class::SlowDecay;
  double r_cross = 0.0;  // only meaningful for CrossesZero
  double final_r = 0.0;
  double final_log_derivative = 0.0;
  /// phi at every grid node up to final_r; nodes past a crossing are left at 0.
  std::vector<double> values;
};

enum class ShootingScheme {
  /// Long-double Taylor series of the branch-wise linear ODE, one step per grid
  /// interval, branch switches located inside the step. Near machine precision.
  taylor,
  /// Classical RK4 in double precision with the curvature inverted per stage.
  rk4,
};

/// Integrates outward from the origin on the grid nodes.
/// Throws NonMonotoneInversion or Overflow.
ShootingOutcome shoot(const OperatorSpec& spec, const RadialGrid& grid, double alpha,
                      ShootingScheme scheme = ShootingScheme::taylor);

/// Bisection on alpha between the exponent bounds: a zero crossing on [0, R_max]
/// means alpha is too large. Throws BracketFailure.
EigenResult find_alpha_shooting(const OperatorSpec& spec, const RadialGrid& grid, double tol,
                                ShootingScheme scheme = ShootingScheme::taylor);

/// sup |F(D^2 phi) - r phi'/2 - alpha phi| over nodes in the inner 95% of the
/// grid, with second-order central differences (symmetric form at r = 0).
double eigen_residual(const OperatorSpec& spec, double alpha, const ProfileField& profile);

}  // namespace anomex
