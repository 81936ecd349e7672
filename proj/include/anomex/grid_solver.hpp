#pragma once

// Finite-difference resolvent of  F(D^2 u) - (1/2) r u'  with u(R_max) = 0,
// solved by Howard policy iteration, and the eigenpair phi = alpha * A(phi)
// by inverse power iteration.

#include <cstddef>
#include <vector>

#include "anomex/grid.hpp"
#include "anomex/operator.hpp"

namespace anomex {

struct ResolventResult {
  ProfileField u;
  std::size_t policy_sweeps = 0;
  double linear_residual = 0.0;
  /// Converged per-node policy index into radial_policies(spec); size N.
  std::vector<std::size_t> policy;
};

/// u = A(v). Throws PolicyCycle after 100 sweeps.
ResolventResult apply_resolvent(const OperatorSpec& spec, const RadialGrid& grid, const ProfileField& v);

/// The discrete operator itself: F_h(u) - (r/2) D_h u at every node (0 at r = R_max).
std::vector<double> apply_discrete_operator(const OperatorSpec& spec, const RadialGrid& grid,
                                            const std::vector<double>& u);

/// Throws NoConvergence after max_iter iterations.
EigenResult inverse_power_iteration(const OperatorSpec& spec, const RadialGrid& grid, double tol,
                                    std::size_t max_iter = 2000);

struct ExponentPair {
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  EigenResult plus;
  /// Eigenpair of the dual operator; the negative profile is -minus.profile.
  EigenResult minus;
};

ExponentPair exponent_pair(const OperatorSpec& spec, const RadialGrid& grid, double tol);

}  // namespace anomex
