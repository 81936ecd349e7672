#pragma once

// Radial Cauchy problem u_t + F(D^2 u) = 0, the rescaling
//   T_sigma u(x, t) = sigma^alpha u(sigma^{1/2} x, sigma t),
// and the normalized self-similar flow
//   phi_s = -F(D^2 phi) + (1/2) y.D phi + alpha(s) phi,   phi(0, s) = 1.

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "anomex/grid.hpp"
#include "anomex/operator.hpp"

namespace anomex {

struct ParabolicState {
  double t = 0.0;
  ProfileField u;
};

struct ParabolicTrace {
  double alpha = 0.0;
  std::vector<std::pair<double, double>> snapshots;        // (t, u(0,t))
  std::vector<std::pair<double, double>> cstar_estimates;  // (t, t^alpha u(0,t))
  std::vector<ParabolicState> profile_snapshots;
};

/// h^2 / (2 n Lambda).
double cfl_bound(const OperatorSpec& spec, const RadialGrid& grid);

/// One explicit monotone step with u(R_max) = 0. Throws CFLViolation.
ParabolicState step_explicit(const OperatorSpec& spec, const ParabolicState& state, double dt);

struct EvolveOptions {
  /// Exponent used for the C* estimates (NaN: estimates are not recorded).
  double alpha = std::numeric_limits<double>::quiet_NaN();
  /// Time at which g is prescribed.
  double t0 = 0.0;
  /// At t = 4^k the mesh is coarsened by 2 and the radius doubled, so the
  /// resolution relative to sqrt(t) stays fixed. Needs an even interval count.
  bool coarsen = true;
  /// Record (t, u0) every this many steps (snapshot times are always recorded).
  std::size_t record_stride = 100;
  double cfl_fraction = 0.9;
};

/// Throws InvalidArgument for negative, vanishing or non-decaying data.
ParabolicTrace evolve_cauchy(const OperatorSpec& spec, const ProfileField& g, double t_final,
                             const std::vector<double>& snapshot_times, const EvolveOptions& opt = {});

/// sigma^alpha u(sigma^{1/2} r) on the source grid.
ProfileField rescale_state(const ProfileField& u, double sigma, double alpha);
/// Same, sampled on `target`. Monotone cubic interpolation, even extension at
/// r = 0, zero beyond the source radius.
ProfileField rescale_state(const ProfileField& u, double sigma, double alpha, const RadialGrid& target);

/// Relaxes the normalized flow from exp(-r^2/(8 Lambda)) until s_final. The
/// residual is sup |phi(s_final) - phi(s_final - w)| with w = min(1, s_final / 2);
/// NoConvergence if it exceeds tol.
EigenResult normalized_rescaled_flow(const OperatorSpec& spec, const RadialGrid& grid,
                                     double s_final = 20.0, double tol = 1e-6);

struct ConvergenceReport {
  std::vector<double> sigmas;
  std::vector<double> cstar;
  std::vector<double> sup_rel_err;  // over r <= r_check
  std::vector<double> cauchy_diff;  // |C_k - C_{k-1}| / C_k, first entry NaN
};

/// Evolves g from t = 0 to max(sigmas), rescales each snapshot back to t = 1
/// and compares with cstar * phi.
ConvergenceReport convergence_report(const OperatorSpec& spec, const ProfileField& g, double alpha,
                                     const ProfileField& phi, const std::vector<double>& sigmas,
                                     double r_check = 3.0, const EvolveOptions& opt = {});
/// Same, from an existing trace (its alpha and profile snapshots).
ConvergenceReport convergence_report(const ParabolicTrace& trace, const ProfileField& phi, double r_check = 3.0);

}  // namespace anomex
