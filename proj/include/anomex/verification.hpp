#pragma once

// Numerical certificates for the closed-form inequalities and constructions
// behind the exponent theory. Every check is deterministic.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anomex/grid.hpp"
#include "anomex/operator.hpp"

namespace anomex {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst_slack = 0.0;  // most negative margin; passed <=> worst_slack >= -tolerance
  double location = 0.0;     // r (or |y|) where the worst slack occurs
  double tolerance = 0.0;
  /// Extra named numbers worth reporting (fitted constants, second coordinate, ...).
  std::vector<std::pair<std::string, double>> details;
};

/// Radial Gaussian exp(-a r^2) evaluated through the Pucci operators, both
/// branches of its Hessian sign pattern. First: P- at a = 1/(4 Lambda) between
/// n lambda/(2 Lambda) and (n-1) lambda/(2 Lambda) + 1/2. Second: P+ at
/// a = 1/(4 lambda) between (n-1) Lambda/(2 lambda) + 1/2 and n Lambda/(2 lambda).
std::pair<CheckResult, CheckResult> check_gaussian_bounds(const EllipticityBounds& bounds, int n,
                                                  const std::vector<double>& r_samples);
/// `count` evenly spaced samples on [0, 3/sqrt(2a)] for both a values, plus the breakpoints.
std::vector<double> gaussian_bounds_samples(const EllipticityBounds& bounds, std::size_t count);
/// max over both a of |closed form left of the breakpoint - right of it| at r = (2a)^{-1/2},
/// both divided by exp(-a r^2).
double gaussian_bounds_branch_gap(const EllipticityBounds& bounds, int n);

/// n lambda/2Lambda <= a(P-) <= ((n-1)lambda+Lambda)/2Lambda <= n/2
///   <= ((n-1)Lambda+lambda)/2lambda <= a(P+) <= n Lambda/2lambda,
/// with strict margins around the computed exponents when lambda != Lambda.
CheckResult check_exponent_chain(double alpha_pucci_minus, double alpha_pucci_plus,
                                 const EllipticityBounds& bounds, int n, double tol);

struct EnvelopeFit {
  double c_upper = 0.0;  // smallest C1 with phi <= C1 exp(-a1 r^2)
  double c_lower = 0.0;  // smallest C2 with exp(-a2 r^2) <= C2 phi
  double a1 = 0.0;
  double a2 = 0.0;
};

/// Fits over r <= 0.8 R_max with a1 = 0.99/(4 Lambda), a2 = 1.01/(4 lambda);
/// passes when both constants are finite and <= 1e6.
CheckResult check_envelopes(const ProfileField& profile, const EllipticityBounds& bounds);
EnvelopeFit fit_envelopes(const ProfileField& profile, const EllipticityBounds& bounds);

struct SubsolutionConstants {
  double a = 0.0;          // 1/(2 lambda)
  double beta = 0.0;       // 1 + 2 a Lambda n
  double r1 = 0.0;         // 2 (beta + Lambda + 1)
  double log_delta = 0.0;  // r1 - a r1^2 - log(beta + 1)
};

SubsolutionConstants subsolution_constants(const EllipticityBounds& bounds, int n);

/// w(y,s) = e^{-beta s} e^{-a|y|^2} - delta e^{-(beta+1)s} min(e^{-r1}, e^{-|y|}),
/// returned as w * exp(-scale) to stay representable.
double subsolution_scaled(const SubsolutionConstants& c, double rho, double s, double scale);

/// Samples (|y|, s) with |y| in [0, 2 r1] at least `gap` away from r1 and s in [0, 5].
std::vector<std::pair<double, double>> subsolution_samples(const EllipticityBounds& bounds, int n,
                                                           std::size_t count, std::uint64_t seed,
                                                           double gap = 1e-2);

/// w_s + P+(D^2 w) - y.Dw/2 <= 0 at every sample, in log-scaled arithmetic,
/// tolerance 1e-12 relative to the largest term.
CheckResult check_special_subsolution(const EllipticityBounds& bounds, int n,
                                      const std::vector<std::pair<double, double>>& samples);
/// Same with explicit (possibly perturbed) constants.
CheckResult check_special_subsolution(const EllipticityBounds& bounds, int n,
                                      const std::vector<std::pair<double, double>>& samples,
                                      const SubsolutionConstants& constants);

/// Worst relative disagreement between the analytic derivatives of exp(-a r^2)
/// and of w and central differences with step h_fd, over `points` random samples
/// with |y| in [0.1, r1 + 4] (both pieces of w).
CheckResult check_subsolution_derivatives(const EllipticityBounds& bounds, int n, std::size_t points,
                                          std::uint64_t seed, double h_fd = 1e-5);

/// Builds Phi(r, sigma) = sigma^{-alpha} phi(r / sqrt(sigma)) on phi's grid and
/// rescales it back; compares with phi on r <= r_check (in-grid points only).
CheckResult check_self_similarity(double alpha, const ProfileField& phi, const std::vector<double>& sigmas,
                                  double r_check = 3.0);

/// alpha+(dual(dual(F))) == alpha+(F) and the convex-operator ordering
/// alpha-(F) <= n/2 <= alpha+(F) (or its dual form), strict unless F is linear;
/// a linear F must sit within tol + 5 h^2 of n/2.
CheckResult check_duality_exponents(const OperatorSpec& spec, const RadialGrid& grid, double tol);

/// The default suite as run by `anomex verify`.
std::vector<CheckResult> run_verification_suite(const OperatorSpec& spec, const RadialGrid& grid, double tol);

}  // namespace anomex
