#pragma once

// Operators F acting on symmetric matrices through their eigenvalues.
//
// Sign convention: the parabolic equation is u_t + F(D^2 u) = 0, so the heat
// operator is F(M) = -tr(M) and the Pucci operators are
//   P+(M) = -lambda * sum_{mu>0} mu - Lambda * sum_{mu<0} mu,
//   P-(M) = -Lambda * sum_{mu>0} mu - lambda * sum_{mu<0} mu.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace anomex {

struct EllipticityBounds {
  double lambda = 1.0;
  double Lambda = 1.0;

  /// Throws ValidationError unless 0 < lambda <= Lambda (both finite).
  static EllipticityBounds make(double lambda, double Lambda);

  bool operator==(const EllipticityBounds&) const = default;
};

enum class PucciSign { plus, minus };

/// Eigenvalues of a symmetric matrix; the length is the ambient dimension.
struct HessianSpectrum {
  std::vector<double> eigenvalues;

  std::size_t dim() const { return eigenvalues.size(); }
};

class OperatorSpec {
 public:
  enum class Kind { PucciPlus, PucciMinus, Barenblatt, LinearTrace, MaxOfLinearTrace, Dual };

  static OperatorSpec pucci_plus(double lambda, double Lambda);
  static OperatorSpec pucci_minus(double lambda, double Lambda);
  /// Barenblatt elasto-plastic filtration, gamma in (0,1).
  static OperatorSpec barenblatt(double gamma);
  static OperatorSpec linear(double c);
  static OperatorSpec max_of_linear(std::vector<double> coeffs);
  /// Wraps without simplification; use anomex::dual() for the simplifying form.
  static OperatorSpec dual_of(OperatorSpec inner);

  Kind kind() const { return kind_; }
  const EllipticityBounds& bounds() const { return bounds_; }

  double gamma() const;                      // Barenblatt only
  double coeff() const;                      // LinearTrace only
  const std::vector<double>& coeffs() const;  // MaxOfLinearTrace only
  const OperatorSpec& inner() const;         // Dual only

  bool operator==(const OperatorSpec& other) const;

 private:
  OperatorSpec(Kind kind, EllipticityBounds bounds) : kind_(kind), bounds_(bounds) {}

  Kind kind_;
  EllipticityBounds bounds_;
  double param_ = 0.0;
  std::vector<double> coeffs_;
  std::shared_ptr<const OperatorSpec> inner_;
};

double eval_pucci(std::span<const double> spectrum, const EllipticityBounds& bounds, PucciSign sign);
double eval_pucci(const HessianSpectrum& spectrum, const EllipticityBounds& bounds, PucciSign sign);

double eval_operator(const OperatorSpec& spec, std::span<const double> spectrum);
double eval_operator(const OperatorSpec& spec, const HessianSpectrum& spectrum);

/// F~(M) = -F(-M). Involutive; linear operators are returned unchanged.
OperatorSpec dual(const OperatorSpec& spec);

/// Hessian spectrum of a radial function: phi''(r) once, phi'(r)/r (n-1) times.
HessianSpectrum radial_hessian_spectrum(double second_radial, double slope_over_r, int n);

struct SandwichReport {
  double max_violation = 0.0;  // most negative slack seen
  bool passed = true;
};

struct HomogeneityReport {
  double max_relative_error = 0.0;
  bool passed = true;
};

/// P-(M-N) <= F(M)-F(N) <= P+(M-N) on random commuting pairs, tolerance 1e-12.
SandwichReport check_ellipticity_sandwich(const OperatorSpec& spec, int trials, std::uint64_t seed,
                                          int dim = 3);
/// Same inequality against caller-supplied bounds (to detect misconfigured specs).
SandwichReport check_ellipticity_sandwich(const OperatorSpec& spec, const EllipticityBounds& bounds,
                                          int trials, std::uint64_t seed, int dim = 3);

/// F(eta M) = eta F(M) for eta in {0} u [0.1, 10], tolerance 1e-14 relative to
/// max(|eta F(M)|, Lambda * sum |eta mu_j|).
HomogeneityReport check_homogeneity(const OperatorSpec& spec, int trials, std::uint64_t seed,
                                    int dim = 3);

// Canonical text form: "pucci+ lambda=1 Lambda=2", "pucci- lambda=1 Lambda=2",
// "barenblatt gamma=0.5", "linear c=1", "maxlinear c=0.5,1,2", "dual(<spec>)".
OperatorSpec parse_operator(std::string_view text);
std::string to_string(const OperatorSpec& spec);

// ---------------------------------------------------------------------------
// Radial policy form. Every supported F restricted to radial spectra
// (d2 once, q repeated n-1 times) is an extremum over a finite set of
// coefficient pairs:  F = opt_p [ -c_rad * d2 - c_tan * (n-1) * q ].

struct RadialPolicy {
  double c_rad;
  double c_tan;

  bool operator==(const RadialPolicy&) const = default;
};

enum class PolicySense { max, min };

struct RadialPolicySet {
  std::vector<RadialPolicy> policies;
  PolicySense sense = PolicySense::max;

  double apply(std::size_t p, double d2, double q, int n) const {
    const auto& c = policies[p];
    return -c.c_rad * d2 - c.c_tan * (n - 1) * q;
  }

  double eval(double d2, double q, int n) const;

  /// Index of an optimal policy; `current` is kept when it is still optimal
  /// (ties never switch, so Howard iteration cannot cycle on them).
  std::size_t select(double d2, double q, int n, std::size_t current) const;

  bool better(double candidate, double incumbent) const {
    return sense == PolicySense::max ? candidate > incumbent : candidate < incumbent;
  }
};

RadialPolicySet radial_policies(const OperatorSpec& spec);

/// Solves F(d2, q) = target for d2 (F is strictly decreasing in d2).
/// Throws NonMonotoneInversion if no root can be bracketed.
double invert_radial_curvature(const RadialPolicySet& set, double q, int n, double target);

}  // namespace anomex
