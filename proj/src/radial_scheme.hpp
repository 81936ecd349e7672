#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "anomex/grid.hpp"
#include "anomex/operator.hpp"

namespace anomex::detail {

// Monotone three-point discretization of
//   F(D^2 u) - drift * (r/2) u'
// on a radial grid. Each node gets one first-difference stencil shared by all
// policies: central where it keeps every policy's off-diagonals nonpositive,
// forward otherwise (the u' coefficient is never positive). Row N is Dirichlet.
class RadialScheme {
 public:
  RadialScheme(const OperatorSpec& spec, const RadialGrid& grid, double drift);

  const RadialGrid& grid() const { return grid_; }
  const RadialPolicySet& policies() const { return set_; }
  std::size_t policy_count() const { return set_.policies.size(); }
  bool central(std::size_t i) const { return central_[i] != 0; }
  /// Largest diagonal entry over nodes and policies.
  double max_diagonal() const { return max_diag_; }

  double lower(std::size_t p, std::size_t i) const { return lo_[p][i]; }
  double diag(std::size_t p, std::size_t i) const { return di_[p][i]; }
  double upper(std::size_t p, std::size_t i) const { return up_[p][i]; }

  /// out[i] = opt_p (L_p u)_i for i < N, out[N] = 0.
  void apply(std::span<const double> u, std::span<double> out) const;
  /// (L_p u)_i under a per-node policy.
  void apply(std::span<const double> u, std::span<const std::size_t> policy,
             std::span<double> out) const;
  /// Optimal policy at node i; `current` wins near-ties.
  std::size_t select(std::span<const double> u, std::size_t i, std::size_t current) const;

 private:
  double row(std::size_t p, std::size_t i, std::span<const double> u) const {
    const double left = i > 0 ? lo_[p][i] * u[i - 1] : 0.0;
    return left + di_[p][i] * u[i] + up_[p][i] * u[i + 1];
  }

  RadialGrid grid_;
  RadialPolicySet set_;
  std::vector<char> central_;
  std::vector<std::vector<double>> lo_, di_, up_;
  double max_diag_ = 0.0;
};

/// Solves a tridiagonal system in place (Thomas). Rows are (lo, di, up); lo[0]
/// and up[m-1] are ignored. Throws SingularSystem on a zero pivot.
void solve_tridiagonal(std::span<const double> lo, std::span<const double> di,
                       std::span<const double> up, std::span<double> rhs);

}  // namespace anomex::detail
