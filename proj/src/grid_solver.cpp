#include "anomex/grid_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "anomex/errors.hpp"
#include "anomex/shooting.hpp"
#include "radial_scheme.hpp"

namespace anomex {

namespace {

constexpr std::size_t kMaxSweeps = 100;

ResolventResult solve_resolvent(const detail::RadialScheme& scheme, const std::vector<double>& v,
                                std::vector<std::size_t> policy) {
  const auto& grid = scheme.grid();
  const std::size_t N = grid.intervals();
  std::vector<double> lo(N), di(N), up(N);
  std::vector<double> u(grid.nodes(), 0.0);

  ResolventResult res{ProfileField(grid), 0, 0.0, {}};
  for (;;) {
    if (res.policy_sweeps >= kMaxSweeps) {
      throw Error(ErrorKind::PolicyCycle, "policy did not stabilize after 100 sweeps");
    }
    ++res.policy_sweeps;
    for (std::size_t i = 0; i < N; ++i) {
      lo[i] = scheme.lower(policy[i], i);
      di[i] = scheme.diag(policy[i], i);
      up[i] = scheme.upper(policy[i], i);
    }
    std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(N), u.begin());
    detail::solve_tridiagonal(lo, di, up, std::span<double>(u.data(), N));
    u[N] = 0.0;

    bool changed = false;
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t p = scheme.select(u, i, policy[i]);
      changed |= p != policy[i];
      policy[i] = p;
    }
    if (!changed) break;
  }

  std::vector<double> Lu(grid.nodes());
  scheme.apply(u, policy, Lu);
  for (std::size_t i = 0; i < N; ++i) {
    res.linear_residual = std::max(res.linear_residual, std::abs(Lu[i] - v[i]));
  }
  res.u.values = std::move(u);
  res.policy = std::move(policy);
  return res;
}

std::vector<std::size_t> initial_policy(const detail::RadialScheme& scheme, const std::vector<double>& v) {
  std::vector<std::size_t> policy(scheme.grid().intervals(), 0);
  for (std::size_t i = 0; i < policy.size(); ++i) policy[i] = scheme.select(v, i, 0);
  return policy;
}

}  // namespace

ResolventResult apply_resolvent(const OperatorSpec& spec, const RadialGrid& grid, const ProfileField& v) {
  if (!(v.grid == grid)) throw Error(ErrorKind::InvalidArgument, "right-hand side lives on another grid");
  for (double x : v.values) {
    if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "right-hand side is not finite");
  }
  const detail::RadialScheme scheme(spec, grid, 1.0);
  return solve_resolvent(scheme, v.values, initial_policy(scheme, v.values));
}

std::vector<double> apply_discrete_operator(const OperatorSpec& spec, const RadialGrid& grid,
                                            const std::vector<double>& u) {
  if (u.size() != grid.nodes()) throw Error(ErrorKind::InvalidArgument, "profile length does not match grid");
  const detail::RadialScheme scheme(spec, grid, 1.0);
  std::vector<double> out(grid.nodes());
  scheme.apply(u, out);
  return out;
}

EigenResult inverse_power_iteration(const OperatorSpec& spec, const RadialGrid& grid, double tol,
                                    std::size_t max_iter) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  const detail::RadialScheme scheme(spec, grid, 1.0);
  const std::size_t N = grid.intervals();
  const double b = 1.0 / (8.0 * spec.bounds().Lambda);

  std::vector<double> v(grid.nodes());
  for (std::size_t i = 0; i < N; ++i) v[i] = std::exp(-b * grid.r(i) * grid.r(i));
  v[N] = 0.0;

  std::vector<std::size_t> policy = initial_policy(scheme, v);
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double defect = std::numeric_limits<double>::infinity();
  std::pair<double, double> bracket{0.0, 0.0};

  for (std::size_t k = 1; k <= max_iter; ++k) {
    ResolventResult res = solve_resolvent(scheme, v, std::move(policy));
    policy = std::move(res.policy);
    auto& u = res.u.values;
    if (!(u[0] > 0.0)) throw Error(ErrorKind::NoConvergence, "resolvent lost positivity at the origin");

    // Collatz-Wielandt: alpha lies between the extreme ratios v/A(v).
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (u[i] > 0.0) {
        lo = std::min(lo, v[i] / u[i]);
        hi = std::max(hi, v[i] / u[i]);
      }
    }
    bracket = {lo, hi};

    const double next_alpha = 1.0 / u[0];
    defect = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      u[i] *= next_alpha;
      defect = std::max(defect, std::abs(u[i] - v[i]));
    }
    u[0] = 1.0;
    const bool done = std::abs(next_alpha - alpha) <= tol * next_alpha && defect <= tol;
    alpha = next_alpha;
    v.swap(u);
    if (done) {
      EigenResult out{alpha, ProfileField(grid, std::move(v)), Method::power_iteration, k, 0.0, bracket};
      out.residual = eigen_residual(spec, alpha, out.profile);
      return out;
    }
  }
  throw Error(ErrorKind::NoConvergence,
              "inverse power iteration: alpha=" + std::to_string(alpha) + " bracket=[" +
                  std::to_string(bracket.first) + ", " + std::to_string(bracket.second) +
                  "] profile defect=" + std::to_string(defect));
}

ExponentPair exponent_pair(const OperatorSpec& spec, const RadialGrid& grid, double tol) {
  EigenResult plus = inverse_power_iteration(spec, grid, tol);
  EigenResult minus = inverse_power_iteration(dual(spec), grid, tol);
  const double ap = plus.alpha;
  const double am = minus.alpha;
  return {ap, am, std::move(plus), std::move(minus)};
}

}  // namespace anomex
