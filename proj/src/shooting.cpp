#include "anomex/shooting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "anomex/errors.hpp"

namespace anomex {

namespace {

constexpr double kOverflow = 1e300;
constexpr int kSeriesTerms = 10;

using real = long double;

struct State {
  real phi;
  real slope;
};

// Curvature along the ray d2 = q = c at the origin: solves F(c,...,c) = alpha.
// Returns the active policy index.
std::size_t origin_policy(const RadialPolicySet& set, int n, double alpha) {
  std::size_t best = 0;
  double root = 0.0;
  for (std::size_t p = 0; p < set.policies.size(); ++p) {
    const auto& c = set.policies[p];
    const double rp = -alpha / (c.c_rad + (n - 1) * c.c_tan);
    const bool take = p == 0 || (set.sense == PolicySense::max ? rp > root : rp < root);
    if (take) {
      root = rp;
      best = p;
    }
  }
  return best;
}

// Even power series phi = sum a_j r^{2j} of the linear ODE selected by `c` at the origin.
State origin_series(const RadialPolicy& c, int n, real alpha, real r) {
  real a = 1.0L;
  const real r2 = r * r;
  real rpow = 1.0L;  // r^{2j}
  State s{0.0L, 0.0L};
  for (int j = 0; j < kSeriesTerms; ++j) {
    s.phi += a * rpow;
    if (j > 0) s.slope += 2.0L * j * a * rpow / r;
    const real jj = j;
    a *= -(jj + alpha) /
         (real(c.c_rad) * (2 * jj + 2) * (2 * jj + 1) + real(c.c_tan) * (n - 1) * (2 * jj + 2));
    rpow *= r2;
  }
  return s;
}

// Taylor expansion in x = r - r0 of the linear ODE on one branch,
//   c_rad r phi'' + (K + r^2/2) phi' + alpha r phi = 0,  K = c_tan (n-1),
// which is the eigen equation multiplied through by r.
class BranchSeries {
 public:
  static constexpr int kMaxTerms = 96;

  BranchSeries(const RadialPolicy& c, int n, real alpha, real r0, State s, real span) : r0_(r0) {
    const real crad = c.c_rad;
    const real K = real(c.c_tan) * (n - 1);
    a_[0] = s.phi;
    a_[1] = s.slope;
    const real scale = std::fabs(s.phi) + std::fabs(s.slope) * span + 1e-300L;
    int small = 0;
    terms_ = 2;
    real span_pow = span;  // span^{m+1}
    for (int m = 0; m + 2 < kMaxTerms; ++m) {
      const real am1 = m > 0 ? a_[m - 1] : 0.0L;
      const real rest = crad * (m + 1) * m * a_[m + 1] + K * (m + 1) * a_[m + 1] +
                        0.5L * (r0 * r0 * (m + 1) * a_[m + 1] + 2 * r0 * m * a_[m] + (m - 1) * am1) +
                        alpha * (r0 * a_[m] + am1);
      a_[m + 2] = -rest / (crad * r0 * (m + 2) * (m + 1));
      terms_ = m + 3;
      span_pow *= span;
      const real contrib = std::fabs(a_[m + 2]) * span_pow * span;
      small = contrib < 1e-22L * scale ? small + 1 : 0;
      if (small >= 3) break;
    }
  }

  State at(real x) const {
    real phi = 0.0L;
    real slope = 0.0L;
    for (int k = terms_ - 1; k >= 0; --k) {
      phi = phi * x + a_[k];
      if (k >= 1) slope = slope * x + k * a_[k];
    }
    return {phi, slope};
  }

  real curvature(real x) const {
    real d2 = 0.0L;
    for (int k = terms_ - 1; k >= 2; --k) d2 = d2 * x + real(k) * (k - 1) * a_[k];
    return d2;
  }

  real r0() const { return r0_; }

 private:
  real r0_;
  int terms_ = 0;
  std::array<real, kMaxTerms> a_{};
};

class RadialOde {
 public:
  RadialOde(const RadialPolicySet& set, int n, double alpha) : set_(set), n_(n), alpha_(alpha) {}

  real curvature(real r, const State& s) const {
    const double q = static_cast<double>(s.slope / r);
    const double target = static_cast<double>(alpha_ * s.phi + 0.5L * r * s.slope);
    return invert_radial_curvature(set_, q, n_, target);
  }

  State rk4(real r, const State& s, real dr) const {
    auto f = [&](real rr, const State& st) { return State{st.slope, curvature(rr, st)}; };
    const State k1 = f(r, s);
    const State k2 = f(r + 0.5L * dr, {s.phi + 0.5L * dr * k1.phi, s.slope + 0.5L * dr * k1.slope});
    const State k3 = f(r + 0.5L * dr, {s.phi + 0.5L * dr * k2.phi, s.slope + 0.5L * dr * k2.slope});
    const State k4 = f(r + dr, {s.phi + dr * k3.phi, s.slope + dr * k3.slope});
    // Round through double so this path is a plain double-precision RK4.
    return {static_cast<double>(s.phi + dr / 6.0L * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi)),
            static_cast<double>(s.slope + dr / 6.0L * (k1.slope + 2 * k2.slope + 2 * k3.slope + k4.slope))};
  }

  // Advances by dr along the active branch, stopping at branch switches.
  State taylor(real r, State s, real dr, std::size_t& policy) const {
    policy = set_.select(static_cast<double>(curvature(r, s)), static_cast<double>(s.slope / r), n_,
                         policy);
    real done = 0.0L;
    for (int switches = 0; done < dr; ++switches) {
      const real rr = r + done;
      const real span = dr - done;
      const BranchSeries series(set_.policies[policy], n_, alpha_, rr, s, span);
      auto optimal_at = [&](real x) {
        const State st = series.at(x);
        return set_.select(static_cast<double>(series.curvature(x)),
                           static_cast<double>(st.slope / (rr + x)), n_, policy);
      };
      if (switches > 16 || optimal_at(span) == policy) {
        s = series.at(span);
        break;
      }
      real lo = 0.0L;
      real hi = span;
      for (int it = 0; it < 64 && hi - lo > 1e-18L * span; ++it) {
        const real mid = 0.5L * (lo + hi);
        (optimal_at(mid) == policy ? lo : hi) = mid;
      }
      s = series.at(hi);
      done += hi;
      // The branch that is optimal just past the switch, judged on the same
      // long-double data that located it.
      policy = optimal_at(hi);
    }
    return s;
  }

 private:
  const RadialPolicySet& set_;
  int n_;
  real alpha_;
};

}  // namespace

ShootingOutcome shoot(const OperatorSpec& spec, const RadialGrid& grid, double alpha,
                      ShootingScheme scheme) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  const auto set = radial_policies(spec);
  const int n = grid.dim();
  const real h = grid.h();
  const double lam = spec.bounds().lambda;
  const double Lam = spec.bounds().Lambda;

  ShootingOutcome out;
  out.values.assign(grid.nodes(), 0.0);
  out.values[0] = 1.0;

  std::size_t policy = origin_policy(set, n, alpha);
  State s = origin_series(set.policies[policy], n, alpha, h);
  out.values[1] = static_cast<double>(s.phi);
  if (s.phi <= 0.0L) {
    out.classification = ShootingOutcome::Class::CrossesZero;
    out.r_cross = out.final_r = grid.h();
    return out;
  }

  const RadialOde ode(set, n, alpha);
  for (std::size_t i = 1; i < grid.intervals(); ++i) {
    const real r0 = static_cast<real>(i) * h;
    int sub = 1;
    if (scheme == ShootingScheme::taylor) {
      // The local series about r0 converges within radius r0.
      sub = std::max(1, static_cast<int>(std::ceil(4.0 / static_cast<double>(i))));
    } else {
      // Stiff phi'/r and drift terms: keep RK4 inside its stability region.
      const double rate = (n - 1) * Lam / (lam * static_cast<double>(r0)) +
                          static_cast<double>(r0) / (2.0 * lam);
      sub = std::max(1, static_cast<int>(std::ceil(static_cast<double>(h) * rate / 1.5)));
    }
    const real dr = h / sub;
    for (int k = 0; k < sub; ++k) {
      s = scheme == ShootingScheme::taylor ? ode.taylor(r0 + k * dr, s, dr, policy)
                                           : ode.rk4(r0 + k * dr, s, dr);
    }

    const double phi = static_cast<double>(s.phi);
    if (!std::isfinite(phi) || std::abs(phi) > kOverflow) {
      throw Error(ErrorKind::Overflow, "shooting solution overflowed");
    }
    if (phi <= 0.0) {
      const double prev = out.values[i];
      out.classification = ShootingOutcome::Class::CrossesZero;
      out.r_cross = static_cast<double>(r0) + grid.h() * prev / (prev - phi);
      out.final_r = grid.r(i + 1);
      out.final_log_derivative = -std::numeric_limits<double>::infinity();
      return out;
    }
    out.values[i + 1] = phi;
  }

  out.final_r = grid.R_max();
  out.final_log_derivative = static_cast<double>(s.slope / s.phi);
  out.classification = out.final_log_derivative <= -grid.R_max() / (4.0 * Lam)
                           ? ShootingOutcome::Class::FastDecay
                           : ShootingOutcome::Class::SlowDecay;
  return out;
}

EigenResult find_alpha_shooting(const OperatorSpec& spec, const RadialGrid& grid, double tol,
                                ShootingScheme scheme) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  const auto [amin, amax] = exponent_bounds(spec.bounds(), grid.dim());
  double lo = amin * (1.0 - 1e-6);
  double hi = amax * (1.0 + 1e-6);

  auto crosses = [&](const ShootingOutcome& o) {
    return o.classification == ShootingOutcome::Class::CrossesZero;
  };

  ShootingOutcome below = shoot(spec, grid, lo, scheme);
  ShootingOutcome above = shoot(spec, grid, hi, scheme);
  // Dirichlet truncation lifts the exponent above the whole-space bound by
  // roughly R^n exp(-R^2/(4 Lambda)); widen the top of the bracket to cover it.
  for (double pad = 4e-6; !crosses(above) && pad < 1.0; pad *= 4.0) {
    lo = hi;
    below = std::move(above);
    hi = amax * (1.0 + pad);
    above = shoot(spec, grid, hi, scheme);
  }
  if (crosses(below) == crosses(above)) {
    throw Error(ErrorKind::BracketFailure,
                "both bracket endpoints classify identically; R_max too small or invalid operator");
  }

  std::size_t iterations = 0;
  while (hi - lo >= tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ShootingOutcome o = shoot(spec, grid, mid, scheme);
    if (crosses(o)) {
      hi = mid;
    } else {
      lo = mid;
      below = std::move(o);
    }
    ++iterations;
  }

  ProfileField profile(grid, std::move(below.values));
  profile.normalize();
  const double alpha = 0.5 * (lo + hi);
  EigenResult result{alpha, profile, Method::shooting, iterations, 0.0, {lo, hi}};
  result.residual = eigen_residual(spec, alpha, result.profile);
  return result;
}

double eigen_residual(const OperatorSpec& spec, double alpha, const ProfileField& profile) {
  const auto set = radial_policies(spec);
  const auto& g = profile.grid;
  const auto& u = profile.values;
  const int n = g.dim();
  const double h = g.h();
  const auto last = static_cast<std::size_t>(std::floor(0.95 * static_cast<double>(g.intervals())));

  double worst = 0.0;
  {
    const double c = 2.0 * (u[1] - u[0]) / (h * h);
    worst = std::abs(set.eval(c, c, n) - alpha * u[0]);
  }
  for (std::size_t i = 1; i < last; ++i) {
    const double r = g.r(i);
    const double d2 = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (h * h);
    const double d1 = (u[i + 1] - u[i - 1]) / (2.0 * h);
    const double defect = set.eval(d2, d1 / r, n) - 0.5 * r * d1 - alpha * u[i];
    worst = std::max(worst, std::abs(defect));
  }
  return worst;
}

}  // namespace anomex
