#pragma once

// Independent reference computations used only by the tests.

#include <array>
#include <cmath>

#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <boost/numeric/odeint.hpp>

namespace oracle {

// Regular radial solution of  -phi'' - (n-1) phi'/r - r phi'/2 = alpha phi,  phi(0) = 1:
// Kummer's M(alpha, n/2, -r^2/4).
inline double heat_profile(double alpha, int n, double r) {
  return boost::math::hypergeometric_1F1(alpha, 0.5 * n, -0.25 * r * r);
}

// First zero of the heat profile on (0, R], or NaN.
inline double heat_first_zero(double alpha, int n, double R, double dr = 1e-3) {
  double prev = 1.0;
  for (double r = dr; r <= R; r += dr) {
    const double v = heat_profile(alpha, n, r);
    if (v <= 0.0) {
      double lo = r - dr, hi = r;
      for (int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (heat_profile(alpha, n, mid) > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = v;
  }
  (void)prev;
  return std::nan("");
}

// Barenblatt, n = 1: -c phi'' - r phi'/2 = alpha phi with c = 1/(1-gamma) where
// phi'' > 0 and 1/(1+gamma) where phi'' < 0. Adaptive Dormand-Prince.
inline bool barenblatt_1d_crosses(double gamma, double alpha, double R) {
  using state = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;
  auto rhs = [&](const state& x, state& dx, double r) {
    const double g = -(alpha * x[0] + 0.5 * r * x[1]);
    dx[0] = x[1];
    dx[1] = g > 0.0 ? g * (1.0 - gamma) : g * (1.0 + gamma);
  };
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<state>());
  state x{1.0, 0.0};
  double r = 0.0;
  double dr = 1e-3;
  while (r < R) {
    dr = std::min(dr, R - r);
    if (stepper.try_step(rhs, x, r, dr) == ode::fail) continue;
    if (x[0] <= 0.0) return true;
  }
  return false;
}

inline double barenblatt_1d_alpha(double gamma, double R) {
  double lo = (1.0 - gamma) / (2.0 * (1.0 + gamma)), hi = 0.5;
  for (int k = 0; k < 50; ++k) {
    const double mid = 0.5 * (lo + hi);
    (barenblatt_1d_crosses(gamma, mid, R) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

using rational = boost::multiprecision::cpp_rational;

inline rational pucci(const std::vector<rational>& s, const rational& lam, const rational& Lam, bool plus) {
  rational pos = 0, neg = 0;
  for (const auto& x : s) (x > 0 ? pos : neg) += x;
  return plus ? rational(-lam * pos - Lam * neg) : rational(-Lam * pos - lam * neg);
}

// Barenblatt F = -max(t/(1-gamma), t/(1+gamma)), t = trace.
inline rational barenblatt(const std::vector<rational>& s, const rational& gamma) {
  rational t = 0;
  for (const auto& x : s) t += x;
  const rational a = t / (1 - gamma), b = t / (1 + gamma);
  return -(a > b ? a : b);
}

}  // namespace oracle
