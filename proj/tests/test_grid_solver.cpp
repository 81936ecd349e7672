#include <doctest.h>

#include <cmath>
#include <random>

#include "anomex/errors.hpp"
#include "anomex/grid_solver.hpp"
#include "anomex/shooting.hpp"
#include "radial_scheme.hpp"

using namespace anomex;

namespace {

const OperatorSpec heat = OperatorSpec::linear(1.0);

std::vector<OperatorSpec> specs() {
  return {heat, OperatorSpec::pucci_plus(1, 2), OperatorSpec::pucci_minus(1, 2), OperatorSpec::barenblatt(0.5),
          dual(OperatorSpec::barenblatt(0.5)), OperatorSpec::max_of_linear({0.5, 2})};
}

ProfileField sampled(const RadialGrid& g, double (*f)(double)) {
  ProfileField out(g);
  for (std::size_t i = 0; i < g.nodes(); ++i) out.values[i] = f(g.r(i));
  return out;
}

// 1e-12 |v| plus the rounding floor of evaluating rows of size 1/h^2 in double.
double residual_bound(const OperatorSpec& spec, const RadialGrid& g, const ProfileField& v, const ProfileField& u) {
  const detail::RadialScheme s(spec, g, 1.0);
  return 1e-12 * v.sup_norm() + 8 * 2.2e-16 * s.max_diagonal() * u.sup_norm();
}

}  // namespace

TEST_CASE("assembled rows form an M-matrix under every policy") {
  for (const auto& spec : specs()) {
    for (int n : {1, 2, 3}) {
      for (double drift : {0.0, 1.0}) {
        const RadialGrid g(12.0, 240, n);
        const detail::RadialScheme s(spec, g, drift);
        for (std::size_t p = 0; p < s.policy_count(); ++p) {
          for (std::size_t i = 0; i < g.intervals(); ++i) {
            const double lo = i ? s.lower(p, i) : 0.0;
            REQUIRE(lo <= 0.0);
            REQUIRE(s.upper(p, i) <= 0.0);
            REQUIRE(s.diag(p, i) + lo + s.upper(p, i) >= -1e-9 * s.diag(p, i));
            REQUIRE(s.diag(p, i) > 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("resolvent inverts the heat eigen-equation") {
  for (int n : {1, 2, 3}) {
    const RadialGrid g(12.0, 1200, n);
    ProfileField v = sampled(g, [](double r) { return std::exp(-r * r / 4); });
    for (double& x : v.values) x *= 0.5 * n;
    const auto res = apply_resolvent(heat, g, v);
    double err = 0.0;
    for (std::size_t i = 0; i < g.nodes(); ++i) err = std::max(err, std::abs(res.u.values[i] - std::exp(-g.r(i) * g.r(i) / 4)));
    CHECK(err < 1e-4);
    CHECK(res.linear_residual <= residual_bound(heat, g, v, res.u));
    CHECK(res.policy_sweeps == 1);
  }
}

TEST_CASE("zero data, positivity and sweep count") {
  const RadialGrid g(12.0, 600, 2);
  const auto zero = apply_resolvent(OperatorSpec::pucci_plus(1, 2), g, ProfileField(g));
  for (double x : zero.u.values) CHECK(x == 0.0);

  const ProfileField bump = sampled(g, [](double r) { return std::exp(-4 * r * r); });
  const auto res = apply_resolvent(OperatorSpec::pucci_plus(1, 2), g, bump);
  for (std::size_t i = 0; i < g.intervals(); ++i) REQUIRE(res.u.values[i] > 0.0);
  CHECK(res.u.values.back() == 0.0);
  // Regression bound from the first verified run (3 sweeps).
  CHECK(res.policy_sweeps <= 10);
  CHECK(res.linear_residual <= residual_bound(OperatorSpec::pucci_plus(1, 2), g, bump, res.u));
}

TEST_CASE("resolvent is monotone and 1-homogeneous") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (const auto& spec : specs()) {
    const RadialGrid g(10.0, 200, 2);
    for (int k = 0; k < 10; ++k) {
      ProfileField v1(g), v2(g);
      for (std::size_t i = 0; i < g.intervals(); ++i) {
        v1.values[i] = u(rng) * std::exp(-0.1 * g.r(i) * g.r(i));
        v2.values[i] = v1.values[i] + u(rng) * 0.1;
      }
      const auto a1 = apply_resolvent(spec, g, v1);
      const auto a2 = apply_resolvent(spec, g, v2);
      for (std::size_t i = 0; i < g.nodes(); ++i) REQUIRE(a1.u.values[i] <= a2.u.values[i] + 1e-12);

      ProfileField scaled = v1;
      for (double& x : scaled.values) x *= 3.5;
      const auto a3 = apply_resolvent(spec, g, scaled);
      for (std::size_t i = 0; i < g.nodes(); ++i) {
        REQUIRE(a3.u.values[i] == doctest::Approx(3.5 * a1.u.values[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("power iteration") {
  SUBCASE("heat n=2") {
    const auto res = inverse_power_iteration(heat, RadialGrid(12.0, 1200, 2), 1e-10);
    CHECK(std::abs(res.alpha - 1.0) <= 1e-3);
    CHECK(res.profile.values[0] == 1.0);
    CHECK(res.method == Method::power_iteration);
    CHECK(res.bracket.first <= res.alpha + 1e-9);
    CHECK(res.alpha <= res.bracket.second + 1e-9);
    CHECK(res.residual <= 1e-4);
  }
  SUBCASE("pucci+ lambda=1 Lambda=2 n=2 sits strictly inside [1.5, 2]") {
    const auto res = inverse_power_iteration(OperatorSpec::pucci_plus(1, 2), RadialGrid(12.0, 1200, 2), 1e-10);
    CHECK(res.alpha > 1.5);
    CHECK(res.alpha < 2.0);
    for (std::size_t i = 0; i < res.profile.grid.intervals(); ++i) REQUIRE(res.profile.values[i] > 0.0);
  }
  SUBCASE("barenblatt gamma=0.5 n=1 agrees with shooting") {
    const RadialGrid g(10.0, 1000, 1);
    const double p = inverse_power_iteration(OperatorSpec::barenblatt(0.5), g, 1e-10).alpha;
    const double s = find_alpha_shooting(OperatorSpec::barenblatt(0.5), g, 1e-10).alpha;
    CHECK(std::abs(p - s) <= 1e-3);
  }
  SUBCASE("non-convergence is reported") {
    try {
      inverse_power_iteration(OperatorSpec::pucci_plus(1, 2), RadialGrid(12.0, 600, 2), 1e-12, 2);
      FAIL("expected NoConvergence");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoConvergence);
      CHECK(std::string(e.what()).find("bracket") != std::string::npos);
    }
  }
}

TEST_CASE("exponent pairs and duality") {
  const RadialGrid g2(12.0, 600, 2);
  const auto h = exponent_pair(heat, g2, 1e-10);
  CHECK(h.alpha_plus == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(h.alpha_minus == h.alpha_plus);

  const RadialGrid g1(10.0, 500, 1);
  const auto b = exponent_pair(OperatorSpec::barenblatt(0.5), g1, 1e-10);
  CHECK(b.alpha_plus < 0.5 - 0.01);
  CHECK(b.alpha_minus > 0.5 + 0.01);
  const auto d = exponent_pair(dual(OperatorSpec::barenblatt(0.5)), g1, 1e-10);
  CHECK(d.alpha_plus == b.alpha_minus);
  CHECK(d.alpha_minus == b.alpha_plus);

  const auto pp = exponent_pair(OperatorSpec::pucci_plus(1, 2), g2, 1e-10);
  const auto pm = exponent_pair(OperatorSpec::pucci_minus(1, 2), g2, 1e-10);
  CHECK(pp.alpha_minus == doctest::Approx(pm.alpha_plus).epsilon(1e-12));
}

TEST_CASE("discrete operator and argument checks") {
  const RadialGrid g(12.0, 1200, 2);
  std::vector<double> gauss(g.nodes());
  for (std::size_t i = 0; i < g.nodes(); ++i) gauss[i] = std::exp(-g.r(i) * g.r(i) / 4);
  const auto Lu = apply_discrete_operator(heat, g, gauss);
  for (std::size_t i = 0; g.r(i) <= 4.0; ++i) CHECK(Lu[i] == doctest::Approx(gauss[i]).epsilon(1e-3).scale(1e-4));
  CHECK(Lu.back() == 0.0);

  CHECK_THROWS_AS(apply_resolvent(heat, g, ProfileField(RadialGrid(12.0, 600, 2))), Error);
  ProfileField bad(g);
  bad.values[3] = std::nan("");
  CHECK_THROWS_AS(apply_resolvent(heat, g, bad), Error);
  CHECK_THROWS_AS(apply_discrete_operator(heat, g, std::vector<double>(3)), Error);
  CHECK_THROWS_AS(inverse_power_iteration(heat, g, 0.0), Error);
}
