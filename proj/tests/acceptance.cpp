// Acceptance run: one PASS/FAIL line per criterion, followed by indented detail.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "anomex/errors.hpp"
#include "anomex/grid_solver.hpp"
#include "anomex/parabolic.hpp"
#include "anomex/shooting.hpp"
#include "anomex/verification.hpp"

using namespace anomex;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool passed = true;
  std::vector<std::string> lines;

  void require(bool ok, const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    lines.push_back(std::string(ok ? "  ok   " : "  FAIL ") + buf);
    passed &= ok;
  }
  void note(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    lines.push_back(std::string("       ") + buf);
  }
};

struct Profile {
  std::string label;
  OperatorSpec spec;
  ProfileField phi;
};

// Converged profiles from criteria 1-3, checked again by criterion 9.
std::vector<Profile> g_profiles;

const char* label(const OperatorSpec& s) {
  static thread_local std::string text;
  text = to_string(s);
  return text.c_str();
}

// --- 1 ------------------------------------------------------------------------

Outcome linear_recovery() {
  Outcome o;
  for (double c : {0.5, 1.0, 2.0}) {
    const auto spec = OperatorSpec::linear(c);
    for (int n : {1, 2, 3}) {
      const auto t0 = Clock::now();
      const RadialGrid g(12.0, 1200, n);
      const double half = n / 2.0;
      const EigenResult res[] = {find_alpha_shooting(spec, g, 1e-10), inverse_power_iteration(spec, g, 1e-10),
                                 normalized_rescaled_flow(spec, g)};
      const double elapsed = seconds_since(t0);
      double worst_alpha = 0.0, worst_profile = 0.0;
      for (const auto& r : res) {
        worst_alpha = std::max(worst_alpha, std::abs(r.alpha - half));
        for (std::size_t i = 0; g.r(i) <= 4.0; ++i) {
          worst_profile = std::max(worst_profile, std::abs(r.profile.values[i] - std::exp(-g.r(i) * g.r(i) / (4 * c))));
        }
        g_profiles.push_back({std::string(label(spec)) + " n=" + std::to_string(n) + " " +
                                  std::string(to_string(r.method)),
                              spec, r.profile});
      }
      o.require(worst_alpha <= 1e-3 && worst_profile <= 1e-4 && elapsed < 10.0,
                "c=%g n=%d: alphas %.10f %.10f %.10f, max|alpha-n/2|=%.2e, profile err (r<=4)=%.2e, %.2fs", c, n,
                res[0].alpha, res[1].alpha, res[2].alpha, worst_alpha, worst_profile, elapsed);
    }
  }
  return o;
}

// --- 2 ------------------------------------------------------------------------

Outcome pucci_sandwich() {
  Outcome o;
  const auto t0 = Clock::now();
  const RadialGrid g(12.0, 1200, 2);
  const auto minus = inverse_power_iteration(OperatorSpec::pucci_minus(1, 2), g, 1e-10);
  const auto plus = inverse_power_iteration(OperatorSpec::pucci_plus(1, 2), g, 1e-10);
  g_profiles.push_back({"pucci- n=2 power", OperatorSpec::pucci_minus(1, 2), minus.profile});
  g_profiles.push_back({"pucci+ n=2 power", OperatorSpec::pucci_plus(1, 2), plus.profile});
  const double m_minus = std::min(minus.alpha - 0.5, 0.75 - minus.alpha);
  const double m_plus = std::min(plus.alpha - 1.5, 2.0 - plus.alpha);
  const double elapsed = seconds_since(t0);
  o.require(m_minus > 0.01, "alpha+(P-) = %.10f in [0.5, 0.75], margin %.4f", minus.alpha, m_minus);
  o.require(m_plus > 0.01, "alpha+(P+) = %.10f in [1.5, 2.0], margin %.4f", plus.alpha, m_plus);
  o.require(elapsed < 30.0, "%.2fs", elapsed);
  const auto chain = check_exponent_chain(minus.alpha, plus.alpha, EllipticityBounds::make(1, 2), 2,
                                          2 * (1e-10 + 5 * g.h() * g.h()));
  o.require(chain.passed, "full exponent chain, worst link margin %.4f", chain.worst_slack);
  return o;
}

// --- 3 ------------------------------------------------------------------------

struct Triple {
  double shooting, power, flow;
  double spread() const {
    return std::max({std::abs(shooting - power), std::abs(shooting - flow), std::abs(power - flow)});
  }
};

constexpr double kSolveTol = 1e-11;

Triple solve_all(const OperatorSpec& spec, const RadialGrid& g, bool keep, const std::string& name) {
  const auto s = find_alpha_shooting(spec, g, kSolveTol);
  const auto p = inverse_power_iteration(spec, g, kSolveTol);
  const auto f = [&] {
    for (double s_final = 20.0;; s_final *= 2) {
      try {
        return normalized_rescaled_flow(spec, g, s_final, 1e-8);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoConvergence || s_final >= 160.0) throw;
      }
    }
  }();
  if (keep) {
    g_profiles.push_back({name + " shooting", spec, s.profile});
    g_profiles.push_back({name + " power", spec, p.profile});
    g_profiles.push_back({name + " flow", spec, f.profile});
  }
  return {s.alpha, p.alpha, f.alpha};
}

Outcome cross_method() {
  Outcome o;
  const std::vector<OperatorSpec> specs{OperatorSpec::linear(1),        OperatorSpec::pucci_plus(1, 2),
                                        OperatorSpec::pucci_minus(1, 2), OperatorSpec::barenblatt(0.1),
                                        OperatorSpec::barenblatt(0.5),  OperatorSpec::barenblatt(0.9)};
  for (const auto& spec : specs) {
    // Lambda = 10 for gamma = 0.9: the profile needs the larger domain.
    const double R = spec.bounds().Lambda > 5 ? 24.0 : 12.0;
    for (int n : {1, 2}) {
      const auto t0 = Clock::now();
      const std::string name = std::string(label(spec)) + " n=" + std::to_string(n);
      const RadialGrid fine = RadialGrid::with_spacing(R, 0.01, n);
      const RadialGrid coarse = RadialGrid::with_spacing(R, 0.02, n);
      const Triple a = solve_all(spec, fine, true, name);
      const Triple b = solve_all(spec, coarse, false, name);
      const double allowed = std::max(2e-3, 5 * fine.h() * fine.h());
      // Shooting integrates the ODE; power and flow share the grid discretization,
      // so the shooting-grid gap is the one that must shrink under halving.
      const double gap_fine = std::abs(a.shooting - a.power);
      const double gap_coarse = std::abs(b.shooting - b.power);
      const double ratio = gap_coarse / gap_fine;
      o.require(a.spread() <= allowed, "%-28s alphas %.10f %.10f %.10f spread %.2e (allowed %.1e), %.1fs",
                name.c_str(), a.shooting, a.power, a.flow, a.spread(), allowed, seconds_since(t0));
      // Gaps within ten solve tolerances carry no discretization error left to halve.
      const double floor = 10 * kSolveTol;
      if (gap_coarse <= floor && gap_fine <= floor) {
        o.require(true, "%-28s |shoot-power| h=0.02: %.3e  h=0.01: %.3e  (at the %.0e solve floor)", name.c_str(),
                  gap_coarse, gap_fine, floor);
      } else {
        o.require(ratio >= 3.0, "%-28s |shoot-power| h=0.02: %.3e  h=0.01: %.3e  ratio %.2f", name.c_str(),
                  gap_coarse, gap_fine, ratio);
      }
    }
  }
  return o;
}

// --- 4 ------------------------------------------------------------------------

Outcome duality() {
  Outcome o;
  const RadialGrid g(12.0, 1200, 1);
  for (const auto& spec : {OperatorSpec::barenblatt(0.5), OperatorSpec::pucci_plus(1, 2), OperatorSpec::linear(1)}) {
    const auto p = exponent_pair(spec, g, 1e-10);
    const auto q = exponent_pair(dual(spec), g, 1e-10);
    const double swap = std::max(std::abs(p.alpha_plus - q.alpha_minus), std::abs(p.alpha_minus - q.alpha_plus));
    o.require(swap <= 1e-14, "%-24s pair (%.10f, %.10f), dual pair (%.10f, %.10f), swap error %.1e", label(spec),
              p.alpha_plus, p.alpha_minus, q.alpha_plus, q.alpha_minus, swap);
    if (spec == OperatorSpec::barenblatt(0.5)) {
      o.require(p.alpha_plus < 0.5 - 0.01 && p.alpha_minus > 0.5 + 0.01,
                "barenblatt 0.5: alpha+ = %.6f < 0.5 < alpha- = %.6f, margins %.4f / %.4f", p.alpha_plus,
                p.alpha_minus, 0.5 - p.alpha_plus, p.alpha_minus - 0.5);
    }
  }
  return o;
}

// --- 5 ------------------------------------------------------------------------

Outcome gaussian_bounds() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = INFINITY, gap = 0.0;
  bool all = true;
  for (auto [lam, Lam] : {std::pair{1.0, 1.0}, {1.0, 2.0}, {1.0, 4.0}}) {
    const auto b = EllipticityBounds::make(lam, Lam);
    for (int n : {1, 2, 3}) {
      const auto [minus, plus] = check_gaussian_bounds(b, n, gaussian_bounds_samples(b, 1000));
      all &= minus.passed && plus.passed;
      worst = std::min({worst, minus.worst_slack, plus.worst_slack});
      gap = std::max(gap, gaussian_bounds_branch_gap(b, n));
      if (!minus.passed || !plus.passed) o.note("lambda=%g Lambda=%g n=%d failed", lam, Lam, n);
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(all && worst >= -1e-12, "9 cases x 2 bounds, 1000 samples each: worst slack %.3e", worst);
  o.require(gap <= 1e-14, "branch continuity at (2a)^(-1/2): max gap %.1e", gap);
  o.require(elapsed < 1.0, "%.3fs", elapsed);
  return o;
}

// --- 6 ------------------------------------------------------------------------

Outcome subsolution() {
  Outcome o;
  const auto b = EllipticityBounds::make(1, 2);
  for (int n : {1, 2}) {
    const auto c = subsolution_constants(b, n);
    const double a = 1.0 / 2.0;
    const double beta = 1 + 2 * a * 2 * n;
    const double r1 = 2 * (beta + 2 + 1);
    const double log_delta = r1 - a * r1 * r1 - std::log(beta + 1);
    o.require(c.a == a && c.beta == beta && c.r1 == r1 && c.log_delta == log_delta,
              "n=%d: a=%g beta=%g r1=%g log(delta)=%.15g", n, c.a, c.beta, c.r1, c.log_delta);
    const auto res = check_special_subsolution(b, n, subsolution_samples(b, n, 500, 7));
    o.require(res.passed, "n=%d: 500 samples, worst slack %.3e at |y|=%.4g", n, res.worst_slack, res.location);
    const auto fd = check_subsolution_derivatives(b, n, 50, 11);
    o.require(fd.worst_slack >= -1e-8, "n=%d: analytic vs finite-difference derivatives, worst rel. error %.2e", n,
              -fd.worst_slack);
  }
  return o;
}

// --- 7 ------------------------------------------------------------------------

Outcome desk_scale() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto spec = OperatorSpec::barenblatt(0.5);
  const RadialGrid g(24.0, 2400, 1);
  const auto eig = inverse_power_iteration(spec, g, 1e-12);
  ProfileField data(g);
  for (std::size_t i = 0; i < g.intervals(); ++i) data.values[i] = std::exp(-g.r(i) * g.r(i));
  const auto rep = convergence_report(spec, data, eig.alpha, eig.profile, {4.0, 16.0, 64.0, 256.0});
  const double elapsed = seconds_since(t0);
  bool decreasing = true;
  for (std::size_t k = 0; k < rep.sigmas.size(); ++k) {
    o.note("sigma=%-4g C*=%.8f sup_rel_err=%.3e", rep.sigmas[k], rep.cstar[k], rep.sup_rel_err[k]);
    if (k) decreasing &= rep.sup_rel_err[k] < rep.sup_rel_err[k - 1];
  }
  o.require(decreasing, "sup_rel_err decreases along sigma = 4, 16, 64, 256 (alpha = %.10f)", eig.alpha);
  o.require(rep.sup_rel_err.back() < 0.02, "sup_rel_err(256) = %.3e < 2%%", rep.sup_rel_err.back());
  o.require(rep.cauchy_diff.back() < 0.01, "C* Cauchy difference (64 -> 256) = %.3e < 1%%", rep.cauchy_diff.back());
  o.require(elapsed < 300.0, "%.1fs", elapsed);
  return o;
}

// --- 8 ------------------------------------------------------------------------

Outcome comparison() {
  Outcome o;
  const std::vector<OperatorSpec> specs{OperatorSpec::linear(1),        OperatorSpec::pucci_plus(1, 2),
                                        OperatorSpec::pucci_minus(1, 2), OperatorSpec::barenblatt(0.5),
                                        dual(OperatorSpec::barenblatt(0.1))};
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_pair = [&](const RadialGrid& g) {
    ProfileField lo(g), hi(g);
    const double b = 0.05 + unit(rng);
    for (std::size_t i = 0; i < g.intervals(); ++i) {
      const double env = std::exp(-b * g.r(i) * g.r(i));
      lo.values[i] = env * unit(rng);
      hi.values[i] = lo.values[i] + env * unit(rng) * (unit(rng) < 0.3 ? 0.0 : 1.0);
    }
    return std::pair{lo, hi};
  };
  double worst_res = 0.0, worst_step = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto& spec = specs[k % specs.size()];
    const RadialGrid g(8.0, 200, 1 + k % 3);
    const auto [lo, hi] = random_pair(g);
    const auto ulo = apply_resolvent(spec, g, lo).u;
    const auto uhi = apply_resolvent(spec, g, hi).u;
    for (std::size_t i = 0; i < g.nodes(); ++i) worst_res = std::max(worst_res, ulo.values[i] - uhi.values[i]);
  }
  for (int k = 0; k < 100; ++k) {
    const auto& spec = specs[k % specs.size()];
    const RadialGrid g(8.0, 200, 1 + k % 3);
    auto [lo, hi] = random_pair(g);
    ParabolicState a{0.0, lo}, b{0.0, hi};
    const double dt = cfl_bound(spec, g);
    for (int s = 0; s < 100; ++s) {
      a = step_explicit(spec, a, dt);
      b = step_explicit(spec, b, dt);
      for (std::size_t i = 0; i < g.nodes(); ++i) worst_step = std::max(worst_step, a.u.values[i] - b.u.values[i]);
    }
  }
  o.require(worst_res <= 1e-12, "resolvent: 100 ordered pairs, max violation %.2e", worst_res);
  o.require(worst_step <= 1e-12, "explicit stepper: 100 ordered pairs x 100 steps, max violation %.2e", worst_step);
  return o;
}

// --- 9 ------------------------------------------------------------------------

Outcome envelopes() {
  Outcome o;
  double worst_c = 0.0;
  std::string worst_label;
  std::size_t failures = 0;
  for (const auto& p : g_profiles) {
    const auto fit = fit_envelopes(p.phi, p.spec.bounds());
    const bool ok = check_envelopes(p.phi, p.spec.bounds()).passed;
    const double c = std::max(fit.c_upper, fit.c_lower);
    if (!(c <= worst_c)) {
      worst_c = c;
      worst_label = p.label;
    }
    if (!ok) {
      ++failures;
      o.note("%s: C1=%.3g C2=%.3g", p.label.c_str(), fit.c_upper, fit.c_lower);
    }
  }
  o.require(failures == 0 && std::isfinite(worst_c) && worst_c <= 1e6,
            "%zu profiles from criteria 1-3, largest constant %.3g (%s)", g_profiles.size(), worst_c,
            worst_label.c_str());
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"linear recovery", linear_recovery},   {"pucci sandwich", pucci_sandwich},
      {"cross-method agreement", cross_method}, {"duality", duality},
      {"gaussian test-function bounds", gaussian_bounds}, {"special subsolution", subsolution},
      {"desk-scale asymptotics", desk_scale},  {"discrete comparison", comparison},
      {"gaussian envelopes", envelopes},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, fn] : criteria) {
    ++index;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.passed = false;
      o.lines.push_back(std::string("  error: ") + e.what());
    }
    std::printf("criterion %d %-30s %s (%.1fs)\n", index, name, o.passed ? "PASS" : "FAIL", seconds_since(t0));
    for (const auto& line : o.lines) std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    failed += !o.passed;
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed;
}
