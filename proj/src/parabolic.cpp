#include "anomex/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "anomex/errors.hpp"
#include "radial_scheme.hpp"

namespace anomex {

namespace {

void explicit_step(const detail::RadialScheme& scheme, std::vector<double>& u, std::vector<double>& Fu,
                   double dt) {
  scheme.apply(u, Fu);
  const std::size_t N = scheme.grid().intervals();
  for (std::size_t i = 0; i < N; ++i) u[i] -= dt * Fu[i];
  u[N] = 0.0;
}

void check_monotone(const detail::RadialScheme& scheme, double dt) {
  if (dt * scheme.max_diagonal() > 1.0 + 1e-12) {
    throw Error(ErrorKind::CFLViolation, "time step breaks monotonicity of the explicit scheme");
  }
}

ProfileField coarsened(const ProfileField& u) {
  const RadialGrid& g = u.grid;
  const std::size_t N = g.intervals();
  RadialGrid wide(2.0 * g.R_max(), N, g.dim());
  ProfileField out(wide);
  for (std::size_t j = 0; 2 * j <= N; ++j) out.values[j] = u.values[2 * j];
  return out;
}

}  // namespace

double cfl_bound(const OperatorSpec& spec, const RadialGrid& grid) {
  return grid.h() * grid.h() / (2.0 * grid.dim() * spec.bounds().Lambda);
}

ParabolicState step_explicit(const OperatorSpec& spec, const ParabolicState& state, double dt) {
  const RadialGrid& grid = state.u.grid;
  if (!(dt >= 0.0) || dt > cfl_bound(spec, grid) * (1.0 + 1e-12)) {
    throw Error(ErrorKind::CFLViolation,
                "dt=" + std::to_string(dt) + " exceeds h^2/(2 n Lambda)=" + std::to_string(cfl_bound(spec, grid)));
  }
  const detail::RadialScheme scheme(spec, grid, 0.0);
  check_monotone(scheme, dt);
  ParabolicState next{state.t + dt, state.u};
  std::vector<double> Fu(grid.nodes());
  explicit_step(scheme, next.u.values, Fu, dt);
  return next;
}

ParabolicTrace evolve_cauchy(const OperatorSpec& spec, const ProfileField& g, double t_final,
                             const std::vector<double>& snapshot_times, const EvolveOptions& opt) {
  if (!(opt.t0 >= 0.0) || !(t_final > opt.t0)) {
    throw Error(ErrorKind::InvalidArgument, "t_final must exceed the initial time");
  }
  if (!(opt.cfl_fraction > 0.0 && opt.cfl_fraction <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "cfl_fraction must lie in (0, 1]");
  }
  double sup = 0.0;
  for (double x : g.values) {
    if (!std::isfinite(x) || x < 0.0) throw Error(ErrorKind::InvalidArgument, "initial data must be finite and >= 0");
    sup = std::max(sup, x);
  }
  if (sup == 0.0) throw Error(ErrorKind::InvalidArgument, "initial data vanishes identically");
  if (g.values.back() > 1e-12 * sup) {
    throw Error(ErrorKind::InvalidArgument, "initial data does not decay to 0 at R_max");
  }

  std::vector<double> snaps;
  for (double s : snapshot_times) {
    if (s > opt.t0 && s <= t_final) snaps.push_back(s);
  }
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

  const bool coarsen = opt.coarsen && g.grid.intervals() % 2 == 0;
  double next_coarse = 4.0;
  while (next_coarse <= opt.t0) next_coarse *= 4.0;

  ParabolicTrace trace;
  trace.alpha = opt.alpha;
  ProfileField u = g;
  u.values.back() = 0.0;
  double t = opt.t0;

  auto record = [&] {
    if (!trace.snapshots.empty() && trace.snapshots.back().first >= t) return;
    trace.snapshots.emplace_back(t, u.values[0]);
    if (std::isfinite(opt.alpha) && t > 0.0) {
      trace.cstar_estimates.emplace_back(t, std::pow(t, opt.alpha) * u.values[0]);
    }
  };

  auto scheme = std::make_unique<detail::RadialScheme>(spec, u.grid, 0.0);
  double dt = opt.cfl_fraction * cfl_bound(spec, u.grid);
  check_monotone(*scheme, dt);
  std::vector<double> Fu(u.grid.nodes());

  record();
  std::size_t next_snap = 0;
  std::size_t steps = 0;
  while (t < t_final) {
    double event = t_final;
    if (next_snap < snaps.size()) event = std::min(event, snaps[next_snap]);
    if (coarsen) event = std::min(event, next_coarse);

    double step = dt;
    bool lands = false;
    if (event - t <= dt * (1.0 + 1e-9)) {
      step = event - t;
      lands = true;
    }
    explicit_step(*scheme, u.values, Fu, step);
    t = lands ? event : t + step;
    ++steps;
    if (opt.record_stride > 0 && steps % opt.record_stride == 0) record();

    if (!lands) continue;
    if (next_snap < snaps.size() && t == snaps[next_snap]) {
      record();
      trace.profile_snapshots.push_back({t, u});
      ++next_snap;
    }
    if (coarsen && t == next_coarse) {
      u = coarsened(u);
      scheme = std::make_unique<detail::RadialScheme>(spec, u.grid, 0.0);
      dt = opt.cfl_fraction * cfl_bound(spec, u.grid);
      check_monotone(*scheme, dt);
      next_coarse *= 4.0;
    }
  }
  record();
  return trace;
}

ProfileField rescale_state(const ProfileField& u, double sigma, double alpha) {
  return rescale_state(u, sigma, alpha, u.grid);
}

ProfileField rescale_state(const ProfileField& u, double sigma, double alpha, const RadialGrid& target) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  const RadialGrid& src = u.grid;
  std::vector<double> x(src.nodes());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = src.r(i);
  std::vector<double> y = u.values;
  // Zero slope at r = 0: the even reflection of a radial profile.
  const boost::math::interpolators::pchip<std::vector<double>> interp(std::move(x), std::move(y), 0.0);

  const double stretch = std::sqrt(sigma);
  const double amp = std::pow(sigma, alpha);
  ProfileField out(target);
  for (std::size_t j = 0; j < target.nodes(); ++j) {
    const double r = stretch * target.r(j);
    if (r > src.R_max()) break;
    const double pos = r / src.h();
    const auto k = static_cast<std::size_t>(std::llround(pos));
    const double v = (k < src.nodes() && src.r(k) == r) ? u.values[k] : interp(r);
    out.values[j] = amp * v;
  }
  return out;
}

EigenResult normalized_rescaled_flow(const OperatorSpec& spec, const RadialGrid& grid, double s_final,
                                     double tol) {
  if (!(s_final >= 1.0)) throw Error(ErrorKind::InvalidArgument, "s_final must be at least 1");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  const detail::RadialScheme scheme(spec, grid, 1.0);
  const std::size_t N = grid.intervals();
  const double h = grid.h();
  const double bound = 0.9 * h * h / (2.0 * grid.dim() * spec.bounds().Lambda + 0.5 * h * grid.R_max());
  const auto steps = static_cast<std::size_t>(std::ceil(s_final / bound));
  const double dt = s_final / static_cast<double>(steps);
  check_monotone(scheme, dt);
  const double window = std::min(1.0, 0.5 * s_final);
  const std::size_t mark = steps - static_cast<std::size_t>(std::llround(window / dt));

  const double b = 1.0 / (8.0 * spec.bounds().Lambda);
  std::vector<double> phi(grid.nodes(), 0.0);
  for (std::size_t i = 0; i < N; ++i) phi[i] = std::exp(-b * grid.r(i) * grid.r(i));
  std::vector<double> G(grid.nodes());
  std::vector<double> earlier;
  double alpha = 0.0;
  double alpha_earlier = 0.0;

  for (std::size_t k = 1; k <= steps; ++k) {
    scheme.apply(phi, G);
    alpha = G[0] / phi[0];
    const double keep = 1.0 + dt * alpha;
    for (std::size_t i = 0; i < N; ++i) phi[i] = keep * phi[i] - dt * G[i];
    if (k % 1024 == 0 || k == steps || k == mark) {
      const double s = 1.0 / phi[0];
      for (double& v : phi) v *= s;
      phi[0] = 1.0;
    }
    if (k == mark) {
      earlier = phi;
      alpha_earlier = alpha;
    }
  }

  double defect = 0.0;
  for (std::size_t i = 0; i <= N; ++i) defect = std::max(defect, std::abs(phi[i] - earlier[i]));
  if (!(defect <= tol)) {
    throw Error(ErrorKind::NoConvergence, "normalized flow: alpha=" + std::to_string(alpha) +
                                              " defect over the last window of s=" + std::to_string(defect));
  }
  return EigenResult{alpha,
                     ProfileField(grid, std::move(phi)),
                     Method::rescaled_flow,
                     steps,
                     defect,
                     {std::min(alpha, alpha_earlier), std::max(alpha, alpha_earlier)}};
}

ConvergenceReport convergence_report(const OperatorSpec& spec, const ProfileField& g, double alpha,
                                     const ProfileField& phi, const std::vector<double>& sigmas,
                                     double r_check, const EvolveOptions& opt) {
  if (sigmas.empty()) throw Error(ErrorKind::InvalidArgument, "no sigmas given");
  if (!std::is_sorted(sigmas.begin(), sigmas.end()) || !(sigmas.front() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "sigmas must be positive and increasing");
  }
  EvolveOptions o = opt;
  o.alpha = alpha;
  o.t0 = 0.0;
  return convergence_report(evolve_cauchy(spec, g, sigmas.back(), sigmas, o), phi, r_check);
}

ConvergenceReport convergence_report(const ParabolicTrace& trace, const ProfileField& phi, double r_check) {
  if (!std::isfinite(trace.alpha)) throw Error(ErrorKind::InvalidArgument, "trace carries no exponent");
  ConvergenceReport rep;
  for (const auto& snap : trace.profile_snapshots) {
    const ProfileField us = rescale_state(snap.u, snap.t, trace.alpha, phi.grid);
    const double c = us.values[0];
    double err = 0.0;
    for (std::size_t j = 0; j < phi.grid.nodes() && phi.grid.r(j) <= r_check + 1e-12; ++j) {
      err = std::max(err, std::abs(us.values[j] - c * phi.values[j]) / c);
    }
    rep.cauchy_diff.push_back(rep.cstar.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                : std::abs(c - rep.cstar.back()) / c);
    rep.sigmas.push_back(snap.t);
    rep.cstar.push_back(c);
    rep.sup_rel_err.push_back(err);
  }
  return rep;
}

}  // namespace anomex
