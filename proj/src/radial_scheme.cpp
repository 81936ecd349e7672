#include "radial_scheme.hpp"

#include <algorithm>
#include <cmath>

#include "anomex/errors.hpp"

namespace anomex::detail {

RadialScheme::RadialScheme(const OperatorSpec& spec, const RadialGrid& grid, double drift)
    : grid_(grid), set_(radial_policies(spec)) {
  const std::size_t N = grid.intervals();
  const std::size_t P = set_.policies.size();
  const int n = grid.dim();
  const double h = grid.h();
  const double h2 = h * h;

  central_.assign(N, 1);
  lo_.assign(P, std::vector<double>(N, 0.0));
  di_.assign(P, std::vector<double>(N, 0.0));
  up_.assign(P, std::vector<double>(N, 0.0));

  for (std::size_t i = 1; i < N; ++i) {
    const double r = grid.r(i);
    for (const auto& c : set_.policies) {
      const double b = c.c_tan * (n - 1) / r + 0.5 * drift * r;  // |coefficient of u'|
      if (b * h > 2.0 * c.c_rad) central_[i] = 0;
    }
  }

  for (std::size_t p = 0; p < P; ++p) {
    const auto& c = set_.policies[p];
    const double k = c.c_rad + (n - 1) * c.c_tan;
    di_[p][0] = 2.0 * k / h2;
    up_[p][0] = -2.0 * k / h2;
    for (std::size_t i = 1; i < N; ++i) {
      const double r = grid.r(i);
      const double b = c.c_tan * (n - 1) / r + 0.5 * drift * r;
      if (central_[i]) {
        lo_[p][i] = std::min(-c.c_rad / h2 + b / (2.0 * h), 0.0);  // exactly 0 on the switch boundary
        di_[p][i] = 2.0 * c.c_rad / h2;
        up_[p][i] = -c.c_rad / h2 - b / (2.0 * h);
      } else {
        lo_[p][i] = -c.c_rad / h2;
        di_[p][i] = 2.0 * c.c_rad / h2 + b / h;
        up_[p][i] = -c.c_rad / h2 - b / h;
      }
    }
    max_diag_ = std::max(max_diag_, *std::max_element(di_[p].begin(), di_[p].end()));
  }
}

void RadialScheme::apply(std::span<const double> u, std::span<double> out) const {
  const std::size_t N = grid_.intervals();
  const bool take_max = set_.sense == PolicySense::max;
  for (std::size_t p = 0; p < set_.policies.size(); ++p) {
    const double* lo = lo_[p].data();
    const double* di = di_[p].data();
    const double* up = up_[p].data();
    const double v0 = di[0] * u[0] + up[0] * u[1];
    out[0] = p == 0 ? v0 : (take_max ? std::max(out[0], v0) : std::min(out[0], v0));
    if (p == 0) {
      for (std::size_t i = 1; i < N; ++i) out[i] = lo[i] * u[i - 1] + di[i] * u[i] + up[i] * u[i + 1];
    } else if (take_max) {
      for (std::size_t i = 1; i < N; ++i)
        out[i] = std::max(out[i], lo[i] * u[i - 1] + di[i] * u[i] + up[i] * u[i + 1]);
    } else {
      for (std::size_t i = 1; i < N; ++i)
        out[i] = std::min(out[i], lo[i] * u[i - 1] + di[i] * u[i] + up[i] * u[i + 1]);
    }
  }
  out[N] = 0.0;
}

void RadialScheme::apply(std::span<const double> u, std::span<const std::size_t> policy,
                         std::span<double> out) const {
  const std::size_t N = grid_.intervals();
  for (std::size_t i = 0; i < N; ++i) out[i] = row(policy[i], i, u);
  out[N] = 0.0;
}

std::size_t RadialScheme::select(std::span<const double> u, std::size_t i,
                                 std::size_t current) const {
  std::size_t best_p = current;
  double best = row(current, i, u);
  for (std::size_t p = 0; p < set_.policies.size(); ++p) {
    const double v = row(p, i, u);
    // Switch only on a margin above rounding so Howard iteration cannot cycle on ties.
    const double scale =
        std::abs(di_[p][i] * u[i]) + std::abs(up_[p][i] * u[i + 1]) + (i > 0 ? std::abs(lo_[p][i] * u[i - 1]) : 0.0);
    if (set_.better(v, best) && std::abs(v - best) > 1e-13 * scale) {
      best = v;
      best_p = p;
    }
  }
  return best_p;
}

void solve_tridiagonal(std::span<const double> lo, std::span<const double> di,
                       std::span<const double> up, std::span<double> rhs) {
  const std::size_t m = rhs.size();
  std::vector<double> c(m, 0.0);
  double pivot = di[0];
  if (pivot == 0.0) throw Error(ErrorKind::SingularSystem, "zero pivot in tridiagonal solve");
  c[0] = m > 1 ? up[0] / pivot : 0.0;
  rhs[0] /= pivot;
  for (std::size_t i = 1; i < m; ++i) {
    pivot = di[i] - lo[i] * c[i - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw Error(ErrorKind::SingularSystem, "zero pivot in tridiagonal solve");
    }
    c[i] = i + 1 < m ? up[i] / pivot : 0.0;
    rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / pivot;
  }
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

}  // namespace anomex::detail
