#include "anomex/grid.hpp"

#include <algorithm>
#include <cmath>

#include "anomex/errors.hpp"

namespace anomex {

RadialGrid::RadialGrid(double R_max, std::size_t intervals, int n)
    : R_max_(R_max), N_(intervals), h_(R_max / static_cast<double>(intervals)), n_(n) {
  if (!(std::isfinite(R_max) && R_max > 0.0)) {
    throw Error(ErrorKind::ValidationError, "R_max must be positive");
  }
  if (intervals < 16) throw Error(ErrorKind::ValidationError, "grid needs at least 16 intervals");
  if (n < 1) throw Error(ErrorKind::ValidationError, "dimension must be >= 1");
}

RadialGrid RadialGrid::with_spacing(double R_max, double h, int n) {
  if (!(h > 0.0)) throw Error(ErrorKind::ValidationError, "grid spacing must be positive");
  const auto N = static_cast<std::size_t>(std::llround(R_max / h));
  return RadialGrid(R_max, std::max<std::size_t>(N, 1), n);
}

double default_R_max(const EllipticityBounds& bounds, int n) {
  const double alpha_max = n * bounds.Lambda / (2.0 * bounds.lambda);
  return std::max(2.0 * (alpha_max + bounds.Lambda + 1.0), 10.0);
}

ProfileField::ProfileField(RadialGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.nodes()) {
    throw Error(ErrorKind::InvalidArgument, "profile length does not match grid");
  }
}

void ProfileField::normalize() {
  if (!(values.front() > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "cannot normalize a profile with phi(0) <= 0");
  }
  const double s = 1.0 / values.front();
  for (double& v : values) v *= s;
  values.front() = 1.0;
}

double ProfileField::sup_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::shooting: return "shooting";
    case Method::power_iteration: return "power_iteration";
    case Method::rescaled_flow: return "rescaled_flow";
  }
  return "unknown";
}

std::pair<double, double> exponent_bounds(const EllipticityBounds& bounds, int n) {
  return {n * bounds.lambda / (2.0 * bounds.Lambda), n * bounds.Lambda / (2.0 * bounds.lambda)};
}

}  // namespace anomex
