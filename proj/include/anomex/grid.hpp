#pragma once

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "anomex/operator.hpp"

namespace anomex {

/// Uniform radial mesh r_i = i*h, i = 0..N, on [0, R_max] in dimension n.
class RadialGrid {
 public:
  /// Throws ValidationError unless R_max > 0, N >= 16, n >= 1.
  RadialGrid(double R_max, std::size_t intervals, int n);

  /// Grid with spacing as close to `h` as possible (N = round(R_max/h)).
  static RadialGrid with_spacing(double R_max, double h, int n);

  double R_max() const { return R_max_; }
  std::size_t intervals() const { return N_; }
  std::size_t nodes() const { return N_ + 1; }
  double h() const { return h_; }
  int dim() const { return n_; }
  double r(std::size_t i) const { return static_cast<double>(i) * h_; }

  bool operator==(const RadialGrid&) const = default;

 private:
  double R_max_;
  std::size_t N_;
  double h_;
  int n_;
};

/// max(2(n Lambda/(2 lambda) + Lambda + 1), 10): comparison radius at the
/// largest admissible exponent.
double default_R_max(const EllipticityBounds& bounds, int n);

struct ProfileField {
  RadialGrid grid;
  std::vector<double> values;

  ProfileField(RadialGrid g, std::vector<double> v);
  explicit ProfileField(RadialGrid g) : grid(g), values(g.nodes(), 0.0) {}

  /// Scales so that values[0] == 1. Throws InvalidArgument if values[0] <= 0.
  void normalize();
  double sup_norm() const;
};

enum class Method { shooting, power_iteration, rescaled_flow };

std::string_view to_string(Method m);

struct EigenResult {
  double alpha = 0.0;
  ProfileField profile;
  Method method = Method::shooting;
  std::size_t iterations = 0;
  double residual = 0.0;
  std::pair<double, double> bracket{0.0, 0.0};
};

/// [n lambda/(2 Lambda), n Lambda/(2 lambda)]: where every exponent must lie.
std::pair<double, double> exponent_bounds(const EllipticityBounds& bounds, int n);

}  // namespace anomex
