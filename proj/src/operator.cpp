#include "anomex/operator.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <random>

#include "anomex/errors.hpp"

namespace anomex {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::NonMonotoneInversion: return "NonMonotoneInversion";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::PolicyCycle: return "PolicyCycle";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::CFLViolation: return "CFLViolation";
    case ErrorKind::CheckFailed: return "CheckFailed";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

EllipticityBounds EllipticityBounds::make(double lambda, double Lambda) {
  if (!(std::isfinite(lambda) && std::isfinite(Lambda) && lambda > 0.0 && lambda <= Lambda)) {
    throw Error(ErrorKind::ValidationError,
                "ellipticity bounds must satisfy 0 < lambda <= Lambda");
  }
  return {lambda, Lambda};
}

// --- OperatorSpec -----------------------------------------------------------

OperatorSpec OperatorSpec::pucci_plus(double lambda, double Lambda) {
  return OperatorSpec(Kind::PucciPlus, EllipticityBounds::make(lambda, Lambda));
}

OperatorSpec OperatorSpec::pucci_minus(double lambda, double Lambda) {
  return OperatorSpec(Kind::PucciMinus, EllipticityBounds::make(lambda, Lambda));
}

OperatorSpec OperatorSpec::barenblatt(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw Error(ErrorKind::ValidationError, "barenblatt gamma must lie in (0,1)");
  }
  OperatorSpec s(Kind::Barenblatt, EllipticityBounds::make(1.0 / (1.0 + gamma), 1.0 / (1.0 - gamma)));
  s.param_ = gamma;
  return s;
}

OperatorSpec OperatorSpec::linear(double c) {
  OperatorSpec s(Kind::LinearTrace, EllipticityBounds::make(c, c));
  s.param_ = c;
  return s;
}

OperatorSpec OperatorSpec::max_of_linear(std::vector<double> coeffs) {
  if (coeffs.empty()) {
    throw Error(ErrorKind::ValidationError, "maxlinear needs at least one coefficient");
  }
  const auto [lo, hi] = std::minmax_element(coeffs.begin(), coeffs.end());
  OperatorSpec s(Kind::MaxOfLinearTrace, EllipticityBounds::make(*lo, *hi));
  s.coeffs_ = std::move(coeffs);
  return s;
}

OperatorSpec OperatorSpec::dual_of(OperatorSpec inner) {
  OperatorSpec s(Kind::Dual, inner.bounds());
  s.inner_ = std::make_shared<const OperatorSpec>(std::move(inner));
  return s;
}

double OperatorSpec::gamma() const {
  if (kind_ != Kind::Barenblatt) throw Error(ErrorKind::InvalidArgument, "not a barenblatt operator");
  return param_;
}

double OperatorSpec::coeff() const {
  if (kind_ != Kind::LinearTrace) throw Error(ErrorKind::InvalidArgument, "not a linear operator");
  return param_;
}

const std::vector<double>& OperatorSpec::coeffs() const {
  if (kind_ != Kind::MaxOfLinearTrace) {
    throw Error(ErrorKind::InvalidArgument, "not a max-of-linear operator");
  }
  return coeffs_;
}

const OperatorSpec& OperatorSpec::inner() const {
  if (kind_ != Kind::Dual) throw Error(ErrorKind::InvalidArgument, "not a dual operator");
  return *inner_;
}

bool OperatorSpec::operator==(const OperatorSpec& other) const {
  if (kind_ != other.kind_ || !(bounds_ == other.bounds_) || param_ != other.param_ ||
      coeffs_ != other.coeffs_) {
    return false;
  }
  if (kind_ == Kind::Dual) return *inner_ == *other.inner_;
  return true;
}

// --- evaluation ---------------------------------------------------------------

double eval_pucci(std::span<const double> spectrum, const EllipticityBounds& bounds, PucciSign sign) {
  double pos = 0.0;
  double neg = 0.0;
  for (double mu : spectrum) {
    if (mu > 0.0) {
      pos += mu;
    } else if (mu < 0.0) {
      neg += mu;
    }
  }
  if (sign == PucciSign::plus) return -bounds.lambda * pos - bounds.Lambda * neg;
  return -bounds.Lambda * pos - bounds.lambda * neg;
}

double eval_pucci(const HessianSpectrum& spectrum, const EllipticityBounds& bounds, PucciSign sign) {
  return eval_pucci(std::span<const double>(spectrum.eigenvalues), bounds, sign);
}

double eval_operator(const OperatorSpec& spec, std::span<const double> spectrum) {
  using Kind = OperatorSpec::Kind;
  switch (spec.kind()) {
    case Kind::PucciPlus:
      return eval_pucci(spectrum, spec.bounds(), PucciSign::plus);
    case Kind::PucciMinus:
      return eval_pucci(spectrum, spec.bounds(), PucciSign::minus);
    case Kind::Barenblatt: {
      double t = 0.0;
      for (double mu : spectrum) t += mu;
      const double g = spec.gamma();
      return -std::max(t / (1.0 - g), t / (1.0 + g));
    }
    case Kind::LinearTrace: {
      double t = 0.0;
      for (double mu : spectrum) t += mu;
      return -spec.coeff() * t;
    }
    case Kind::MaxOfLinearTrace: {
      double t = 0.0;
      for (double mu : spectrum) t += mu;
      double best = -std::numeric_limits<double>::infinity();
      for (double c : spec.coeffs()) best = std::max(best, -c * t);
      return best;
    }
    case Kind::Dual: {
      std::vector<double> negated(spectrum.begin(), spectrum.end());
      for (double& mu : negated) mu = -mu;
      return -eval_operator(spec.inner(), std::span<const double>(negated));
    }
  }
  return 0.0;
}

double eval_operator(const OperatorSpec& spec, const HessianSpectrum& spectrum) {
  return eval_operator(spec, std::span<const double>(spectrum.eigenvalues));
}

OperatorSpec dual(const OperatorSpec& spec) {
  switch (spec.kind()) {
    case OperatorSpec::Kind::Dual:
      return spec.inner();
    case OperatorSpec::Kind::LinearTrace:
      return spec;
    default:
      return OperatorSpec::dual_of(spec);
  }
}

HessianSpectrum radial_hessian_spectrum(double second_radial, double slope_over_r, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be >= 1");
  HessianSpectrum s;
  s.eigenvalues.assign(static_cast<std::size_t>(n), slope_over_r);
  s.eigenvalues[0] = second_radial;
  return s;
}

// --- randomized property checks ---------------------------------------------

namespace {

constexpr double kSandwichTol = 1e-12;
constexpr double kHomogeneityTol = 1e-14;

std::vector<double> random_spectrum(std::mt19937_64& rng, int dim) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> s(static_cast<std::size_t>(dim));
  for (double& x : s) x = dist(rng);
  return s;
}

}  // namespace

SandwichReport check_ellipticity_sandwich(const OperatorSpec& spec, const EllipticityBounds& bounds,
                                          int trials, std::uint64_t seed, int dim) {
  if (trials < 1 || dim < 1) throw Error(ErrorKind::InvalidArgument, "trials and dim must be >= 1");
  std::mt19937_64 rng(seed);
  SandwichReport report;
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < trials; ++k) {
    const auto m = random_spectrum(rng, dim);
    const auto nmat = random_spectrum(rng, dim);
    std::vector<double> diff(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) diff[j] = m[j] - nmat[j];
    const double df = eval_operator(spec, std::span<const double>(m)) -
                      eval_operator(spec, std::span<const double>(nmat));
    const double lo = eval_pucci(std::span<const double>(diff), bounds, PucciSign::minus);
    const double hi = eval_pucci(std::span<const double>(diff), bounds, PucciSign::plus);
    worst = std::min({worst, df - lo, hi - df});
  }
  report.max_violation = worst;
  report.passed = worst >= -kSandwichTol;
  return report;
}

SandwichReport check_ellipticity_sandwich(const OperatorSpec& spec, int trials, std::uint64_t seed,
                                          int dim) {
  return check_ellipticity_sandwich(spec, spec.bounds(), trials, seed, dim);
}

HomogeneityReport check_homogeneity(const OperatorSpec& spec, int trials, std::uint64_t seed,
                                    int dim) {
  if (trials < 1 || dim < 1) throw Error(ErrorKind::InvalidArgument, "trials and dim must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> eta_dist(0.1, 10.0);
  HomogeneityReport report;
  for (int k = 0; k < trials; ++k) {
    auto s = random_spectrum(rng, dim);
    // Every tenth trial exercises eta = 0.
    const double eta = (k % 10 == 0) ? 0.0 : eta_dist(rng);
    const double base = eval_operator(spec, std::span<const double>(s));
    double mass = 0.0;
    for (double& x : s) {
      x *= eta;
      mass += std::abs(x);
    }
    const double scaled = eval_operator(spec, std::span<const double>(s));
    const double expected = eta * base;
    // Relative to the size of the terms summed inside F; |F| alone can be tiny through cancellation.
    const double size = std::max(std::abs(expected), spec.bounds().Lambda * mass);
    const double err = size > 0.0 ? std::abs(scaled - expected) / size : std::abs(scaled - expected);
    report.max_relative_error = std::max(report.max_relative_error, err);
  }
  report.passed = report.max_relative_error <= kHomogeneityTol;
  return report;
}

// --- text form ----------------------------------------------------------------

namespace {

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(std::string_view text, const std::string& why) {
  throw Error(ErrorKind::ParseError, "operator '" + std::string(text) + "': " + why);
}

double parse_number(std::string_view text, std::string_view token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(value)) {
    parse_fail(text, "bad number '" + std::string(token) + "'");
  }
  return value;
}

struct KeyValue {
  std::string key;  // case preserved
  std::string_view value;
};

std::vector<KeyValue> split_pairs(std::string_view text, std::string_view rest) {
  std::vector<KeyValue> out;
  std::size_t pos = 0;
  while (pos < rest.size()) {
    while (pos < rest.size() && std::isspace(static_cast<unsigned char>(rest[pos]))) ++pos;
    if (pos >= rest.size()) break;
    std::size_t end = pos;
    while (end < rest.size() && !std::isspace(static_cast<unsigned char>(rest[end]))) ++end;
    const std::string_view tok = rest.substr(pos, end - pos);
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == tok.size()) {
      parse_fail(text, "expected key=value, got '" + std::string(tok) + "'");
    }
    out.push_back({std::string(tok.substr(0, eq)), tok.substr(eq + 1)});
    pos = end;
  }
  return out;
}

// "lambda" and "Lambda" differ only by case, so those two keys are matched
// exactly; everything else is case-insensitive.
enum class PucciKey { lower, upper, unknown };

PucciKey classify_pucci_key(const std::string& key) {
  if (key == "lambda") return PucciKey::lower;
  if (key == "Lambda") return PucciKey::upper;
  const std::string k = lower(key);
  if (k == "lambda_min") return PucciKey::lower;
  if (k == "lambda_max") return PucciKey::upper;
  return PucciKey::unknown;
}

}  // namespace

OperatorSpec parse_operator(std::string_view text) {
  const std::string_view body = trim(text);
  if (body.empty()) parse_fail(text, "empty operator");

  const std::string head = lower(body.substr(0, std::min<std::size_t>(5, body.size())));
  if (head == "dual(") {
    if (body.back() != ')') parse_fail(text, "unterminated dual(...)");
    return OperatorSpec::dual_of(parse_operator(body.substr(5, body.size() - 6)));
  }

  std::size_t name_end = 0;
  while (name_end < body.size() && !std::isspace(static_cast<unsigned char>(body[name_end]))) ++name_end;
  const std::string name = lower(body.substr(0, name_end));
  const auto pairs = split_pairs(text, body.substr(name_end));

  auto single = [&](std::string_view key) -> double {
    if (pairs.size() != 1 || lower(pairs[0].key) != key) {
      parse_fail(text, "'" + name + "' takes exactly " + std::string(key) + "=<value>");
    }
    return parse_number(text, pairs[0].value);
  };

  if (name == "pucci+" || name == "pucci-") {
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = lo;
    for (const auto& kv : pairs) {
      switch (classify_pucci_key(kv.key)) {
        case PucciKey::lower: lo = parse_number(text, kv.value); break;
        case PucciKey::upper: hi = parse_number(text, kv.value); break;
        case PucciKey::unknown: parse_fail(text, "unknown key '" + kv.key + "'");
      }
    }
    if (std::isnan(lo) || std::isnan(hi)) parse_fail(text, "pucci needs lambda= and Lambda=");
    return name == "pucci+" ? OperatorSpec::pucci_plus(lo, hi) : OperatorSpec::pucci_minus(lo, hi);
  }
  if (name == "barenblatt") return OperatorSpec::barenblatt(single("gamma"));
  if (name == "linear") return OperatorSpec::linear(single("c"));
  if (name == "maxlinear") {
    if (pairs.size() != 1 || lower(pairs[0].key) != "c") {
      parse_fail(text, "'maxlinear' takes exactly c=<v1>,<v2>,...");
    }
    std::vector<double> cs;
    std::string_view list = pairs[0].value;
    while (true) {
      const auto comma = list.find(',');
      cs.push_back(parse_number(text, list.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      list.remove_prefix(comma + 1);
    }
    return OperatorSpec::max_of_linear(std::move(cs));
  }
  parse_fail(text, "unknown operator kind '" + name + "'");
}

std::string to_string(const OperatorSpec& spec) {
  using Kind = OperatorSpec::Kind;
  switch (spec.kind()) {
    case Kind::PucciPlus:
    case Kind::PucciMinus:
      return std::string(spec.kind() == Kind::PucciPlus ? "pucci+" : "pucci-") +
             " lambda=" + format_number(spec.bounds().lambda) +
             " Lambda=" + format_number(spec.bounds().Lambda);
    case Kind::Barenblatt:
      return "barenblatt gamma=" + format_number(spec.gamma());
    case Kind::LinearTrace:
      return "linear c=" + format_number(spec.coeff());
    case Kind::MaxOfLinearTrace: {
      std::string out = "maxlinear c=";
      for (std::size_t i = 0; i < spec.coeffs().size(); ++i) {
        if (i) out += ',';
        out += format_number(spec.coeffs()[i]);
      }
      return out;
    }
    case Kind::Dual:
      return "dual(" + to_string(spec.inner()) + ")";
  }
  return {};
}

// --- radial policy form -------------------------------------------------------

RadialPolicySet radial_policies(const OperatorSpec& spec) {
  using Kind = OperatorSpec::Kind;
  RadialPolicySet set;
  switch (spec.kind()) {
    case Kind::PucciPlus:
    case Kind::PucciMinus: {
      const double l = spec.bounds().lambda;
      const double L = spec.bounds().Lambda;
      set.policies = {{l, l}, {l, L}, {L, l}, {L, L}};
      set.sense = spec.kind() == Kind::PucciPlus ? PolicySense::max : PolicySense::min;
      break;
    }
    case Kind::Barenblatt: {
      const double g = spec.gamma();
      set.policies = {{1.0 / (1.0 + g), 1.0 / (1.0 + g)}, {1.0 / (1.0 - g), 1.0 / (1.0 - g)}};
      set.sense = PolicySense::min;
      break;
    }
    case Kind::LinearTrace:
      set.policies = {{spec.coeff(), spec.coeff()}};
      set.sense = PolicySense::max;
      break;
    case Kind::MaxOfLinearTrace:
      for (double c : spec.coeffs()) set.policies.push_back({c, c});
      set.sense = PolicySense::max;
      break;
    case Kind::Dual:
      set = radial_policies(spec.inner());
      set.sense = set.sense == PolicySense::max ? PolicySense::min : PolicySense::max;
      break;
  }
  return set;
}

double RadialPolicySet::eval(double d2, double q, int n) const {
  double best = apply(0, d2, q, n);
  for (std::size_t p = 1; p < policies.size(); ++p) {
    const double v = apply(p, d2, q, n);
    if (better(v, best)) best = v;
  }
  return best;
}

std::size_t RadialPolicySet::select(double d2, double q, int n, std::size_t current) const {
  std::size_t best_p = current < policies.size() ? current : 0;
  double best = apply(best_p, d2, q, n);
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const double v = apply(p, d2, q, n);
    if (better(v, best)) {
      best = v;
      best_p = p;
    }
  }
  return best_p;
}

double invert_radial_curvature(const RadialPolicySet& set, double q, int n, double target) {
  // Each branch -c_rad*d2 - c_tan*(n-1)*q is a decreasing line in d2. The max of
  // such lines crosses `target` at the largest branch root, the min at the smallest.
  double root = set.sense == PolicySense::max ? -std::numeric_limits<double>::infinity()
                                              : std::numeric_limits<double>::infinity();
  for (const auto& c : set.policies) {
    if (!(c.c_rad > 0.0)) {
      throw Error(ErrorKind::NonMonotoneInversion, "radial coefficient must be positive");
    }
    const double r = -(target + c.c_tan * (n - 1) * q) / c.c_rad;
    root = set.sense == PolicySense::max ? std::max(root, r) : std::min(root, r);
  }
  if (!std::isfinite(root)) {
    throw Error(ErrorKind::NonMonotoneInversion, "could not bracket the radial curvature");
  }
  return root;
}

}  // namespace anomex
