#pragma once

// Run configuration, artifact serialization and the command dispatcher
// behind the `anomex` executable.
//
// Configuration format (TOML subset):
//
//   operator = "barenblatt gamma=0.5"   # canonical operator string
//   n = 1
//   method = "all"                      # shooting | power | flow | all
//   tol = 1e-6                          # (0, 1e-2]
//   output_dir = "out"
//
//   [grid]
//   R_max = "auto"                      # or a number
//   N = 1000                            # default: R_max / 0.01
//
//   [evolve]                            # optional; g = C0 exp(-B r^2)
//   B = 1.0
//   C0 = 1.0
//   sigmas = [4, 16, 64, 256]
//   t_final = 256                       # default: last sigma

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "anomex/grid.hpp"
#include "anomex/operator.hpp"
#include "anomex/parabolic.hpp"
#include "anomex/verification.hpp"

namespace anomex {

enum class MethodChoice { shooting, power, flow, all };

std::string_view to_string(MethodChoice m);
MethodChoice parse_method(std::string_view text);

struct EvolveConfig {
  double B = 1.0;
  double C0 = 1.0;
  double t_final = 256.0;
  std::vector<double> sigmas{4.0, 16.0, 64.0, 256.0};

  bool operator==(const EvolveConfig&) const = default;
};

struct RunConfig {
  std::string op = "linear c=1";  // canonical
  int n = 1;
  bool R_max_auto = true;
  double R_max = 10.0;  // resolved
  bool N_auto = true;
  std::size_t N = 1000;  // resolved; auto gives h = 0.01
  MethodChoice method = MethodChoice::all;
  double tol = 1e-6;
  std::optional<EvolveConfig> evolve;
  std::string output_dir = ".";

  bool operator==(const RunConfig&) const = default;

  OperatorSpec spec() const;
  RadialGrid grid() const;
};

/// Throws ParseError (with line and column) or ValidationError.
RunConfig parse_config(std::string_view text);
/// Re-validates a config assembled in code (after command-line overrides).
void validate(RunConfig& config);
/// Canonical document; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);
/// FNV-1a of serialize(config), 16 hex digits.
std::string config_hash(const RunConfig& config);

std::string to_json(const EigenResult& result, const OperatorSpec& spec);
std::string profile_csv(const ProfileField& profile);
std::string trace_csv(const ParabolicTrace& trace);
std::string to_json(const ConvergenceReport& report);
std::string to_json(const std::vector<CheckResult>& checks);
std::string config_json(const RunConfig& config);
std::string error_json(std::string_view kind, std::string_view message);

/// Runs `exponent`, `profile`, `evolve` or `verify`, writing artifacts (each with
/// a `<file>.meta.json` sidecar naming the config hash) into config.output_dir.
/// Returns 0 on success, 1 on solver failure or failed check (error JSON on err),
/// 2 on an invalid command or config.
int run(std::string_view command, const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace anomex
