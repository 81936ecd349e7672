#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "anomex/cli_io.hpp"
#include "anomex/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Anomalous exponents and self-similar profiles of fully nonlinear parabolic equations"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::string> op, method, output_dir, r_max;
  std::optional<int> n;
  std::optional<double> tol;
  std::optional<std::size_t> intervals;

  const std::pair<const char*, const char*> commands[] = {
      {"exponent", "anomalous exponent by each selected method, plus their agreement"},
      {"profile", "self-similar profile CSV for each selected method"},
      {"evolve", "Cauchy problem from Gaussian data and convergence to C* phi"},
      {"verify", "run the verification suite; exit 1 if any check fails"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--operator", op, "operator, e.g. \"pucci+ lambda=1 Lambda=2\"");
    sub->add_option("--n", n, "dimension");
    sub->add_option("--tol", tol, "tolerance in (0, 1e-2]");
    sub->add_option("--method", method, "shooting | power | flow | all");
    sub->add_option("--R-max,--R_max", r_max, "truncation radius or \"auto\"");
    sub->add_option("--N", intervals, "number of grid intervals");
    sub->add_option("--output-dir,--output_dir", output_dir, "artifact directory");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  anomex::RunConfig config;
  try {
    std::ifstream in(config_path);
    if (!in) throw anomex::Error(anomex::ErrorKind::IoError, "cannot read " + config_path);
    std::stringstream text;
    text << in.rdbuf();
    config = anomex::parse_config(text.str());

    if (op) config.op = *op;
    if (n) config.n = *n;
    if (tol) config.tol = *tol;
    if (method) config.method = anomex::parse_method(*method);
    if (output_dir) config.output_dir = *output_dir;
    if (r_max) {
      config.R_max_auto = *r_max == "auto";
      if (!config.R_max_auto) config.R_max = std::stod(*r_max);
    }
    if (intervals) {
      config.N_auto = false;
      config.N = *intervals;
    }
    anomex::validate(config);
  } catch (const anomex::Error& e) {
    std::cerr << anomex::error_json(anomex::to_string(e.kind()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::cerr << anomex::error_json("InvalidArgument", e.what());
    return 2;
  }
  return anomex::run(command, config, std::cout, std::cerr);
}
