#include "anomex/cli_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <ostream>
#include <set>
#include <variant>

#include <json.hpp>

#include "anomex/errors.hpp"
#include "anomex/grid_solver.hpp"
#include "anomex/shooting.hpp"

namespace anomex {

using ojson = nlohmann::ordered_json;

namespace {

// Shortest text that reads back to the same double.
std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// --- config document ----------------------------------------------------------

using Value = std::variant<std::string, double, std::vector<double>>;

struct Entry {
  Value value;
  std::size_t line;
  std::size_t column;  // of the value
};

[[noreturn]] void parse_fail(std::size_t line, std::size_t col, const std::string& why) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + why);
}

class LineParser {
 public:
  LineParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  std::size_t col() const { return pos_ + 1; }
  bool done() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string key() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  Value value() {
    const char c = peek();
    if (c == '"') return string();
    if (c == '[') {
      ++pos_;
      std::vector<double> items;
      if (peek() == ']') {
        ++pos_;
        return items;
      }
      for (;;) {
        items.push_back(number());
        if (peek() == ',') {
          ++pos_;
          if (peek() == ']') break;  // trailing comma
          continue;
        }
        break;
      }
      expect(']');
      return items;
    }
    return number();
  }

  [[noreturn]] void fail(const std::string& why) { parse_fail(line_, col(), why); }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\') {
        if (++pos_ >= s_.size()) break;
        const char e = s_[pos_];
        if (e != '"' && e != '\\') fail("unsupported escape");
      }
      out += s_[pos_++];
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::string_view("+-.0123456789eE_").find(s_[pos_]) != std::string_view::npos) ++pos_;
    std::string digits;
    for (char ch : s_.substr(start, pos_ - start)) {
      if (ch != '_') digits += ch;
    }
    double x = 0.0;
    const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), x);
    if (digits.empty() || res.ec != std::errc() || res.ptr != digits.data() + digits.size()) {
      pos_ = start;
      fail("expected a number, string or array");
    }
    return x;
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

const std::map<std::string, std::set<std::string>> kKeys = {
    {"", {"operator", "n", "method", "tol", "output_dir"}},
    {"grid", {"R_max", "N"}},
    {"evolve", {"B", "C0", "t_final", "sigmas"}},
};

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorKind::ValidationError, why); }

template <class T>
const T& as(const Entry& e, const char* what) {
  if (const T* v = std::get_if<T>(&e.value)) return *v;
  parse_fail(e.line, e.column, std::string("expected ") + what);
}

double as_count(const Entry& e, const std::string& key) {
  const double x = as<double>(e, "a number");
  if (!(x == std::floor(x)) || x < 0 || x > 1e12) parse_fail(e.line, e.column, key + " must be a whole number");
  return x;
}

}  // namespace

std::string_view to_string(MethodChoice m) {
  switch (m) {
    case MethodChoice::shooting: return "shooting";
    case MethodChoice::power: return "power";
    case MethodChoice::flow: return "flow";
    case MethodChoice::all: return "all";
  }
  return "all";
}

MethodChoice parse_method(std::string_view text) {
  for (MethodChoice m : {MethodChoice::shooting, MethodChoice::power, MethodChoice::flow, MethodChoice::all}) {
    if (text == to_string(m)) return m;
  }
  invalid("method must be one of shooting, power, flow, all (got '" + std::string(text) + "')");
}

OperatorSpec RunConfig::spec() const { return parse_operator(op); }

RadialGrid RunConfig::grid() const { return RadialGrid(R_max, N, n); }

void validate(RunConfig& c) {
  const OperatorSpec spec = parse_operator(c.op);
  c.op = to_string(spec);
  if (c.n < 1) invalid("n must be >= 1");
  if (!(c.tol > 0.0 && c.tol <= 1e-2)) invalid("tol must lie in (0, 1e-2], got " + fmt(c.tol));
  if (c.R_max_auto) c.R_max = default_R_max(spec.bounds(), c.n);
  if (!(c.R_max > 0.0) || !std::isfinite(c.R_max)) invalid("grid.R_max must be positive");
  if (c.N_auto) c.N = static_cast<std::size_t>(std::llround(c.R_max / 0.01));
  if (c.N < 16) invalid("grid.N must be >= 16");
  if (c.evolve) {
    auto& e = *c.evolve;
    if (!(e.B > 0.0) || !(e.C0 > 0.0)) invalid("evolve.B and evolve.C0 must be positive");
    if (e.sigmas.empty()) invalid("evolve.sigmas must not be empty");
    for (std::size_t i = 0; i < e.sigmas.size(); ++i) {
      if (!(e.sigmas[i] > 0.0) || (i && !(e.sigmas[i] > e.sigmas[i - 1]))) {
        invalid("evolve.sigmas must be positive and strictly increasing");
      }
    }
    if (!(e.t_final >= e.sigmas.back())) invalid("evolve.t_final must be >= the last sigma");
  }
  if (c.output_dir.empty()) invalid("output_dir must not be empty");
}

RunConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::string section;
  std::size_t line_no = 0;
  bool saw_evolve = false;

  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    LineParser p(line, line_no);
    if (p.done()) continue;
    if (p.peek() == '[') {
      p.expect('[');
      const std::size_t col = p.col();
      section = p.key();
      if (!kKeys.count(section) || section.empty()) parse_fail(line_no, col, "unknown section [" + section + "]");
      p.expect(']');
      if (!p.done()) p.fail("unexpected text after section header");
      saw_evolve |= section == "evolve";
      continue;
    }
    const std::size_t key_col = p.col();
    const std::string key = p.key();
    if (!kKeys.at(section).count(key)) {
      parse_fail(line_no, key_col, "unknown key '" + (section.empty() ? key : section + "." + key) + "'");
    }
    p.expect('=');
    p.peek();
    const std::size_t value_col = p.col();
    Value v = p.value();
    if (!p.done()) p.fail("unexpected text after value");
    const std::string full = section.empty() ? key : section + "." + key;
    if (!entries.emplace(full, Entry{std::move(v), line_no, value_col}).second) {
      parse_fail(line_no, key_col, "duplicate key '" + full + "'");
    }
  }

  RunConfig c;
  auto find = [&](const char* k) -> const Entry* {
    auto it = entries.find(k);
    return it == entries.end() ? nullptr : &it->second;
  };

  const Entry* op = find("operator");
  if (!op) invalid("missing required key 'operator'");
  c.op = as<std::string>(*op, "a string");
  try {
    c.op = to_string(parse_operator(c.op));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ParseError) throw;
    parse_fail(op->line, op->column, e.what());
  }
  const Entry* n = find("n");
  if (!n) invalid("missing required key 'n'");
  c.n = static_cast<int>(as_count(*n, "n"));
  if (const Entry* e = find("method")) {
    try {
      c.method = parse_method(as<std::string>(*e, "a string"));
    } catch (const Error& err) {
      parse_fail(e->line, e->column, err.what());
    }
  }
  if (const Entry* e = find("tol")) c.tol = as<double>(*e, "a number");
  if (const Entry* e = find("output_dir")) c.output_dir = as<std::string>(*e, "a string");
  if (const Entry* e = find("grid.R_max")) {
    if (const auto* s = std::get_if<std::string>(&e->value)) {
      if (*s != "auto") parse_fail(e->line, e->column, "grid.R_max must be a number or \"auto\"");
    } else {
      c.R_max_auto = false;
      c.R_max = as<double>(*e, "a number or \"auto\"");
    }
  }
  if (const Entry* e = find("grid.N")) {
    c.N_auto = false;
    c.N = static_cast<std::size_t>(as_count(*e, "grid.N"));
  }
  if (saw_evolve) {
    EvolveConfig ev;
    if (const Entry* e = find("evolve.B")) ev.B = as<double>(*e, "a number");
    if (const Entry* e = find("evolve.C0")) ev.C0 = as<double>(*e, "a number");
    if (const Entry* e = find("evolve.sigmas")) ev.sigmas = as<std::vector<double>>(*e, "an array of numbers");
    ev.t_final = ev.sigmas.empty() ? 0.0 : ev.sigmas.back();
    if (const Entry* e = find("evolve.t_final")) ev.t_final = as<double>(*e, "a number");
    c.evolve = ev;
  }
  validate(c);
  return c;
}

std::string serialize(const RunConfig& c) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"' || ch == '\\') out += '\\';
      out += ch;
    }
    return out + "\"";
  };
  std::string out;
  out += "operator = " + quote(c.op) + "\n";
  out += "n = " + std::to_string(c.n) + "\n";
  out += "method = " + quote(std::string(to_string(c.method))) + "\n";
  out += "tol = " + fmt(c.tol) + "\n";
  out += "output_dir = " + quote(c.output_dir) + "\n";
  out += "\n[grid]\n";
  out += "R_max = " + (c.R_max_auto ? std::string("\"auto\"") : fmt(c.R_max)) + "\n";
  if (!c.N_auto) out += "N = " + std::to_string(c.N) + "\n";
  if (c.evolve) {
    const auto& e = *c.evolve;
    out += "\n[evolve]\n";
    out += "B = " + fmt(e.B) + "\n";
    out += "C0 = " + fmt(e.C0) + "\n";
    out += "t_final = " + fmt(e.t_final) + "\n";
    out += "sigmas = [";
    for (std::size_t i = 0; i < e.sigmas.size(); ++i) out += (i ? ", " : "") + fmt(e.sigmas[i]);
    out += "]\n";
  }
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : serialize(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- artifacts ------------------------------------------------------------------

namespace {

ojson config_object(const RunConfig& c) {
  ojson j;
  j["operator"] = c.op;
  j["n"] = c.n;
  j["grid"] = {{"R_max", c.R_max}, {"N", c.N}, {"R_max_auto", c.R_max_auto}};
  j["method"] = to_string(c.method);
  j["tol"] = c.tol;
  if (c.evolve) {
    j["evolve"] = {{"B", c.evolve->B},
                   {"C0", c.evolve->C0},
                   {"t_final", c.evolve->t_final},
                   {"sigmas", c.evolve->sigmas}};
  }
  j["output_dir"] = c.output_dir;
  return j;
}

ojson check_object(const CheckResult& r) {
  ojson details = ojson::object();
  for (const auto& [k, v] : r.details) details[k] = v;
  return {{"name", r.name},         {"passed", r.passed},       {"worst_slack", r.worst_slack},
          {"location", r.location}, {"tolerance", r.tolerance}, {"details", details}};
}

}  // namespace

std::string to_json(const EigenResult& r, const OperatorSpec& spec) {
  ojson j;
  j["operator"] = to_string(spec);
  j["n"] = r.profile.grid.dim();
  j["lambda"] = spec.bounds().lambda;
  j["Lambda"] = spec.bounds().Lambda;
  j["alpha"] = r.alpha;
  j["method"] = to_string(r.method);
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  j["grid"] = {{"R_max", r.profile.grid.R_max()}, {"N", r.profile.grid.intervals()}};
  return j.dump(2) + "\n";
}

std::string profile_csv(const ProfileField& profile) {
  std::string out = "r,phi\n";
  for (std::size_t i = 0; i < profile.grid.nodes(); ++i) {
    out += fmt17(profile.grid.r(i)) + "," + fmt17(profile.values[i]) + "\n";
  }
  return out;
}

std::string trace_csv(const ParabolicTrace& trace) {
  std::string out = "t,u0,cstar_est\n";
  for (const auto& [t, u0] : trace.snapshots) {
    const double c = std::isfinite(trace.alpha) ? std::pow(t, trace.alpha) * u0 : std::nan("");
    out += fmt17(t) + "," + fmt17(u0) + "," + fmt17(c) + "\n";
  }
  return out;
}

std::string to_json(const ConvergenceReport& report) {
  ojson j;
  j["sigmas"] = report.sigmas;
  j["cstar"] = report.cstar;
  j["sup_rel_err"] = report.sup_rel_err;
  return j.dump(2) + "\n";
}

std::string to_json(const std::vector<CheckResult>& checks) {
  ojson arr = ojson::array();
  for (const auto& r : checks) arr.push_back(check_object(r));
  return arr.dump(2) + "\n";
}

std::string config_json(const RunConfig& config) {
  return ojson{{"config_hash", config_hash(config)}, {"config", config_object(config)}}.dump(2) + "\n";
}

std::string error_json(std::string_view kind, std::string_view message) {
  return ojson{{"error", kind}, {"message", message}}.dump() + "\n";
}

// --- dispatch -------------------------------------------------------------------

namespace {

class ArtifactWriter {
 public:
  ArtifactWriter(const RunConfig& c, std::string command)
      : dir_(c.output_dir), hash_(config_hash(c)), config_(config_object(c)), command_(std::move(command)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir_.string() + ": " + ec.message());
  }

  void write_plain(const std::string& name, const std::string& content) const { put(dir_ / name, content); }

  void write(const std::string& name, const std::string& content) const {
    put(dir_ / name, content);
    const ojson meta{{"file", name}, {"command", command_}, {"config_hash", hash_}, {"config", config_}};
    put(dir_ / (name + ".meta.json"), meta.dump(2) + "\n");
  }

 private:
  static void put(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
    if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  }

  std::filesystem::path dir_;
  std::string hash_;
  ojson config_;
  std::string command_;
};

EigenResult run_flow(const OperatorSpec& spec, const RadialGrid& grid, double tol) {
  for (double s_final = 20.0;; s_final *= 2.0) {
    try {
      return normalized_rescaled_flow(spec, grid, s_final, tol);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoConvergence || s_final >= 160.0) throw;
    }
  }
}

std::vector<EigenResult> solve(const RunConfig& c, const OperatorSpec& spec, const RadialGrid& grid) {
  std::vector<MethodChoice> methods;
  if (c.method == MethodChoice::all) {
    methods = {MethodChoice::shooting, MethodChoice::power, MethodChoice::flow};
  } else {
    methods = {c.method};
  }
  std::vector<std::future<EigenResult>> jobs;
  for (MethodChoice m : methods) {
    jobs.push_back(std::async(std::launch::async, [m, &spec, &grid, tol = c.tol] {
      switch (m) {
        case MethodChoice::shooting: return find_alpha_shooting(spec, grid, tol);
        case MethodChoice::flow: return run_flow(spec, grid, tol);
        default: return inverse_power_iteration(spec, grid, tol);
      }
    }));
  }
  std::vector<EigenResult> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

const EigenResult& preferred(const std::vector<EigenResult>& results) {
  for (const auto& r : results) {
    if (r.method == Method::power_iteration) return r;
  }
  return results.front();
}

std::string method_tag(Method m) {
  switch (m) {
    case Method::shooting: return "shooting";
    case Method::power_iteration: return "power";
    case Method::rescaled_flow: return "flow";
  }
  return "unknown";
}

int cmd_exponent(const RunConfig& c, const ArtifactWriter& w, std::ostream& out) {
  const OperatorSpec spec = c.spec();
  const auto results = solve(c, spec, c.grid());
  ojson agreement;
  agreement["alphas"] = ojson::object();
  double spread = 0.0;
  for (const auto& r : results) {
    w.write("exponent_" + method_tag(r.method) + ".json", to_json(r, spec));
    agreement["alphas"][method_tag(r.method)] = r.alpha;
    for (const auto& q : results) spread = std::max(spread, std::abs(r.alpha - q.alpha));
  }
  agreement["max_pairwise_diff"] = spread;
  w.write("exponent_agreement.json", agreement.dump(2) + "\n");
  out << "operator=\"" << c.op << "\" n=" << c.n;
  for (const auto& r : results) out << " alpha_" << method_tag(r.method) << "=" << fmt17(r.alpha);
  out << "\nagreement: max pairwise |delta alpha| = " << fmt(spread) << "\n";
  return 0;
}

int cmd_profile(const RunConfig& c, const ArtifactWriter& w, std::ostream& out) {
  const auto results = solve(c, c.spec(), c.grid());
  for (const auto& r : results) {
    const std::string name = "profile_" + method_tag(r.method) + ".csv";
    w.write(name, profile_csv(r.profile));
    out << name << " alpha=" << fmt17(r.alpha) << "\n";
  }
  return 0;
}

int cmd_evolve(const RunConfig& c, const ArtifactWriter& w, std::ostream& out) {
  const OperatorSpec spec = c.spec();
  const RadialGrid grid = c.grid();
  const EvolveConfig ev = c.evolve.value_or(EvolveConfig{});
  const auto results = solve(c, spec, grid);
  const EigenResult& eig = preferred(results);

  ProfileField g(grid);
  for (std::size_t i = 0; i < grid.intervals(); ++i) g.values[i] = ev.C0 * std::exp(-ev.B * grid.r(i) * grid.r(i));
  EvolveOptions opt;
  opt.alpha = eig.alpha;
  const ParabolicTrace trace = evolve_cauchy(spec, g, ev.t_final, ev.sigmas, opt);
  const ConvergenceReport report = convergence_report(trace, eig.profile);

  w.write("trace.csv", trace_csv(trace));
  for (const auto& snap : trace.profile_snapshots) w.write("profile_t" + fmt(snap.t) + ".csv", profile_csv(snap.u));
  w.write("convergence.json", to_json(report));
  out << "alpha=" << fmt17(eig.alpha) << " (" << method_tag(eig.method) << ")\n";
  for (std::size_t k = 0; k < report.sigmas.size(); ++k) {
    out << "sigma=" << fmt(report.sigmas[k]) << " cstar=" << fmt17(report.cstar[k])
        << " sup_rel_err=" << fmt17(report.sup_rel_err[k]) << "\n";
  }
  return 0;
}

int cmd_verify(const RunConfig& c, const ArtifactWriter& w, std::ostream& out, std::ostream& err) {
  const auto checks = run_verification_suite(c.spec(), c.grid(), c.tol);
  w.write("verify.json", to_json(checks));
  std::string failed;
  for (const auto& r : checks) {
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %s  worst_slack=%.6g at %.6g\n", r.name.c_str(),
                  r.passed ? "PASS" : "FAIL", r.worst_slack, r.location);
    out << line;
    if (!r.passed) failed += (failed.empty() ? "" : ", ") + r.name;
  }
  if (failed.empty()) return 0;
  err << error_json(to_string(ErrorKind::CheckFailed), "failed checks: " + failed);
  return 1;
}

}  // namespace

int run(std::string_view command, const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (command != "exponent" && command != "profile" && command != "evolve" && command != "verify") {
      err << error_json(to_string(ErrorKind::InvalidArgument), "unknown command '" + std::string(command) + "'");
      return 2;
    }
    RunConfig c = config;
    validate(c);
    const ArtifactWriter w(c, std::string(command));
    w.write_plain("config.json", config_json(c));
    if (command == "exponent") return cmd_exponent(c, w, out);
    if (command == "profile") return cmd_profile(c, w, out);
    if (command == "evolve") return cmd_evolve(c, w, out);
    return cmd_verify(c, w, out, err);
  } catch (const Error& e) {
    err << error_json(to_string(e.kind()), e.what());
    const bool usage = e.kind() == ErrorKind::ParseError || e.kind() == ErrorKind::ValidationError;
    return usage ? 2 : 1;
  } catch (const std::exception& e) {
    err << error_json("InternalError", e.what());
    return 1;
  }
}

}  // namespace anomex
