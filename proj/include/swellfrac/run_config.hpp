// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "swellfrac/core_model.hpp"
#include "swellfrac/fractional_kernel.hpp"
#include "swellfrac/modal_dynamics.hpp"

namespace swellfrac {

inline constexpr const char* kOutDirEnv = "SWELLFRAC_OUT_DIR";

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Command { kernel_check, simulate, spectrum, resolvent, decay_fit };

inline const char* command_name(Command c) {
  switch (c) {
    case Command::kernel_check: return "kernel-check";
    case Command::simulate: return "simulate";
    case Command::spectrum: return "spectrum";
    case Command::resolvent: return "resolvent";
    case Command::decay_fit: return "decay-fit";
  }
  return "?";
}

inline Command parse_command(const std::string& s) {
  for (Command c : {Command::kernel_check, Command::simulate, Command::spectrum, Command::resolvent, Command::decay_fit})
    if (s == command_name(c)) return c;
  throw ConfigError("unknown subcommand '" + s +
                    "'; expected one of kernel-check, simulate, spectrum, resolvent, decay-fit");
}

/// "section.key" -> raw value.
using KeyMap = std::map<std::string, std::string>;

inline const std::vector<std::string>& valid_keys() {
  static const std::vector<std::string> keys{
      "params.rho_z", "params.rho_u", "params.a1", "params.a2", "params.a3", "params.gamma", "params.alpha",
      "params.kappa", "params.length",
      "numerics.modes", "numerics.dt", "numerics.t_end", "numerics.u_min", "numerics.u_max", "numerics.h",
      "numerics.root_tol", "numerics.n_min", "numerics.n_max", "numerics.energy_stride",
      "numerics.snapshot_stride", "numerics.x_points", "numerics.probe",
      "initial.z0", "initial.z1", "initial.u0", "initial.u1",
      "kernel.alphas", "kernel.kappas", "kernel.lambdas", "kernel.tol", "kernel.u_min", "kernel.u_max", "kernel.h",
      "resolvent.alphas",
      "decay.alphas", "decay.profile", "decay.window", "decay.max_variation", "decay.transient_fraction",
      "output.dir", "output.plots",
      "run.seed"};
  return keys;
}

struct NumericsConfig {
  int modes = 16;
  double dt = 0.01;
  double t_end = 10.0;
  double u_min = -8.0;
  double u_max = 8.0;
  double h = 0.1;
  double root_tol = 1e-12;
  int n_min = 50;
  int n_max = 500;
  int energy_stride = 1;
  int snapshot_stride = 0;
  int x_points = 101;
  std::string probe = "limit_speed";  ///< or "refined"
};

struct InitialConfig {
  std::string z0 = "parabola";
  std::string z1 = "zero";
  std::string u0 = "zero";
  std::string u1 = "zero";
};

struct KernelConfig {
  std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<double> kappas{0.5, 1.0, 5.0};
  std::vector<cdouble> lambdas{0.0, 1.0, 10.0, cdouble(0.0, 1.0), cdouble(0.0, 10.0)};
  double tol = 1e-6;
  /// Fixed calibration grid; when unset the alpha-dependent default is used.
  std::optional<LogSubstitution> grid;
};

struct DecayConfig {
  std::vector<double> alphas;  ///< empty: params.alpha only
  std::string profile = "power:2.5";
  bool auto_window = true;
  double t_a = 0.0;
  double t_b = 0.0;
  double max_variation = 0.15;
  double transient_fraction = 0.05;
};

struct RunConfig {
  Command command = Command::simulate;
  PhysicalParams params;
  NumericsConfig numerics;
  InitialConfig initial;
  KernelConfig kernel;
  std::vector<double> resolvent_alphas;  ///< empty: params.alpha only
  DecayConfig decay;
  std::string out_dir = "swellfrac_out";
  bool plots = false;
  std::uint64_t seed = 1;
  std::string config_path;
  KeyMap explicit_keys;  ///< keys set by file, environment or flags
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad value for " + key + ": '" + v + "' is not a number");
}

inline long long to_integer(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used == v.size()) return i;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad value for " + key + ": '" + v + "' is not an integer");
}

inline int to_int(const std::string& key, const std::string& v) {
  const long long i = to_integer(key, v);
  if (i < -2147483647LL || i > 2147483647LL) throw ConfigError("bad value for " + key + ": out of range");
  return static_cast<int>(i);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad value for " + key + ": '" + v + "' (expected on|off)");
}

inline std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& t : split(v, ',')) out.push_back(to_double(key, t));
  return out;
}

/// "2", "1i", "-3.5i", "1+2i", "1-2i".
inline cdouble to_complex(const std::string& key, const std::string& v) {
  if (v.empty() || v.back() != 'i') return to_double(key, v);
  const std::string body = v.substr(0, v.size() - 1);
  std::size_t split_at = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;)
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split_at = i;
      break;
    }
  if (split_at == std::string::npos) {
    const std::string im = body.empty() || body == "+" ? "1" : body == "-" ? "-1" : body;
    return {0.0, to_double(key, im)};
  }
  std::string im = body.substr(split_at);
  if (im == "+" || im == "-") im += "1";
  return {to_double(key, body.substr(0, split_at)), to_double(key, im)};
}

inline std::vector<cdouble> to_complexes(const std::string& key, const std::string& v) {
  std::vector<cdouble> out;
  for (const auto& t : split(v, ',')) out.push_back(to_complex(key, t));
  return out;
}

inline void check_key(const std::string& key) {
  const auto& keys = valid_keys();
  if (std::find(keys.begin(), keys.end(), key) != keys.end()) return;
  std::string list;
  for (const auto& k : keys) list += (list.empty() ? "" : ", ") + k;
  throw ConfigError("unknown key '" + key + "'; valid keys: " + list);
}

inline KeyMap read_ini(std::istream& in, const std::string& origin) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  KeyMap out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(origin + ": key '" + section + "' outside a [section]");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      check_key(full);
      out[full] = trim(value.data());
    }
  }
  return out;
}

}  // namespace detail

/// Parses "zero", "sine:k[:amp]", "parabola[:amp]" or "power:p[:amp]".
inline Profile parse_profile(const std::string& spec) {
  const auto parts = detail::split(spec, ':');
  if (parts.empty()) throw ConfigError("empty initial profile");
  const std::string& kind = parts[0];
  auto arg = [&](std::size_t i, double fallback) {
    return parts.size() > i ? detail::to_double("profile '" + spec + "'", parts[i]) : fallback;
  };
  if (kind == "zero" && parts.size() == 1) return Profile::zero();
  if (kind == "sine" && parts.size() >= 2 && parts.size() <= 3)
    return Profile::sine(detail::to_int("profile '" + spec + "'", parts[1]), arg(2, 1.0));
  if (kind == "parabola" && parts.size() <= 2) return Profile::parabola(arg(1, 1.0));
  if (kind == "power" && parts.size() >= 2 && parts.size() <= 3) return Profile::power(arg(1, 0.0), arg(2, 1.0));
  throw ConfigError("bad initial profile '" + spec + "' (expected zero, sine:k[:amp], parabola[:amp], power:p[:amp])");
}

/// Defaults that depend on the subcommand; everything else has one default.
inline void apply_command_defaults(RunConfig& c) {
  switch (c.command) {
    case Command::resolvent:
      c.numerics.n_min = 20;
      c.numerics.n_max = 500;
      break;
    case Command::decay_fit:
      c.numerics.modes = 200;
      c.numerics.dt = 0.002;
      c.numerics.t_end = 150.0;
      c.numerics.energy_stride = 25;
      break;
    default:
      break;
  }
}

/// Fills c from the key map on top of the current values.
inline void apply_keys(RunConfig& c, const KeyMap& keys) {
  using namespace detail;
  for (const auto& [key, v] : keys) {
    check_key(key);
    auto& p = c.params;
    auto& n = c.numerics;
    if (key == "params.rho_z") p.rho_z = to_double(key, v);
    else if (key == "params.rho_u") p.rho_u = to_double(key, v);
    else if (key == "params.a1") p.a1 = to_double(key, v);
    else if (key == "params.a2") p.a2 = to_double(key, v);
    else if (key == "params.a3") p.a3 = to_double(key, v);
    else if (key == "params.gamma") p.gamma = to_double(key, v);
    else if (key == "params.alpha") p.alpha = to_double(key, v);
    else if (key == "params.kappa") p.kappa = to_double(key, v);
    else if (key == "params.length") p.length = to_double(key, v);
    else if (key == "numerics.modes") n.modes = to_int(key, v);
    else if (key == "numerics.dt") n.dt = to_double(key, v);
    else if (key == "numerics.t_end") n.t_end = to_double(key, v);
    else if (key == "numerics.u_min") n.u_min = to_double(key, v);
    else if (key == "numerics.u_max") n.u_max = to_double(key, v);
    else if (key == "numerics.h") n.h = to_double(key, v);
    else if (key == "numerics.root_tol") n.root_tol = to_double(key, v);
    else if (key == "numerics.n_min") n.n_min = to_int(key, v);
    else if (key == "numerics.n_max") n.n_max = to_int(key, v);
    else if (key == "numerics.energy_stride") n.energy_stride = to_int(key, v);
    else if (key == "numerics.snapshot_stride") n.snapshot_stride = to_int(key, v);
    else if (key == "numerics.x_points") n.x_points = to_int(key, v);
    else if (key == "numerics.probe") {
      if (v != "limit_speed" && v != "refined") throw ConfigError("bad value for numerics.probe: '" + v + "' (expected limit_speed|refined)");
      n.probe = v;
    } else if (key == "initial.z0") c.initial.z0 = v;
    else if (key == "initial.z1") c.initial.z1 = v;
    else if (key == "initial.u0") c.initial.u0 = v;
    else if (key == "initial.u1") c.initial.u1 = v;
    else if (key == "kernel.alphas") c.kernel.alphas = to_doubles(key, v);
    else if (key == "kernel.kappas") c.kernel.kappas = to_doubles(key, v);
    else if (key == "kernel.lambdas") c.kernel.lambdas = to_complexes(key, v);
    else if (key == "kernel.tol") c.kernel.tol = to_double(key, v);
    else if (key == "kernel.u_min" || key == "kernel.u_max" || key == "kernel.h") {
      if (!c.kernel.grid) c.kernel.grid = LogSubstitution{-20.0, 20.0, 0.05};
      const double d = to_double(key, v);
      if (key == "kernel.u_min") c.kernel.grid->u_min = d;
      else if (key == "kernel.u_max") c.kernel.grid->u_max = d;
      else c.kernel.grid->step = d;
    } else if (key == "resolvent.alphas") c.resolvent_alphas = to_doubles(key, v);
    else if (key == "decay.alphas") c.decay.alphas = to_doubles(key, v);
    else if (key == "decay.profile") c.decay.profile = v;
    else if (key == "decay.window") {
      if (v == "auto") {
        c.decay.auto_window = true;
      } else {
        const auto w = to_doubles(key, v);
        if (w.size() != 2) throw ConfigError("bad value for decay.window: expected 'auto' or 't_a, t_b'");
        c.decay.auto_window = false;
        c.decay.t_a = w[0];
        c.decay.t_b = w[1];
      }
    } else if (key == "decay.max_variation") c.decay.max_variation = to_double(key, v);
    else if (key == "decay.transient_fraction") c.decay.transient_fraction = to_double(key, v);
    else if (key == "output.dir") c.out_dir = v;
    else if (key == "output.plots") c.plots = to_bool(key, v);
    else if (key == "run.seed") {
      const long long s = to_integer(key, v);
      if (s < 0) throw ConfigError("bad value for run.seed: must be >= 0");
      c.seed = static_cast<std::uint64_t>(s);
    }
  }
}

/// Validation beyond the physical parameters. Throws ConfigError or
/// ValidationError.
inline void validate_run_config(const RunConfig& c) {
  require_valid(c.params);
  const auto& n = c.numerics;
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  need(n.modes >= 1, "numerics.modes must be >= 1");
  need(n.dt > 0.0, "numerics.dt must be positive");
  need(n.t_end > 0.0, "numerics.t_end must be positive");
  need(n.u_min < n.u_max && n.h > 0.0, "numerics grid needs u_min < u_max and h > 0");
  need(n.root_tol > 0.0, "numerics.root_tol must be positive");
  need(n.n_min >= 1 && n.n_max > n.n_min, "numerics needs 1 <= n_min < n_max");
  need(n.energy_stride >= 1, "numerics.energy_stride must be >= 1");
  need(n.snapshot_stride >= 0, "numerics.snapshot_stride must be >= 0");
  need(n.x_points >= 2, "numerics.x_points must be >= 2");
  for (const auto* s : {&c.initial.z0, &c.initial.z1, &c.initial.u0, &c.initial.u1}) parse_profile(*s);
  parse_profile(c.decay.profile);
  for (double a : c.kernel.alphas) need(a > 0.0 && a < 1.0, "alpha must lie in (0,1)");
  for (double a : c.resolvent_alphas) need(a > 0.0 && a < 1.0, "alpha must lie in (0,1)");
  for (double a : c.decay.alphas) need(a > 0.0 && a < 1.0, "alpha must lie in (0,1)");
  for (double k : c.kernel.kappas) need(k >= 0.0, "kernel.kappas must be >= 0");
  need(!c.kernel.alphas.empty() && !c.kernel.kappas.empty() && !c.kernel.lambdas.empty(),
       "kernel lists must not be empty");
  need(c.kernel.tol > 0.0, "kernel.tol must be positive");
  if (c.kernel.grid) need(c.kernel.grid->u_min < c.kernel.grid->u_max && c.kernel.grid->step > 0.0,
                          "kernel grid needs u_min < u_max and h > 0");
  need(c.decay.auto_window || (c.decay.t_a > 0.0 && c.decay.t_a < c.decay.t_b), "decay.window needs 0 < t_a < t_b");
  need(c.decay.max_variation > 0.0, "decay.max_variation must be positive");
  need(c.decay.transient_fraction > 0.0 && c.decay.transient_fraction <= 1.0,
       "decay.transient_fraction must lie in (0,1]");
  need(!c.out_dir.empty(), "output.dir must not be empty");
}

/// Resolution order, lowest to highest: built-in defaults (some depend on the
/// subcommand), the config text, the output-directory environment variable,
/// then flag overrides.
inline RunConfig resolve_config(Command command, const KeyMap& file_keys, const KeyMap& overrides,
                                const char* env_out_dir, const std::string& origin = {}) {
  RunConfig c;
  c.command = command;
  c.config_path = origin;
  apply_command_defaults(c);
  KeyMap merged = file_keys;
  if (env_out_dir != nullptr && *env_out_dir != '\0') merged["output.dir"] = env_out_dir;
  for (const auto& [k, v] : overrides) merged[k] = v;
  apply_keys(c, merged);
  c.explicit_keys = merged;
  validate_run_config(c);
  return c;
}

inline RunConfig parse_config_text(Command command, const std::string& text, const KeyMap& overrides = {},
                                   const char* env_out_dir = nullptr) {
  std::istringstream in(text);
  return resolve_config(command, detail::read_ini(in, "<config>"), overrides, env_out_dir);
}

/// Reads the INI file at path (may be empty: defaults plus overrides only).
inline RunConfig parse_config(Command command, const std::string& path, const KeyMap& overrides = {},
                              const char* env_out_dir = std::getenv(kOutDirEnv)) {
  KeyMap file_keys;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    file_keys = detail::read_ini(in, path);
  }
  return resolve_config(command, file_keys, overrides, env_out_dir, path);
}

inline DiffusiveGrid dynamics_grid_of(const RunConfig& c) {
  return build_grid(c.numerics.u_min, c.numerics.u_max, c.numerics.h);
}

inline SimConfig sim_config_of(const RunConfig& c) {
  SimConfig s;
  s.params = c.params;
  s.modes = c.numerics.modes;
  s.dt = c.numerics.dt;
  s.t_end = c.numerics.t_end;
  s.grid = dynamics_grid_of(c);
  s.energy_stride = c.numerics.energy_stride;
  s.snapshot_stride = c.numerics.snapshot_stride;
  s.initial = project_initial(parse_profile(c.initial.z0), parse_profile(c.initial.z1), parse_profile(c.initial.u0),
                              parse_profile(c.initial.u1), c.params.length, c.numerics.modes);
  return s;
}

}  // namespace swellfrac
