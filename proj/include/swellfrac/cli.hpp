// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "swellfrac/core_model.hpp"
#include "swellfrac/experiments.hpp"
#include "swellfrac/fractional_kernel.hpp"
#include "swellfrac/modal_dynamics.hpp"
#include "swellfrac/resolvent_probe.hpp"
#include "swellfrac/run_config.hpp"
#include "swellfrac/spectrum.hpp"
#include "swellfrac/svg_plot.hpp"

namespace swellfrac {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_invariant = 2 };

struct InvariantCheck {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
};

/// 17 significant digits, scientific: round-trips every double.
inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

namespace detail {

using json = nlohmann::json;

inline json params_json(const PhysicalParams& p) {
  return {{"rho_z", p.rho_z}, {"rho_u", p.rho_u}, {"a1", p.a1},       {"a2", p.a2},        {"a3", p.a3},
          {"gamma", p.gamma}, {"alpha", p.alpha}, {"kappa", p.kappa}, {"length", p.length}};
}

inline json complex_json(cdouble z) { return json::array({z.real(), z.imag()}); }

inline json config_json(const RunConfig& c) {
  const auto& n = c.numerics;
  json lambdas = json::array();
  for (const auto& l : c.kernel.lambdas) lambdas.push_back(complex_json(l));
  json kernel = {{"alphas", c.kernel.alphas}, {"kappas", c.kernel.kappas}, {"lambdas", lambdas}, {"tol", c.kernel.tol}};
  if (c.kernel.grid)
    kernel["grid"] = {{"u_min", c.kernel.grid->u_min}, {"u_max", c.kernel.grid->u_max}, {"h", c.kernel.grid->step}};
  else
    kernel["grid"] = "alpha-dependent default";
  return {
      {"command", command_name(c.command)},
      {"source", c.config_path},
      {"params", params_json(c.params)},
      {"numerics",
       {{"modes", n.modes}, {"dt", n.dt}, {"t_end", n.t_end}, {"u_min", n.u_min}, {"u_max", n.u_max}, {"h", n.h},
        {"root_tol", n.root_tol}, {"n_min", n.n_min}, {"n_max", n.n_max}, {"energy_stride", n.energy_stride},
        {"snapshot_stride", n.snapshot_stride}, {"x_points", n.x_points}, {"probe", n.probe}}},
      {"initial", {{"z0", c.initial.z0}, {"z1", c.initial.z1}, {"u0", c.initial.u0}, {"u1", c.initial.u1}}},
      {"kernel", kernel},
      {"resolvent", {{"alphas", c.resolvent_alphas}}},
      {"decay",
       {{"alphas", c.decay.alphas}, {"profile", c.decay.profile},
        {"window", c.decay.auto_window ? json("auto") : json::array({c.decay.t_a, c.decay.t_b})},
        {"max_variation", c.decay.max_variation}, {"transient_fraction", c.decay.transient_fraction}}},
      {"output", {{"dir", c.out_dir}, {"plots", c.plots}}},
      {"run", {{"seed", c.seed}}},
      {"explicit_keys", c.explicit_keys}};
}

inline json grid_json(const DiffusiveGrid& g) {
  return {{"u_min", g.substitution.u_min}, {"u_max", g.substitution.u_max}, {"h", g.substitution.step},
          {"nodes", g.size()}, {"rule", "trapezoid in u, y = exp(u)"}};
}

inline json versions_json() {
  return {{"swellfrac", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                        std::to_string(BOOST_VERSION % 100)},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
#if defined(__clang__)
          {"compiler", std::string("clang ") + __clang_version__},
#elif defined(__GNUC__)
          {"compiler", std::string("gcc ") + __VERSION__},
#else
          {"compiler", "unknown"},
#endif
          {"cplusplus", __cplusplus}};
}

inline std::vector<double> alphas_or(const std::vector<double>& list, double fallback) {
  return list.empty() ? std::vector<double>{fallback} : list;
}

/// Shared state of one run: output location, artifacts, checks.
struct RunContext {
  const RunConfig& cfg;
  std::filesystem::path dir;
  std::ostream& log;
  json results = json::object();
  json grid = json::object();
  std::vector<InvariantCheck> checks;
  std::vector<std::string> files;

  std::filesystem::path file(const std::string& name) {
    files.push_back(name);
    return dir / name;
  }

  void check(const std::string& name, bool pass, double value, double bound) {
    checks.push_back({name, pass, value, bound});
  }
};

// ---------------------------------------------------------------------------

inline void run_kernel_check(RunContext& ctx) {
  const auto& k = ctx.cfg.kernel;
  CsvWriter csv(ctx.file("kernel_check.csv"), {"alpha", "kappa", "lambda_re", "lambda_im", "numeric_re", "numeric_im",
                                               "exact_re", "exact_im", "rel_err"});
  double worst = 0.0;
  int skipped = 0;
  json grids = json::array();
  for (double a : k.alphas) {
    const DiffusiveGrid g = k.grid ? build_grid(k.grid->u_min, k.grid->u_max, k.grid->step) : calibration_grid(a);
    json gj = grid_json(g);
    gj["alpha"] = a;
    grids.push_back(gj);
    for (double kap : k.kappas)
      for (const cdouble& lam : k.lambdas) {
        const cdouble s = kap + lam;
        if (s.imag() == 0.0 && s.real() <= 0.0) {
          ++skipped;
          continue;
        }
        const auto c = check_calibration(g, a, kap, lam);
        worst = std::max(worst, c.rel_err);
        csv.row({csv_number(a), csv_number(kap), csv_number(lam.real()), csv_number(lam.imag()),
                 csv_number(c.numeric.real()), csv_number(c.numeric.imag()), csv_number(c.exact.real()),
                 csv_number(c.exact.imag()), csv_number(c.rel_err)});
      }
  }
  ctx.grid["calibration"] = grids;
  ctx.check("closed-form calibration max rel_err", worst < k.tol, worst, k.tol);

  // Diffusive realization of the velocity U = f' against the direct Caputo
  // derivative of f(t) = t on [0, 1].
  const auto& p = ctx.cfg.params;
  constexpr double dt = 1e-3;
  constexpr std::size_t count = 1001;
  const auto f = sample_signal([](double t) { return t; }, dt, count);
  const auto U = sample_signal([](double) { return 1.0; }, dt, count);
  const DiffusiveGrid g = calibration_grid(p.alpha);
  const auto O = diffusive_realize(U, g, p.alpha, p.kappa);
  CsvWriter oc(ctx.file("oracle.csv"), {"t", "diffusive", "caputo_direct", "rel_diff"});
  double worst_oracle = 0.0;
  std::vector<double> ts, od, oq;
  for (std::size_t i = 10; i < count; i += 10) {
    const double t = f.time(i);
    const double direct = caputo_direct(f, p.alpha, p.kappa, t);
    const double rel = std::abs(O.values[i] - direct) / std::abs(direct);
    if (t >= 0.1 - 1e-12) worst_oracle = std::max(worst_oracle, rel);
    oc.row({csv_number(t), csv_number(O.values[i]), csv_number(direct), csv_number(rel)});
    ts.push_back(t);
    od.push_back(O.values[i]);
    oq.push_back(direct);
  }
  ctx.check("diffusive vs direct Caputo on [0.1, 1]", worst_oracle < 1e-3, worst_oracle, 1e-3);
  ctx.results = {{"max_rel_err", worst}, {"skipped_on_cut", skipped}, {"oracle_max_rel_diff", worst_oracle},
                 {"oracle_signal", "f(t) = t, U = f' = 1, dt = 1e-3"}};
  if (ctx.cfg.plots)
    write_svg(ctx.file("oracle.svg").string(), {"Caputo derivative of f(t) = t", "t", "value", false, false},
              {{"diffusive", ts, od, false}, {"direct", ts, oq, true}});
}

inline void run_simulate(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const SimConfig sc = sim_config_of(c);
  ctx.grid["dynamics"] = grid_json(sc.grid);
  const auto sim = simulate(sc);
  const auto& tr = sim.energy;
  {
    CsvWriter csv(ctx.file("energy.csv"), {"t", "E", "D", "residual"});
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      csv.row({csv_number(tr.times[i]), csv_number(tr.energy[i]), csv_number(tr.dissipation[i]),
               csv_number(tr.residual[i])});
  }
  if (c.numerics.snapshot_stride > 0) {
    CsvWriter csv(ctx.file("fields.csv"), {"t", "x", "z", "u"});
    std::vector<double> xs(static_cast<std::size_t>(c.numerics.x_points));
    for (std::size_t i = 0; i < xs.size(); ++i)
      xs[i] = c.params.length * static_cast<double>(i) / static_cast<double>(xs.size() - 1);
    for (const auto& snap : sim.trajectory) {
      const auto f = reconstruct(sim.trajectory, xs, c.params.length, snap.time);
      for (std::size_t i = 0; i < xs.size(); ++i)
        csv.row({csv_number(f.time), csv_number(f.x[i]), csv_number(f.z[i]), csv_number(f.u[i])});
    }
  }
  const double E0 = tr.energy.front(), ET = tr.energy.back();
  ctx.check("energy nonincreasing per step", tr.max_step_increase <= 1e-12 * E0, tr.max_step_increase, 1e-12 * E0);
  ctx.check("midpoint energy balance per step", tr.max_midpoint_balance <= 1e-12 * E0, tr.max_midpoint_balance,
            1e-12 * E0);
  if (c.params.gamma == 0.0)
    ctx.check("energy conservation (gamma = 0)", std::abs(ET - E0) <= 1e-10 * E0, std::abs(ET - E0), 1e-10 * E0);
  ctx.results = {{"E0", E0},
                 {"E_final", ET},
                 {"steps", step_count(sc.t_end, sc.dt)},
                 {"cumulative_trapezoid_residual", tr.cumulative_residual},
                 {"max_step_increase", tr.max_step_increase},
                 {"max_midpoint_balance", tr.max_midpoint_balance}};
  if (c.plots)
    write_svg(ctx.file("energy.svg").string(), {"Energy", "t", "E(t)", false, E0 > 0.0},
              {{"E", tr.times, tr.energy, false}});
}

inline void run_spectrum(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const auto& p = c.params;
  const auto br = branch_sweep(p, c.numerics.n_min, c.numerics.n_max, c.numerics.root_tol);
  CsvWriter csv(ctx.file("spectrum.csv"), {"n", "mu_n", "branch", "re_lambda", "im_lambda", "residual", "re_eps_pred",
                                           "im_eps_pred", "scaled_re"});
  double worst_res = 0.0, max_re = -std::numeric_limits<double>::infinity();
  bool bracket_ok = true;
  json branches = json::array();
  std::vector<PlotSeries> plane, slopes;
  for (const auto& b : br) {
    PlotSeries sp{branch_name(b.branch), {}, {}, true}, ss{branch_name(b.branch), {}, {}, true};
    for (const auto& pt : b.points) {
      csv.row({std::to_string(pt.n), csv_number(pt.mu), std::to_string(static_cast<int>(b.branch)),
               csv_number(pt.root.real()), csv_number(pt.root.imag()), csv_number(pt.residual),
               csv_number(pt.predicted_eps.real()), csv_number(pt.predicted_eps.imag()), csv_number(pt.scaled_re)});
      worst_res = std::max(worst_res, pt.residual);
      max_re = std::max(max_re, pt.root.real());
      if (pt.n >= 50 && !pt.in_bracket) bracket_ok = false;
      sp.x.push_back(pt.root.real());
      sp.y.push_back(pt.root.imag());
      ss.x.push_back(pt.mu);
      ss.y.push_back(std::abs(pt.root.real()));
    }
    const auto fit = real_part_slope(b, c.numerics.n_min, c.numerics.n_max);
    branches.push_back({{"branch", branch_name(b.branch)},
                        {"label", static_cast<int>(b.branch)},
                        {"limit_speed", b.speed},
                        {"slope", fit.slope},
                        {"slope_stderr", fit.slope_stderr},
                        {"target_slope", -(1.0 - p.alpha)},
                        {"beta_estimate", b.points.back().scaled_re},
                        {"beta_predicted", predicted_beta(p, b.branch)}});
    plane.push_back(std::move(sp));
    slopes.push_back(std::move(ss));
  }
  ctx.check("root residual certificate", worst_res < c.numerics.root_tol, worst_res, c.numerics.root_tol);
  if (p.gamma > 0.0) {
    ctx.check("Re lambda < 0 on every refined root", max_re < 0.0, max_re, 0.0);
    int unstable = 0;
    for (int n = c.numerics.n_min; n <= c.numerics.n_max; ++n) unstable += right_half_plane_zero_count(p, n);
    ctx.check("no zeros with Re lambda >= 0 (argument principle)", unstable == 0, unstable, 0.0);
  }
  ctx.check("|lambda/mu| within [l-/2, 2 l+] for n >= 50", bracket_ok, bracket_ok ? 0.0 : 1.0, 0.0);
  ctx.results = {{"branches", branches}, {"n_min", c.numerics.n_min}, {"n_max", c.numerics.n_max}};
  if (c.plots) {
    write_svg(ctx.file("spectrum.svg").string(), {"Eigenvalues (upper half-plane)", "Re lambda", "Im lambda"}, plane);
    write_svg(ctx.file("spectrum_slope.svg").string(), {"Decay of |Re lambda_n|", "mu_n", "|Re lambda_n|", true, true},
              slopes);
  }
}

inline void run_resolvent(RunContext& ctx) {
  const auto& c = ctx.cfg;
  const auto probe = c.numerics.probe == "refined" ? ProbeFrequency::refined : ProbeFrequency::limit_speed;
  CsvWriter csv(ctx.file("resolvent.csv"), {"alpha", "n", "lambda", "ratio", "det_abs"});
  json fits = json::array();
  json grids = json::array();
  double min_det = std::numeric_limits<double>::infinity();
  std::vector<PlotSeries> series;
  for (double a : alphas_or(c.resolvent_alphas, c.params.alpha)) {
    PhysicalParams p = c.params;
    p.alpha = a;
    const DiffusiveGrid g = calibration_grid(a);
    json gj = grid_json(g);
    gj["alpha"] = a;
    grids.push_back(gj);
    const auto rg = resolvent_growth(p, c.numerics.n_min, c.numerics.n_max, g, probe);
    PlotSeries s{"alpha = " + csv_number(a).substr(0, 4), {}, {}, true};
    for (const auto& smp : rg.samples) {
      csv.row({csv_number(a), std::to_string(smp.n), csv_number(smp.lambda), csv_number(smp.ratio),
               csv_number(smp.det_abs)});
      min_det = std::min(min_det, smp.det_abs);
      s.x.push_back(smp.lambda);
      s.y.push_back(smp.ratio);
    }
    fits.push_back({{"alpha", a},
                    {"slope", rg.fit.slope},
                    {"slope_stderr", rg.fit.slope_stderr},
                    {"band_2sigma", {rg.fit.slope - 2.0 * rg.fit.slope_stderr, rg.fit.slope + 2.0 * rg.fit.slope_stderr}},
                    {"r2", rg.fit.r2},
                    {"target", 1.0 - a},
                    {"within_10_percent", std::abs(rg.fit.slope - (1.0 - a)) < 0.1 * (1.0 - a)}});
    series.push_back(std::move(s));
  }
  ctx.grid["calibration"] = grids;
  ctx.check("det M_n(i lambda) nonzero at every probe", min_det > 0.0 && std::isfinite(min_det), min_det, 0.0);

  // lambda = 0: random smooth forcings seeded from run.seed.
  const DiffusiveGrid dg = dynamics_grid_of(c);
  ctx.grid["static"] = grid_json(dg);
  const int static_modes = std::min(c.numerics.modes, 32);
  const double bound = static_norm_bound(c.params, static_modes, dg);
  double worst_static = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k)
    worst_static = std::max(worst_static,
                            static_solve(c.params, random_smooth_forcing(static_modes, c.seed + k, dg), dg).ratio);
  ctx.check("static ||U||/||F|| bounded by ||A^-1|| (20 seeded trials)",
            std::isfinite(worst_static) && worst_static <= bound * (1.0 + 1e-9), worst_static, bound);
  ctx.results = {{"fits", fits},
                 {"probe", c.numerics.probe},
                 {"forcing", "unit f2 per mode"},
                 {"static", {{"max_ratio", worst_static}, {"operator_bound", bound}, {"trials", 20},
                             {"modes", static_modes}, {"seeds", {c.seed, c.seed + 19}}}}};
  if (c.plots)
    write_svg(ctx.file("resolvent.svg").string(), {"Resolvent lower bound", "lambda", "||U|| / ||F||", true, true},
              series);
}

inline void run_decay_fit(RunContext& ctx) {
  const auto& c = ctx.cfg;
  if (c.params.gamma == 0.0) throw std::invalid_argument("decay-fit refused: gamma = 0 conserves energy, exponent undefined");
  if (!(c.params.kappa > 0.0)) throw std::domain_error("decay-fit requires kappa > 0");
  WindowPolicy policy;
  policy.automatic = c.decay.auto_window;
  policy.t_a = c.decay.t_a;
  policy.t_b = c.decay.t_b;
  policy.max_variation = c.decay.max_variation;
  policy.transient_fraction = c.decay.transient_fraction;

  CsvWriter csv(ctx.file("decay.csv"), {"alpha", "t", "E"});
  json fits = json::array();
  std::vector<PlotSeries> series;
  std::vector<double> qs;
  bool conclusive = true;
  for (double a : alphas_or(c.decay.alphas, c.params.alpha)) {
    SimConfig sc = sim_config_of(c);
    sc.params.alpha = a;
    sc.initial = project_initial(parse_profile(c.decay.profile), Profile::zero(), Profile::zero(), Profile::zero(),
                                 c.params.length, c.numerics.modes);
    ctx.grid["dynamics"] = grid_json(sc.grid);
    const auto sim = simulate(sc);
    auto fit = fit_decay_trace(sim.energy, a, policy);
    fit.terminal_rate = terminal_decay_rate(sc.params, sc.modes);
    const auto& tr = sim.energy;
    for (std::size_t i = 0; i < tr.times.size(); ++i)
      csv.row({csv_number(a), csv_number(tr.times[i]), csv_number(tr.energy[i])});
    fits.push_back({{"alpha", a},
                    {"t_a", fit.t_a},
                    {"t_b", fit.t_b},
                    {"q", fit.q},
                    {"target", fit.target},
                    {"rel_dev", fit.inconclusive ? json(nullptr) : json(std::abs(fit.q - fit.target) / fit.target)},
                    {"r2", fit.r2},
                    {"terminal_rate", fit.terminal_rate},
                    {"inconclusive", fit.inconclusive}});
    conclusive = conclusive && !fit.inconclusive;
    qs.push_back(fit.q);
    series.push_back({"alpha = " + csv_number(a).substr(0, 4), tr.times, tr.energy, false});
  }
  ctx.check("algebraic window detected", conclusive, conclusive ? 0.0 : 1.0, 0.0);
  const auto alphas = alphas_or(c.decay.alphas, c.params.alpha);
  if (alphas.size() > 1 && conclusive) {
    bool ordered = true;
    for (std::size_t i = 1; i < alphas.size(); ++i)
      if ((alphas[i] - alphas[i - 1]) * (qs[i] - qs[i - 1]) <= 0.0) ordered = false;
    ctx.check("fitted exponents ordered like 2/(1-alpha)", ordered, ordered ? 0.0 : 1.0, 0.0);
  }
  ctx.results = {{"fits", fits}, {"profile", c.decay.profile}};
  if (c.plots)
    write_svg(ctx.file("decay.svg").string(), {"Energy decay", "t", "E(t)", true, true}, series);
}

}  // namespace detail

/// Runs one subcommand and writes its artifacts plus manifest.json into
/// cfg.out_dir. Returns 0 on success, 1 on validation failure, 2 when a
/// numerical invariant fails or the computation breaks down.
inline int run(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  namespace fs = std::filesystem;
  using detail::json;
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    err << "error: output directory '" << cfg.out_dir << "' is not writable" << (ec ? ": " + ec.message() : "")
        << '\n';
    return exit_validation;
  }
  detail::RunContext ctx{cfg, dir, out};
  const auto t0 = std::chrono::steady_clock::now();
  int code = exit_ok;
  std::string error;
  try {
    validate_run_config(cfg);
    switch (cfg.command) {
      case Command::kernel_check: detail::run_kernel_check(ctx); break;
      case Command::simulate: detail::run_simulate(ctx); break;
      case Command::spectrum: detail::run_spectrum(ctx); break;
      case Command::resolvent: detail::run_resolvent(ctx); break;
      case Command::decay_fit: detail::run_decay_fit(ctx); break;
    }
  } catch (const std::invalid_argument& e) {
    code = exit_validation;
    error = e.what();
  } catch (const std::domain_error& e) {
    code = exit_validation;
    error = e.what();
  } catch (const std::exception& e) {
    code = exit_invariant;
    error = e.what();
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json checks = json::array();
  bool all_pass = true;
  for (const auto& c : ctx.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"bound", c.bound}});
    all_pass = all_pass && c.pass;
  }
  if (code == exit_ok && !all_pass) code = exit_invariant;
  json manifest = {{"tool", "swellfrac"},
                   {"status", code == exit_ok ? "ok" : "FAILED"},
                   {"exit_code", code},
                   {"config", detail::config_json(cfg)},
                   {"grid", ctx.grid},
                   {"versions", detail::versions_json()},
                   {"timing", {{"wall_seconds", seconds}}},
                   {"invariants", checks},
                   {"results", ctx.results},
                   {"files", ctx.files}};
  if (!error.empty()) manifest["error"] = error;
  {
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << '\n';
  }

  out << command_name(cfg.command) << ": " << (code == exit_ok ? "ok" : "FAILED") << " (" << seconds << " s), output in "
      << dir.string() << '\n';
  for (const auto& c : ctx.checks)
    out << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name << ": " << c.value << " (bound " << c.bound << ")\n";
  if (!error.empty()) err << "error: " << error << '\n';
  return code;
}

}  // namespace swellfrac
