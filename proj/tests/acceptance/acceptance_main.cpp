// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here and must not be loosened.

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "swellfrac/experiments.hpp"
#include "swellfrac/fractional_kernel.hpp"
#include "swellfrac/modal_dynamics.hpp"
#include "swellfrac/resolvent_probe.hpp"
#include "swellfrac/spectrum.hpp"

using namespace swellfrac;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Closed-form calibration of the y-quadrature.
Outcome kernel_calibration() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double a = 0.1 * i;
    const auto g = calibration_grid(a);
    for (double k : {0.5, 1.0, 5.0})
      for (cdouble l : {cdouble(0.0), cdouble(1.0), cdouble(10.0), cdouble(0.0, 1.0), cdouble(0.0, 10.0)})
        worst = std::max(worst, check_calibration(g, a, k, l).rel_err);
  }
  const double s1 = std::abs(calibration_numeric(calibration_grid(0.5), 0.5, 1.0, 0.0) - pi) / pi;
  const double s2 = std::abs(calibration_numeric(calibration_grid(0.25), 0.25, 1.0, 0.0) - pi * std::sqrt(2.0)) /
                    (pi * std::sqrt(2.0));
  const double secs = seconds_since(t0);
  return {worst < 1e-6 && s1 < 1e-6 && s2 < 1e-6 && secs < 1.0,
          fmt("max rel_err %.2e over 135 cases, spot pi %.1e, pi*sqrt2 %.1e (tol 1e-6), %.2f s (< 1 s)", worst, s1, s2,
              secs)};
}

// 2. Diffusive realization against D^alpha t = t^(1-alpha) / Gamma(2-alpha).
Outcome caputo_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const double a = 0.5, dt = 1e-3;
  const auto U = sample_signal([](double) { return 1.0; }, dt, 1001);
  const auto O = diffusive_realize(U, calibration_grid(a), a, 0.0);
  double worst = 0.0;
  for (std::size_t k = 100; k <= 1000; ++k) {
    const double t = O.time(k);
    const double exact = std::pow(t, 1.0 - a) / std::tgamma(2.0 - a);
    worst = std::max(worst, std::abs(O.values[k] - exact) / exact);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 5.0,
          fmt("max rel diff %.2e on t in [0.1, 1] (tol 1e-3), %.2f s (< 5 s)", worst, secs)};
}

// 3. gamma = 0 conserves energy over 100 periods of the slowest wave.
Outcome conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  SimConfig c;
  c.params.gamma = 0.0;
  c.modes = 16;
  c.dt = 0.01;
  const double slow_period = 2.0 * pi / (limit_speeds(c.params).minus * mode_frequency(c.params, 1));
  c.t_end = 100.0 * slow_period;
  c.energy_stride = 1000;
  c.initial = project_initial(Profile::parabola(), Profile::zero(), Profile::sine(3), Profile::zero(), c.params.length,
                              c.modes);
  const auto r = simulate(c);
  const double E0 = r.energy.energy.front();
  const double drift = std::abs(r.energy.energy.back() - E0) / E0;
  const double secs = seconds_since(t0);
  return {drift < 1e-10 && secs < 10.0,
          fmt("|E(T)-E(0)|/E(0) = %.2e at T = %.1f (tol 1e-10), %.2f s (< 10 s)", drift, c.t_end, secs)};
}

// 4. Per-step dissipativity and O(dt^2) convergence of the balance residual.
Outcome dissipativity() {
  SimConfig c;
  c.modes = 16;
  c.t_end = 10.0;
  c.initial = project_initial(Profile::parabola(), Profile::zero(), Profile::sine(2), Profile::zero(), c.params.length,
                              c.modes);
  std::vector<double> cum;
  double worst_increase = 0.0, worst_balance = 0.0;
  for (double dt : {0.02, 0.01, 0.005}) {
    c.dt = dt;
    const auto r = simulate(c);
    const double E0 = r.energy.energy.front();
    worst_increase = std::max(worst_increase, r.energy.max_step_increase / E0);
    worst_balance = std::max(worst_balance, r.energy.max_midpoint_balance / E0);
    cum.push_back(r.energy.cumulative_residual);
  }
  const double o1 = std::log2(cum[0] / cum[1]), o2 = std::log2(cum[1] / cum[2]);
  const bool pass = worst_increase <= 1e-12 && worst_balance <= 1e-12 && o1 >= 1.8 && o1 <= 2.2 && o2 >= 1.8 &&
                    o2 <= 2.2;
  return {pass, fmt("max step increase %.1e E0, max balance residual %.1e E0 (tol 1e-12); observed orders %.3f, %.3f "
                    "(in [1.8, 2.2])",
                    worst_increase, worst_balance, o1, o2)};
}

// 5. Root certificates, the undamped quartic, and Re lambda < 0.
Outcome spectrum_certificates() {
  PhysicalParams q;
  q.gamma = 0.0;
  // Independent oracle: eigenvalues of the companion matrix of
  // lambda^4 + m lambda^2 + p with m = 4, p = 3.
  Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
  C(0, 1) = C(1, 2) = C(2, 3) = 1.0;
  C(3, 0) = -3.0;
  C(3, 2) = -4.0;
  const Eigen::Vector4cd ev = C.eigenvalues();
  const cdouble I(0.0, 1.0);
  const std::array<cdouble, 4> expected{I, -I, I * std::sqrt(3.0), -I * std::sqrt(3.0)};
  double quartic_err = 0.0;
  for (const auto& e : expected) {
    double nearest = 1e300;
    for (int i = 0; i < 4; ++i) nearest = std::min(nearest, std::abs(ev(i) - e));
    quartic_err = std::max(quartic_err, nearest);
    // Newton from a nearby seed must land back on the exact root.
    quartic_err = std::max(quartic_err, std::abs(refine_root(e * (1.0 + 1e-3), q, 1).root - e));
  }
  // quartic_roots orders {+i l+, -i l+, +i l-, -i l-} with l+ = sqrt 3, l- = 1.
  const auto qr = quartic_roots(q, 1);
  const std::array<cdouble, 4> ordered{expected[2], expected[3], expected[0], expected[1]};
  for (std::size_t i = 0; i < 4; ++i) quartic_err = std::max(quartic_err, std::abs(qr[i] - ordered[i]));

  // Refined roots on both families, and an independent zero count in the
  // closed right half-plane (argument principle) that needs no family labels.
  double worst_res = 0.0, max_re = -1e300;
  int unstable = 0;
  for (double a : {0.25, 0.5, 0.75})
    for (double g : {0.1, 1.0, 10.0}) {
      PhysicalParams p;
      p.alpha = a;
      p.gamma = g;
      if (g <= 1.0)
        for (const auto& br : branch_sweep(p, 1, 500))
          for (const auto& pt : br.points) {
            worst_res = std::max(worst_res, pt.residual);
            max_re = std::max(max_re, pt.root.real());
          }
      for (int n = 1; n <= 500; ++n) unstable += right_half_plane_zero_count(p, n);
    }
  return {worst_res < 1e-10 && quartic_err < 1e-14 && max_re < 0.0 && unstable == 0,
          fmt("max root residual %.1e (tol 1e-10); quartic {+-i, +-i sqrt3} error %.1e; max Re lambda %.3e on refined "
              "roots (n = 1..500, gamma 0.1 and 1); %d zeros with Re >= 0 over n = 1..500, gamma in {0.1, 1, 10}, "
              "alpha in {0.25, 0.5, 0.75}",
              worst_res, quartic_err, max_re, unstable)};
}

// 6. log|Re lambda_n| against log mu_n.
Outcome spectral_slope() {
  bool pass = true;
  std::string detail;
  for (double a : {0.25, 0.5, 0.75}) {
    const auto t0 = std::chrono::steady_clock::now();
    PhysicalParams p;
    p.alpha = a;
    const auto br = branch_sweep(p, 50, 500);
    const double s1 = real_part_slope(br[0], 50, 500).slope, s2 = real_part_slope(br[1], 50, 500).slope;
    const double secs = seconds_since(t0);
    const double target = -(1.0 - a);
    pass = pass && std::abs(s1 - target) < 0.05 * std::abs(target) && std::abs(s2 - target) < 0.05 * std::abs(target) &&
           secs < 30.0;
    detail += fmt("alpha %.2f: %.4f/%.4f vs %.3f (%.2f s); ", a, s1, s2, target, secs);
  }
  return {pass, detail + "tol 5%, < 30 s per alpha"};
}

// 7. Refined roots against the first-order expansion.
Outcome perturbation() {
  double worst = 0.0;
  for (double a : {0.25, 0.5, 0.75}) {
    PhysicalParams p;
    p.alpha = a;
    for (const auto& br : branch_sweep(p, 100, 1000))
      for (const auto& pt : br.points) {
        const cdouble l0(0.0, br.speed * pt.mu);
        worst = std::max(worst, std::abs(pt.root - (l0 + pt.predicted_eps)) / std::abs(pt.predicted_eps));
      }
  }
  return {worst < 0.05, fmt("max |refined - (l0 + eps)| / |eps| = %.4f over n = 100..1000, both branches, alpha in "
                            "{0.25, 0.5, 0.75} (tol 0.05)",
                            worst)};
}

// 8. Resolvent growth along the imaginary axis.
Outcome resolvent() {
  bool pass = true;
  std::string detail;
  for (double a : {0.25, 0.5, 0.75}) {
    const auto t0 = std::chrono::steady_clock::now();
    PhysicalParams p;
    p.alpha = a;
    const auto r = resolvent_growth(p, 20, 500, calibration_grid(a));
    const double secs = seconds_since(t0);
    pass = pass && std::abs(r.fit.slope - (1.0 - a)) < 0.1 * (1.0 - a) && secs < 30.0;
    detail += fmt("alpha %.2f: %.4f vs %.2f (%.2f s); ", a, r.fit.slope, 1.0 - a, secs);
  }
  return {pass, detail + "tol 10%, < 30 s per alpha"};
}

// 9. Static solve.
Outcome static_problem() {
  PhysicalParams p;
  const auto g = dynamics_grid();
  std::vector<ModalForcing> F(1);
  F[0].f4 = 1.0;
  const auto s = static_solve(p, F, g);
  const double err = std::max(std::abs(s.modes[0].z + 1.0 / 3.0), std::abs(s.modes[0].u - 2.0 / 3.0));
  const int modes = 8;
  const double bound = static_norm_bound(p, modes, g);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) worst = std::max(worst, static_solve(p, random_smooth_forcing(modes, seed, g), g).ratio);
  return {err <= 1e-15 && std::isfinite(worst) && worst <= bound * (1.0 + 1e-9),
          fmt("f4 example error %.1e (round-off 1e-15); max ||U||/||F|| over 20 trials %.4f <= operator bound %.4f",
              err, worst, bound)};
}

// 10. Intermediate-window decay exponents.
Outcome decay_trend() {
  std::vector<double> qs;
  std::string detail;
  bool conclusive = true;
  for (double a : {0.25, 0.5, 0.75}) {
    const auto t0 = std::chrono::steady_clock::now();
    SimConfig c;
    c.params.alpha = a;
    c.modes = 200;
    c.dt = 0.002;
    c.t_end = 150.0;
    c.energy_stride = 25;
    c.initial = critical_initial_data(c.params, c.modes);
    const auto r = decay_fit(c);
    conclusive = conclusive && !r.inconclusive;
    qs.push_back(r.q);
    detail += fmt("alpha %.2f: q %.3f vs %.3f on [%.2f, %.2f] (%.1f s); ", a, r.q, r.target, r.t_a, r.t_b,
                  seconds_since(t0));
  }
  const bool ordered = qs[0] < qs[1] && qs[1] < qs[2];
  const double dev = std::abs(qs[1] - 4.0) / 4.0;
  return {conclusive && ordered && dev < 0.25,
          detail + fmt("ordered %s, alpha 0.5 deviation %.1f%% (tol 25%%)", ordered ? "yes" : "no", 100.0 * dev)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"kernel calibration", kernel_calibration},
      {"diffusive vs Caputo oracle", caputo_oracle},
      {"energy conservation", conservation},
      {"discrete dissipativity", dissipativity},
      {"spectrum certificates", spectrum_certificates},
      {"real-part decay slope", spectral_slope},
      {"perturbation consistency", perturbation},
      {"resolvent growth", resolvent},
      {"static solve", static_problem},
      {"decay trend", decay_trend}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
