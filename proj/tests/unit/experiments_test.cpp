// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "swellfrac/experiments.hpp"

namespace swellfrac {
namespace {

EnergyTrace synthetic(const std::function<double(double)>& e, double dt, double t_end) {
  EnergyTrace tr;
  const auto steps = static_cast<int>(std::round(t_end / dt));
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    tr.times.push_back(t);
    tr.energy.push_back(e(t));
  }
  return tr;
}

TEST(FitDecayTrace, FindsPowerLawBetweenTransientAndTail) {
  // Fast transient, then t^-4, then an exponential cutoff.
  const auto tr = synthetic(
      [](double t) { return 0.95 * std::exp(-10.0 * t) + 0.05 * std::pow(1.0 + t, -4.0) * std::exp(-t / 2000.0); },
      0.05, 1e4);
  const auto r = fit_decay_trace(tr, 0.5);
  ASSERT_FALSE(r.inconclusive);
  EXPECT_NEAR(r.q, 4.0, 0.2);
  EXPECT_GT(r.t_a, 1.0);
  EXPECT_LT(r.t_b, 1e4);
  EXPECT_GT(r.r2, 0.99);
  EXPECT_DOUBLE_EQ(r.target, 4.0);
  EXPECT_FALSE(r.local_slopes.empty());
}

TEST(FitDecayTrace, PureExponentialIsInconclusive) {
  const auto tr = synthetic([](double t) { return std::exp(-t); }, 0.01, 50.0);
  EXPECT_TRUE(fit_decay_trace(tr, 0.5).inconclusive);
}

TEST(FitDecayTrace, ManualWindow) {
  const auto tr = synthetic([](double t) { return std::pow(t + 1e-3, -3.0); }, 0.1, 500.0);
  WindowPolicy w;
  w.automatic = false;
  w.t_a = 10.0;
  w.t_b = 100.0;
  const auto r = fit_decay_trace(tr, 1.0 / 3.0, w);
  EXPECT_FALSE(r.inconclusive);
  EXPECT_NEAR(r.q, 3.0, 1e-3);
  EXPECT_NEAR(r.t_a, 10.0, 0.5);
  EXPECT_NEAR(r.t_b, 100.0, 5.0);
  w.t_b = 5.0;
  EXPECT_THROW(fit_decay_trace(tr, 0.5, w), std::invalid_argument);
}

TEST(FitDecayTrace, EmptyTraceIsInconclusive) {
  EXPECT_TRUE(fit_decay_trace(EnergyTrace{}, 0.5).inconclusive);
}

TEST(DecayFit, RefusesConservativeAndUnweightedRuns) {
  SimConfig cfg;
  cfg.initial = critical_initial_data(cfg.params, cfg.modes);
  cfg.params.gamma = 0.0;
  EXPECT_THROW(decay_fit(cfg), std::invalid_argument);
  cfg.params.gamma = 1.0;
  cfg.params.kappa = 0.0;
  EXPECT_THROW(decay_fit(cfg), std::domain_error);
}

TEST(CriticalInitialData, ModalEnergyFallsLikeCube) {
  PhysicalParams p;
  const auto c = critical_initial_data(p, 64);
  for (int n : {4, 16, 64}) EXPECT_NEAR(c.z0[static_cast<std::size_t>(n - 1)], std::pow(n, -2.5), 1e-15);
  EXPECT_EQ(c.u0[10], 0.0);
  EXPECT_EQ(c.z1[10], 0.0);
}

TEST(DecayFit, ShortRunIsConclusive) {
  SimConfig cfg;
  cfg.params.alpha = 0.75;
  cfg.modes = 200;
  cfg.dt = 0.002;
  cfg.t_end = 60.0;
  cfg.energy_stride = 25;
  cfg.initial = critical_initial_data(cfg.params, cfg.modes);
  const auto r = decay_fit(cfg);
  ASSERT_FALSE(r.inconclusive);
  EXPECT_NEAR(r.q, r.target, 0.25 * r.target);
  EXPECT_GT(r.terminal_rate, 0.0);
  EXPECT_LT(r.t_b * r.terminal_rate, 100.0);
}

TEST(TerminalRate, SlowestModeIsTheHighest) {
  // |Re lambda_n| shrinks like n^-(1 - alpha), so the slowest mode is n = N.
  PhysicalParams p;
  const auto br = branch_sweep(p, 60, 60);
  const double slowest = -2.0 * std::max(br[0].points[0].root.real(), br[1].points[0].root.real());
  EXPECT_NEAR(terminal_decay_rate(p, 60), slowest, 1e-12 * slowest);
}

TEST(EigenDecayCrosscheck, SlopesAndBetas) {
  PhysicalParams p;
  const auto rows = eigen_decay_crosscheck(p, {0.25, 0.5, 0.75});
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.pass) << r.alpha;
    EXPECT_DOUBLE_EQ(r.time_exponent, 2.0 / (1.0 - r.alpha));
    EXPECT_LT(r.beta_plus, 0.0);
    EXPECT_LT(r.beta_minus, 0.0);
    EXPECT_LT(r.beta_plus_predicted, 0.0);
    EXPECT_NEAR(r.beta_plus, r.beta_plus_predicted, 0.15 * std::abs(r.beta_plus_predicted)) << r.alpha;
    EXPECT_NEAR(r.beta_minus, r.beta_minus_predicted, 0.15 * std::abs(r.beta_minus_predicted)) << r.alpha;
  }
}

}  // namespace
}  // namespace swellfrac
