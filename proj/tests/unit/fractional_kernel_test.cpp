// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "swellfrac/fractional_kernel.hpp"

namespace swellfrac {
namespace {

constexpr double pi = std::numbers::pi;

TEST(BuildGrid, CalibrationDefaults) {
  const auto g = calibration_grid();
  EXPECT_EQ(g.size(), 801u);
  EXPECT_NEAR(g.nodes.front(), std::exp(-20.0), 1e-20);
  EXPECT_NEAR(g.nodes.back(), std::exp(20.0), 1e-3);
  for (std::size_t j = 1; j < g.size(); ++j) EXPECT_LT(g.nodes[j - 1], g.nodes[j]);
  for (double w : g.weights) EXPECT_GT(w, 0.0);
  EXPECT_EQ(dynamics_grid().size(), 161u);
}

TEST(BuildGrid, EmptyRangeRejected) {
  EXPECT_THROW(build_grid(1.0, 1.0, 0.1), std::invalid_argument);
  EXPECT_THROW(build_grid(2.0, 1.0, 0.1), std::invalid_argument);
  EXPECT_THROW(build_grid(-1.0, 1.0, 0.0), std::invalid_argument);
}

TEST(BuildGrid, AlphaAwareGridMatchesDefaultAtHalf) {
  const auto a = calibration_grid(0.5);
  const auto b = calibration_grid();
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a.substitution.u_min, -20.0);
  EXPECT_EQ(a.substitution.u_max, 20.0);
  EXPECT_GT(calibration_grid(0.1).size(), a.size());
}

TEST(ResolventIntegral, SpotValues) {
  EXPECT_NEAR(calibration_exact(0.5, 1.0, 0.0).real(), pi, 1e-15);
  EXPECT_NEAR(calibration_exact(0.25, 1.0, 0.0).real(), pi * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(pi * std::sqrt(2.0), 4.442883, 1e-6);
  // pi (1+i)^(-1/2): modulus 2^(-1/4), argument -pi/8.
  const auto e = calibration_exact(0.5, 1.0, {0.0, 1.0});
  const std::complex<double> expected = std::polar(pi * std::pow(2.0, -0.25), -pi / 8.0);
  EXPECT_NEAR(std::abs(e - expected), 0.0, 1e-14);
}

TEST(ResolventIntegral, ReferenceGridReachesHighAccuracy) {
  const auto g = calibration_grid();
  EXPECT_LT(check_calibration(g, 0.5, 1.0, 0.0).rel_err, 1e-8);
  EXPECT_LT(check_calibration(g, 0.5, 1.0, {0.0, 1.0}).rel_err, 1e-8);
}

TEST(ResolventIntegral, CalibrationMatrix) {
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double a = i / 10.0;
    const auto g = calibration_grid(a);
    for (double k : {0.5, 1.0, 5.0})
      for (std::complex<double> l : {std::complex<double>(0.0), {1.0, 0.0}, {10.0, 0.0}, {0.0, 1.0}, {0.0, 10.0}})
        worst = std::max(worst, check_calibration(g, a, k, l).rel_err);
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(ResolventIntegral, AgreesWithAdaptiveQuadrature) {
  // Independent route: tanh-sinh on (0, inf) in the original variable y.
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double a : {0.3, 0.6}) {
    for (double k : {0.5, 2.0}) {
      const double ref = 2.0 * ts.integrate(
                                   [&](double y) { return std::pow(y, 2.0 * a - 1.0) / (y * y + k); }, 0.0,
                                   std::numeric_limits<double>::infinity());
      EXPECT_NEAR(calibration_exact(a, k, 0.0).real(), ref, 1e-9 * ref);
    }
  }
}

TEST(ResolventIntegral, HalvingStepConverges) {
  // Wide range so the step error is not masked by truncation.
  double prev = check_calibration(build_grid(-40.0, 40.0, 1.6), 0.5, 1.0, 0.0).rel_err;
  for (double h : {0.8, 0.4, 0.2, 0.1}) {
    const double e = check_calibration(build_grid(-40.0, 40.0, h), 0.5, 1.0, 0.0).rel_err;
    if (prev > 1e-14) EXPECT_LE(e, prev / 4.0) << "h = " << h;
    prev = e;
  }
  EXPECT_LT(prev, 1e-14);
}

TEST(ResolventIntegral, TruncatedRangeDominates) {
  EXPECT_GT(check_calibration(build_grid(-20.0, 1.0, 0.05), 0.5, 1.0, 0.0).rel_err, 1e-2);
}

TEST(ResolventIntegral, BranchCutRejected) {
  const auto g = calibration_grid();
  EXPECT_THROW(check_calibration(g, 0.5, 1.0, -2.0), std::domain_error);
  EXPECT_THROW(check_calibration(g, 0.5, 0.0, 0.0), std::domain_error);
  EXPECT_NO_THROW(check_calibration(g, 0.5, 1.0, {-2.0, 0.1}));
}

TEST(CaputoDirect, ConstantHasZeroDerivative) {
  const auto f = sample_signal([](double) { return 3.0; }, 0.01, 101);
  EXPECT_EQ(caputo_direct(f, 0.5, 1.0, 1.0), 0.0);
}

TEST(CaputoDirect, LinearMonomial) {
  const auto f = sample_signal([](double t) { return t; }, 0.01, 101);
  EXPECT_NEAR(caputo_direct(f, 0.5, 0.0, 1.0), 2.0 / std::sqrt(pi), 1e-13);
  EXPECT_NEAR(2.0 / std::sqrt(pi), 1.128379, 1e-6);
}

TEST(CaputoDirect, WeightedLinearAgainstAdaptiveQuadrature) {
  // (1/Gamma(1/2)) int_0^1 s^(-1/2) e^(-s) ds = erf(1).
  boost::math::quadrature::tanh_sinh<double> ts;
  const double ref =
      ts.integrate([](double s) { return std::exp(-s) / std::sqrt(s); }, 0.0, 1.0) / std::tgamma(0.5);
  EXPECT_NEAR(ref, std::erf(1.0), 1e-12);
  double prev = 0.0;
  for (std::size_t steps : {100u, 1000u, 10000u}) {
    const auto f = sample_signal([](double t) { return t; }, 1.0 / static_cast<double>(steps), steps + 1);
    const double err = std::abs(caputo_direct(f, 0.5, 1.0, 1.0) - ref);
    if (prev > 0.0) EXPECT_LT(err, prev / 10.0);
    prev = err;
  }
  EXPECT_LT(prev, 1e-6);
}

TEST(CaputoDirect, OffGridRejected) {
  const auto f = sample_signal([](double t) { return t; }, 0.1, 11);
  EXPECT_THROW(caputo_direct(f, 0.5, 0.0, 0.55), std::domain_error);
  EXPECT_THROW(caputo_direct(f, 0.5, 0.0, 1.5), std::domain_error);
}

TEST(IAlphaKappa, UnitSignal) {
  const auto one = sample_signal([](double) { return 1.0; }, 0.01, 101);
  EXPECT_NEAR(i_alpha_kappa(one, 0.5, 0.0, 1.0), 2.0 / std::sqrt(pi), 1e-13);
  const auto zero = sample_signal([](double) { return 0.0; }, 0.01, 101);
  EXPECT_EQ(i_alpha_kappa(zero, 0.5, 1.0, 1.0), 0.0);
}

TEST(IAlphaKappa, CaputoIsIntegralOfDerivative) {
  // f = sin(3t): compare with the integral of order 1 - alpha applied to f' = 3 cos(3t).
  const double dt = 1e-3;
  const auto f = sample_signal([](double t) { return std::sin(3.0 * t); }, dt, 1001);
  const auto df = sample_signal([](double t) { return 3.0 * std::cos(3.0 * t); }, dt, 1001);
  for (double a : {0.3, 0.7})
    for (double t : {0.25, 0.5, 1.0}) {
      const double lhs = caputo_direct(f, a, 0.8, t);
      const double rhs = i_alpha_kappa(df, 1.0 - a, 0.8, t);
      EXPECT_NEAR(lhs, rhs, 2e-3 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(DiffusiveRealize, ZeroInput) {
  const auto U = sample_signal([](double) { return 0.0; }, 0.01, 50);
  const auto O = diffusive_realize(U, dynamics_grid(), 0.5, 1.0);
  for (double v : O.values) EXPECT_EQ(v, 0.0);
}

TEST(DiffusiveRealize, StepInputSettlesToStationaryValue) {
  // Stationary phi = mu / (y^2 + kappa); output kappa^(alpha - 1) = 1.
  const auto U = sample_signal([](double) { return 1.0; }, 0.05, 801);
  const auto O = diffusive_realize(U, calibration_grid(), 0.5, 1.0);
  EXPECT_NEAR(O.values.back(), 1.0, 1e-6);
}

TEST(DiffusiveRealize, MatchesDirectCaputoWithoutWeight) {
  const double dt = 1e-3;
  const auto f = sample_signal([](double t) { return t; }, dt, 1001);
  const auto U = sample_signal([](double) { return 1.0; }, dt, 1001);
  const auto O = diffusive_realize(U, calibration_grid(), 0.5, 0.0);
  for (std::size_t k = 100; k <= 1000; k += 50) {
    const double t = f.time(k);
    const double closed = std::pow(t, 0.5) / std::tgamma(1.5);
    EXPECT_NEAR(O.values[k], closed, 1e-3 * closed);
    EXPECT_NEAR(O.values[k], caputo_direct(f, 0.5, 0.0, t), 1e-3 * closed);
  }
}

TEST(DiffusiveRealize, SmoothSignalMatchesDirect) {
  const double dt = 1e-3;
  for (double a : {0.3, 0.5, 0.8}) {
    const auto f = sample_signal([](double t) { return t * t * std::exp(-t); }, dt, 2001);
    const auto U = sample_signal([](double t) { return (2.0 * t - t * t) * std::exp(-t); }, dt, 2001);
    const auto O = diffusive_realize(U, calibration_grid(a), a, 1.0);
    for (std::size_t k = 200; k <= 2000; k += 200) {
      const double ref = caputo_direct(f, a, 1.0, f.time(k));
      EXPECT_NEAR(O.values[k], ref, 1e-3 * std::abs(ref)) << "alpha " << a << " t " << f.time(k);
    }
  }
}

TEST(DiffusiveRealize, NonnegativeForNondecreasingInput) {
  const auto U = sample_signal([](double t) { return std::min(t, 0.5); }, 0.01, 300);
  const auto O = diffusive_realize(U, dynamics_grid(), 0.3, 0.5);
  for (double v : O.values) EXPECT_GE(v, 0.0);
}

}  // namespace
}  // namespace swellfrac
