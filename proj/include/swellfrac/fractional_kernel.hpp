// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "swellfrac/core_model.hpp"

namespace swellfrac {

using cdouble = std::complex<double>;

struct LogSubstitution {
  double u_min;
  double u_max;
  double step;
};

/// Trapezoid rule in u for integrals over y in (0, inf) with y = e^u. Only
/// the positive half-line is stored; integrands here are even in y, so
/// full-line integrals are 2 * sum(w_j f(y_j)).
struct DiffusiveGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  LogSubstitution substitution{};

  [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
  [[nodiscard]] bool empty() const noexcept { return nodes.empty(); }
};

inline DiffusiveGrid build_grid(double u_min, double u_max, double h) {
  if (!(u_min < u_max)) throw std::invalid_argument("build_grid: empty grid (u_min must be < u_max)");
  if (!(h > 0.0)) throw std::invalid_argument("build_grid: step h must be positive");
  const auto intervals = static_cast<std::size_t>(std::max(1.0, std::round((u_max - u_min) / h)));
  const double step = (u_max - u_min) / static_cast<double>(intervals);
  DiffusiveGrid g;
  g.substitution = {u_min, u_max, step};
  g.nodes.resize(intervals + 1);
  g.weights.resize(intervals + 1);
  for (std::size_t j = 0; j <= intervals; ++j) {
    const double u = u_min + static_cast<double>(j) * step;
    const double y = std::exp(u);
    const double end = (j == 0 || j == intervals) ? 0.5 : 1.0;
    g.nodes[j] = y;
    g.weights[j] = end * step * y;
  }
  return g;
}

/// u in [-20, 20], h = 0.05: spectrally accurate for the closed-form checks.
inline DiffusiveGrid calibration_grid() { return build_grid(-20.0, 20.0, 0.05); }

/// The same step, with the u-range widened until the neglected tails of
/// y^(2 alpha - 1) / (y^2 + c), about e^(2 alpha u_min) / (2 alpha) and
/// e^(-(2 - 2 alpha) u_max) / (2 - 2 alpha), drop below tail_tol. Needed
/// when alpha is far from 1/2; for alpha = 1/2 this is calibration_grid().
inline DiffusiveGrid calibration_grid(double alpha, double tail_tol = 1e-8) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("calibration_grid: alpha must lie in (0,1)");
  constexpr double h = 0.05;
  const double lo = std::log(tail_tol * 2.0 * alpha) / (2.0 * alpha);
  const double hi = -std::log(tail_tol * (2.0 - 2.0 * alpha)) / (2.0 - 2.0 * alpha);
  const double u_min = std::min(-20.0, h * std::floor(lo / h));
  const double u_max = std::max(20.0, h * std::ceil(hi / h));
  return build_grid(u_min, u_max, h);
}

/// u in [-8, 8], h = 0.1: used for time stepping and the resolvent probes.
inline DiffusiveGrid dynamics_grid() { return build_grid(-8.0, 8.0, 0.1); }

/// mu(y_j)^2 = y_j^(2 alpha - 1) sampled on the grid.
inline std::vector<double> mu_squared_on(const DiffusiveGrid& g, double alpha) {
  std::vector<double> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) out[j] = std::pow(g.nodes[j], 2.0 * alpha - 1.0);
  return out;
}

inline std::vector<double> mu_on(const DiffusiveGrid& g, double alpha) {
  std::vector<double> out(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) out[j] = mu_eval(g.nodes[j], alpha);
  return out;
}

/// Rejects kappa + lambda on the cut (-inf, 0].
inline void require_off_cut(double kappa, cdouble lambda, const char* who) {
  const cdouble s = kappa + lambda;
  if (s.imag() == 0.0 && s.real() <= 0.0)
    throw std::domain_error(std::string(who) + ": kappa + lambda lies on the branch cut (-inf, 0]");
}

/// pi / sin(alpha pi) * (kappa + lambda)^(alpha - 1), principal branch.
inline cdouble calibration_exact(double alpha, double kappa, cdouble lambda) {
  require_off_cut(kappa, lambda, "calibration_exact");
  return std::numbers::pi / std::sin(alpha * std::numbers::pi) * std::pow(cdouble(kappa) + lambda, alpha - 1.0);
}

/// Quadrature of the full-line integral of mu^2 / (y^2 + kappa + lambda).
inline cdouble calibration_numeric(const DiffusiveGrid& g, double alpha, double kappa, cdouble lambda) {
  require_off_cut(kappa, lambda, "calibration_numeric");
  cdouble acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double y = g.nodes[j];
    acc += g.weights[j] * std::pow(y, 2.0 * alpha - 1.0) / (y * y + kappa + lambda);
  }
  return 2.0 * acc;
}

struct CalibrationCheck {
  cdouble numeric;
  cdouble exact;
  double rel_err;
};

inline CalibrationCheck check_calibration(const DiffusiveGrid& g, double alpha, double kappa, cdouble lambda) {
  const cdouble exact = calibration_exact(alpha, kappa, lambda);
  const cdouble numeric = calibration_numeric(g, alpha, kappa, lambda);
  return {numeric, exact, std::abs(numeric - exact) / std::abs(exact)};
}

// ---------------------------------------------------------------------------
// Time-domain operators on uniformly sampled signals.

struct SignalSamples {
  double dt = 0.0;
  std::vector<double> values;

  [[nodiscard]] double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

template <class F>
SignalSamples sample_signal(F&& f, double dt, std::size_t count) {
  if (!(dt > 0.0) || count < 2) throw std::invalid_argument("sample_signal: need dt > 0 and at least 2 samples");
  SignalSamples s{dt, std::vector<double>(count)};
  for (std::size_t k = 0; k < count; ++k) s.values[k] = f(static_cast<double>(k) * dt);
  return s;
}

namespace detail {

inline std::size_t grid_index(const SignalSamples& f, double t, const char* who) {
  if (f.size() < 2 || !(f.dt > 0.0)) throw std::invalid_argument(std::string(who) + ": need at least 2 samples");
  const double k = t / f.dt;
  const double kr = std::round(k);
  if (t < 0.0 || kr > static_cast<double>(f.size() - 1) || std::abs(k - kr) > 1e-8 * std::max(1.0, k))
    throw std::domain_error(std::string(who) + ": t outside the sample grid");
  return static_cast<std::size_t>(kr);
}

}  // namespace detail

/// Generalized Caputo derivative by product integration: f is linear between
/// samples, the weak singularity (t - s)^(-alpha) is integrated exactly per
/// subinterval and the exponential weight is frozen at the midpoint.
inline double caputo_direct(const SignalSamples& f, double alpha, double kappa, double t) {
  const std::size_t k = detail::grid_index(f, t, "caputo_direct");
  const double tk = f.time(k);
  const double e = 1.0 - alpha;
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double slope = (f.values[i + 1] - f.values[i]) / f.dt;
    if (slope == 0.0) continue;
    const double ta = tk - f.time(i);
    const double tb = tk - f.time(i + 1);
    const double kernel = (std::pow(ta, e) - std::pow(std::max(tb, 0.0), e)) / e;
    acc += slope * kernel * std::exp(-kappa * 0.5 * (ta + tb));
  }
  return acc / std::tgamma(1.0 - alpha);
}

/// Exponentially weighted Riemann-Liouville integral of order `order`, by the
/// same product rule (f linear per subinterval, weight at the midpoint).
inline double i_alpha_kappa(const SignalSamples& f, double order, double kappa, double t) {
  if (!(order > 0.0)) throw std::domain_error("i_alpha_kappa: order must be positive");
  const std::size_t k = detail::grid_index(f, t, "i_alpha_kappa");
  const double tk = f.time(k);
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double ta = tk - f.time(i);
    const double tb = std::max(tk - f.time(i + 1), 0.0);
    const double slope = (f.values[i + 1] - f.values[i]) / f.dt;
    // f(s) = f_i + slope (ta - tau) with tau = t - s.
    const double m0 = (std::pow(ta, order) - std::pow(tb, order)) / order;
    const double m1 = (std::pow(ta, order + 1.0) - std::pow(tb, order + 1.0)) / (order + 1.0);
    const double piece = (f.values[i] + slope * ta) * m0 - slope * m1;
    acc += piece * std::exp(-kappa * 0.5 * (ta + tb));
  }
  return acc / std::tgamma(order);
}

namespace detail {

/// (1 - e^-x) / x and (x - 1 + e^-x) / x^2, accurate for small x.
inline void exp_integrator_weights(double x, double& phi1, double& phi2) {
  if (x < 1e-4) {
    phi1 = 1.0 - x / 2.0 + x * x / 6.0;
    phi2 = 0.5 - x / 6.0 + x * x / 24.0;
    return;
  }
  const double em1 = std::expm1(-x);
  phi1 = -em1 / x;
  phi2 = (x + em1) / (x * x);
}

}  // namespace detail

/// Drives phi_t + (y^2 + kappa) phi = U(t) mu(y) at every grid node from
/// phi = 0 and returns O = sin(alpha pi)/pi * int mu phi dy. Each node is
/// advanced with the exact solution for U linear between samples, so stiff
/// nodes (y^2 dt >> 1) need no step restriction.
inline SignalSamples diffusive_realize(const SignalSamples& input, const DiffusiveGrid& g, double alpha,
                                       double kappa) {
  if (input.size() < 2 || !(input.dt > 0.0))
    throw std::invalid_argument("diffusive_realize: need at least 2 samples");
  if (g.empty()) throw std::invalid_argument("diffusive_realize: empty grid");
  const double dt = input.dt;
  const std::size_t J = g.size();
  const auto mu = mu_on(g, alpha);
  std::vector<double> decay(J), c_prev(J), c_next(J), out_w(J), phi(J, 0.0);
  for (std::size_t j = 0; j < J; ++j) {
    const double rate = g.nodes[j] * g.nodes[j] + kappa;
    const double x = rate * dt;
    double phi1 = 0.0, phi2 = 0.0;
    detail::exp_integrator_weights(x, phi1, phi2);
    decay[j] = std::exp(-x);
    c_next[j] = dt * phi2 * mu[j];
    c_prev[j] = dt * (phi1 - phi2) * mu[j];
    out_w[j] = 2.0 * g.weights[j] * mu[j];
  }
  const double gain = std::sin(alpha * std::numbers::pi) / std::numbers::pi;
  SignalSamples out{dt, std::vector<double>(input.size(), 0.0)};
  for (std::size_t k = 0; k + 1 < input.size(); ++k) {
    const double u0 = input.values[k];
    const double u1 = input.values[k + 1];
    double acc = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      phi[j] = decay[j] * phi[j] + c_prev[j] * u0 + c_next[j] * u1;
      acc += out_w[j] * phi[j];
    }
    out.values[k + 1] = gain * acc;
  }
  return out;
}

}  // namespace swellfrac
