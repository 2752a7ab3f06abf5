// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "swellfrac/core_model.hpp"
#include "swellfrac/fit.hpp"
#include "swellfrac/modal_dynamics.hpp"
#include "swellfrac/spectrum.hpp"

namespace swellfrac {

struct WindowPolicy {
  bool automatic = true;
  double t_a = 0.0;  ///< manual window, used when automatic == false
  double t_b = 0.0;
  double max_variation = 0.15;       ///< (max - min) / |mean| of local slopes
  double transient_fraction = 0.05;  ///< window starts once E <= fraction * E(0)
  double points_per_decade = 50.0;
  double slope_half_width = 0.1;     ///< decades on each side for local slopes
  double min_span = 0.15;            ///< decades; shorter windows are inconclusive
};

struct LocalSlope {
  double t;
  double slope;
};

struct DecayFitResult {
  double alpha = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  double q = 0.0;       ///< fitted exponent, E ~ t^-q
  double target = 0.0;  ///< 2 / (1 - alpha)
  double r2 = 0.0;
  double terminal_rate = 0.0;  ///< 2 |Re lambda| of the slowest retained mode
  bool inconclusive = false;
  std::vector<LocalSlope> local_slopes;
};

namespace detail {

struct LogSeries {
  std::vector<double> log_t, log_e;
};

/// log E resampled on log-spaced times by linear interpolation in t.
inline LogSeries resample_log(const EnergyTrace& tr, double points_per_decade) {
  LogSeries s;
  std::size_t first = 0;
  while (first < tr.times.size() && !(tr.times[first] > 0.0)) ++first;
  if (first + 1 >= tr.times.size()) return s;
  const double lt0 = std::log10(tr.times[first]);
  const double lt1 = std::log10(tr.times.back());
  const auto count = static_cast<std::size_t>(std::floor((lt1 - lt0) * points_per_decade)) + 1;
  std::size_t k = first;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = std::pow(10.0, lt0 + static_cast<double>(i) / points_per_decade);
    while (k + 1 < tr.times.size() && tr.times[k + 1] < t) ++k;
    if (k + 1 >= tr.times.size()) break;
    const double th = (t - tr.times[k]) / (tr.times[k + 1] - tr.times[k]);
    const double e = tr.energy[k] + std::clamp(th, 0.0, 1.0) * (tr.energy[k + 1] - tr.energy[k]);
    if (!(e > 0.0)) break;
    s.log_t.push_back(std::log(t));
    s.log_e.push_back(std::log(e));
  }
  return s;
}

}  // namespace detail

/// Power-law fit of a recorded energy decay. With the automatic policy the
/// window is the longest stretch (in log t) after the transient on which the
/// local log-log slope varies by less than max_variation.
inline DecayFitResult fit_decay_trace(const EnergyTrace& tr, double alpha, const WindowPolicy& policy = {}) {
  DecayFitResult r;
  r.alpha = alpha;
  r.target = 2.0 / (1.0 - alpha);
  if (tr.energy.empty() || !(tr.energy.front() > 0.0)) {
    r.inconclusive = true;
    return r;
  }
  const auto s = detail::resample_log(tr, policy.points_per_decade);
  const std::size_t n = s.log_t.size();
  const double hw = policy.slope_half_width * std::log(10.0);

  std::vector<double> slope(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    if (s.log_t[i] - hw < s.log_t.front() || s.log_t[i] + hw > s.log_t.back()) continue;
    std::vector<double> x, y;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(s.log_t[j] - s.log_t[i]) <= hw + 1e-12) {
        x.push_back(s.log_t[j]);
        y.push_back(s.log_e[j]);
      }
    if (x.size() < 3) continue;
    slope[i] = fit_line(x, y).slope;
    r.local_slopes.push_back({std::exp(s.log_t[i]), slope[i]});
  }

  double t_a = policy.t_a, t_b = policy.t_b;
  if (policy.automatic) {
    double t_transient = tr.times.back();
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      if (tr.energy[k] <= policy.transient_fraction * tr.energy.front()) {
        t_transient = tr.times[k];
        break;
      }
    double best_span = 0.0;
    std::size_t best_a = 0, best_b = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (std::isnan(slope[a]) || std::exp(s.log_t[a]) < t_transient) continue;
      double lo = slope[a], hi = slope[a], sum = 0.0;
      for (std::size_t b = a; b < n && !std::isnan(slope[b]); ++b) {
        lo = std::min(lo, slope[b]);
        hi = std::max(hi, slope[b]);
        sum += slope[b];
        const double mean = sum / static_cast<double>(b - a + 1);
        if (!(mean < 0.0) || (hi - lo) >= policy.max_variation * std::abs(mean)) break;
        const double span = s.log_t[b] - s.log_t[a];
        if (span > best_span) {
          best_span = span;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best_span < policy.min_span * std::log(10.0)) {
      r.inconclusive = true;
      return r;
    }
    t_a = std::exp(s.log_t[best_a]);
    t_b = std::exp(s.log_t[best_b]);
  }
  if (!(t_a > 0.0 && t_a < t_b)) throw std::invalid_argument("fit_decay_trace: need 0 < t_a < t_b");

  std::vector<double> x, y;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::exp(s.log_t[i]);
    if (t >= t_a * (1 - 1e-12) && t <= t_b * (1 + 1e-12)) {
      x.push_back(s.log_t[i]);
      y.push_back(s.log_e[i]);
    }
  }
  if (x.size() < 3) {
    r.inconclusive = true;
    return r;
  }
  const auto f = fit_line(x, y);
  r.t_a = t_a;
  r.t_b = t_b;
  r.q = -f.slope;
  r.r2 = f.r2;
  return r;
}

/// 2 |Re lambda| minimised over both families and modes 1..N.
inline double terminal_decay_rate(const PhysicalParams& p, int modes) {
  const auto branches = branch_sweep(p, 1, modes);
  double rate = std::numeric_limits<double>::infinity();
  for (const auto& br : branches)
    for (const auto& pt : br.points) rate = std::min(rate, -2.0 * pt.root.real());
  return rate;
}

/// Initial data whose modal energies fall like n^-3: the z0 sine coefficients
/// go like n^-5/2, the borderline of the generator's domain.
inline ModalCoefficients critical_initial_data(const PhysicalParams& p, int modes) {
  return project_initial(Profile::power(2.5), Profile::zero(), Profile::zero(), Profile::zero(), p.length, modes);
}

/// Simulates cfg and fits the energy decay. Refuses gamma = 0 (no decay).
inline DecayFitResult decay_fit(const SimConfig& cfg, const WindowPolicy& policy = {}) {
  validate_config(cfg);
  if (cfg.params.gamma == 0.0) throw std::invalid_argument("decay_fit: gamma = 0 conserves energy; exponent undefined");
  if (!(cfg.params.kappa > 0.0)) throw std::domain_error("decay_fit requires kappa > 0");
  const auto sim = simulate(cfg);
  auto r = fit_decay_trace(sim.energy, cfg.params.alpha, policy);
  r.terminal_rate = terminal_decay_rate(cfg.params, cfg.modes);
  return r;
}

struct EigenDecayRow {
  double alpha;
  double slope_plus;
  double slope_minus;
  double target_slope;   ///< -(1 - alpha)
  double time_exponent;  ///< 2 / (1 - alpha)
  double beta_plus;      ///< mu^(1-alpha) Re lambda at the largest n
  double beta_minus;
  double beta_plus_predicted;
  double beta_minus_predicted;
  bool pass;             ///< both slopes within 5% of -(1 - alpha)
};

inline std::vector<EigenDecayRow> eigen_decay_crosscheck(const PhysicalParams& base, const std::vector<double>& alphas,
                                                         int n_lo = 50, int n_hi = 500) {
  std::vector<EigenDecayRow> rows;
  for (double a : alphas) {
    PhysicalParams p = base;
    p.alpha = a;
    const auto br = branch_sweep(p, n_lo, n_hi);
    EigenDecayRow row{};
    row.alpha = a;
    row.slope_plus = real_part_slope(br[0], n_lo, n_hi).slope;
    row.slope_minus = real_part_slope(br[1], n_lo, n_hi).slope;
    row.target_slope = -(1.0 - a);
    row.time_exponent = 2.0 / (1.0 - a);
    row.beta_plus = br[0].points.back().scaled_re;
    row.beta_minus = br[1].points.back().scaled_re;
    row.beta_plus_predicted = predicted_beta(p, Branch::plus);
    row.beta_minus_predicted = predicted_beta(p, Branch::minus);
    const double tol = 0.05 * (1.0 - a);
    row.pass = std::abs(row.slope_plus - row.target_slope) < tol && std::abs(row.slope_minus - row.target_slope) < tol;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace swellfrac
