// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "swellfrac/core_model.hpp"
#include "swellfrac/fit.hpp"
#include "swellfrac/fractional_kernel.hpp"

namespace swellfrac {

/// Eigenvalue families, labelled by the limit speed they follow.
enum class Branch { plus = 1, minus = 2 };

inline const char* branch_name(Branch b) { return b == Branch::plus ? "plus" : "minus"; }

inline double branch_speed(const PhysicalParams& p, Branch b) {
  const auto s = limit_speeds(p);
  return b == Branch::plus ? s.plus : s.minus;
}

/// Characteristic function of mode n:
///   l^4 + m mu^2 l^2 + (gamma/rho_z) l (l + kappa)^(alpha-1) (l^2 + (a3/rho_u) mu^2) + p mu^4.
inline cdouble char_eval(cdouble lambda, const PhysicalParams& p, int n) {
  require_off_cut(p.kappa, lambda, "char_eval");
  const double mu2 = std::pow(mode_frequency(p, n), 2);
  const cdouble l2 = lambda * lambda;
  const cdouble frac = std::pow(lambda + p.kappa, p.alpha - 1.0);
  return l2 * l2 + m_coefficient(p) * mu2 * l2 +
         p.gamma / p.rho_z * lambda * frac * (l2 + p.a3 / p.rho_u * mu2) + p_coefficient(p) * mu2 * mu2;
}

inline cdouble char_derivative(cdouble lambda, const PhysicalParams& p, int n) {
  require_off_cut(p.kappa, lambda, "char_derivative");
  const double mu2 = std::pow(mode_frequency(p, n), 2);
  const double c = p.a3 / p.rho_u * mu2;
  const cdouble l2 = lambda * lambda;
  const cdouble s = lambda + p.kappa;
  const cdouble frac = std::pow(s, p.alpha - 1.0);
  const cdouble dfrac = (p.alpha - 1.0) * frac / s;
  return 4.0 * l2 * lambda + 2.0 * m_coefficient(p) * mu2 * lambda +
         p.gamma / p.rho_z * (frac * (3.0 * l2 + c) + dfrac * lambda * (l2 + c));
}

/// Roots of the undamped quartic, ordered {+i l+ mu, -i l+ mu, +i l- mu, -i l- mu}.
inline std::array<cdouble, 4> quartic_roots(const PhysicalParams& p, int n) {
  const auto s = limit_speeds(p);
  const double mu = mode_frequency(p, n);
  const cdouble I(0.0, 1.0);
  return {I * s.plus * mu, -I * s.plus * mu, I * s.minus * mu, -I * s.minus * mu};
}

class RootFindingError : public std::runtime_error {
 public:
  RootFindingError(const std::string& what, cdouble last) : std::runtime_error(what), last_(last) {}
  [[nodiscard]] cdouble last_iterate() const noexcept { return last_; }

 private:
  cdouble last_;
};

struct RootResult {
  cdouble root;
  double residual;  ///< |f(root)| / mu^4
  int iterations;
};

/// Newton on char_eval. Residuals are measured relative to mu^4, the natural
/// size of the characteristic function on mode n.
inline RootResult refine_root(cdouble seed, const PhysicalParams& p, int n, double tol = 1e-12,
                              int max_iter = 60) {
  if (!(tol > 0.0)) throw std::invalid_argument("refine_root: tol must be positive");
  const double scale = std::pow(mode_frequency(p, n), 4);
  cdouble z = seed;
  double res = std::abs(char_eval(z, p, n)) / scale;
  // One extra Newton step once converged, kept if it does not worsen the
  // residual: quadratic convergence takes the root to round-off.
  auto polish = [&](int it) -> RootResult {
    const cdouble df = char_derivative(z, p, n);
    if (df == 0.0) return {z, res, it};
    const cdouble next = z - char_eval(z, p, n) / df;
    if ((next + p.kappa).imag() * (z + p.kappa).imag() < 0.0) return {z, res, it};
    const double r = std::abs(char_eval(next, p, n)) / scale;
    return r <= res ? RootResult{next, r, it} : RootResult{z, res, it};
  };
  for (int it = 0; it < max_iter; ++it) {
    if (res < tol) return polish(it);
    const cdouble f = char_eval(z, p, n);
    const cdouble df = char_derivative(z, p, n);
    if (df == 0.0) throw RootFindingError("refine_root: zero derivative", z);
    const cdouble next = z - f / df;
    const cdouble shifted_a = z + p.kappa, shifted_b = next + p.kappa;
    // Crossing the real axis left of -kappa changes sheet.
    if (shifted_a.imag() * shifted_b.imag() < 0.0) {
      const double t = shifted_a.imag() / (shifted_a.imag() - shifted_b.imag());
      if (shifted_a.real() + t * (shifted_b.real() - shifted_a.real()) <= 0.0)
        throw RootFindingError("refine_root: iterate crossed the branch cut", next);
    }
    if (next.imag() == 0.0 && next.real() + p.kappa <= 0.0)
      throw RootFindingError("refine_root: iterate landed on the branch cut", next);
    z = next;
    res = std::abs(char_eval(z, p, n)) / scale;
  }
  if (res < tol) return polish(max_iter);
  throw RootFindingError("refine_root: no convergence after " + std::to_string(max_iter) + " iterations", z);
}

/// First-order correction eps to the undamped root l0 = i l_j mu_n, solving
///   eps (4 l0^3 + 2 m mu^2 l0) + (gamma/rho_z) (l0^(2+alpha) + (a3/rho_u) mu^2 l0^alpha) = 0.
inline cdouble predict_perturbation(const PhysicalParams& p, int n, Branch b) {
  const double mu = mode_frequency(p, n);
  const double mu2 = mu * mu;
  const cdouble l0(0.0, branch_speed(p, b) * mu);
  const cdouble denom = 4.0 * l0 * l0 * l0 + 2.0 * m_coefficient(p) * mu2 * l0;
  if (std::abs(denom) <= 1e-14 * std::abs(l0) * mu2)
    throw std::domain_error("predict_perturbation: degenerate limit speeds (l^2 = m/2)");
  const cdouble num = std::pow(l0, 2.0 + p.alpha) + p.a3 / p.rho_u * mu2 * std::pow(l0, p.alpha);
  return -p.gamma / p.rho_z * num / denom;
}

/// Limit of mu^(1-alpha) Re(eps) as n grows:
///   -(gamma/rho_z) (l^2 - a3/rho_u) / (4 l^2 - 2m) cos((1-alpha) pi/2) / l^(1-alpha).
inline double predicted_beta(const PhysicalParams& p, Branch b) {
  const double l = branch_speed(p, b);
  const double ratio = (l * l - p.a3 / p.rho_u) / (4.0 * l * l - 2.0 * m_coefficient(p));
  return -p.gamma / p.rho_z * ratio * std::cos((1.0 - p.alpha) * std::numbers::pi / 2.0) /
         std::pow(l, 1.0 - p.alpha);
}

struct BranchPoint {
  int n;
  double mu;
  cdouble root;
  double residual;
  int iterations;
  cdouble predicted_eps;
  double scaled_re;  ///< mu^(1-alpha) Re(root)
  bool in_bracket;   ///< l-/2 <= |root/mu| <= 2 l+
};

struct SpectrumBranch {
  Branch branch;
  double speed;
  std::vector<BranchPoint> points;
};

/// Refined upper-half-plane roots of both families for n in [n_min, n_max].
inline std::array<SpectrumBranch, 2> branch_sweep(const PhysicalParams& p, int n_min, int n_max,
                                                  double tol = 1e-12) {
  require_valid(p);
  if (!(p.kappa > 0.0)) throw std::domain_error("branch_sweep requires kappa > 0 (the kappa = 0 case has no spectral gap at 0)");
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("branch_sweep: need 1 <= n_min <= n_max");
  const auto speeds = limit_speeds(p);
  std::array<SpectrumBranch, 2> out{SpectrumBranch{Branch::plus, speeds.plus, {}},
                                    SpectrumBranch{Branch::minus, speeds.minus, {}}};
  for (auto& br : out) {
    br.points.reserve(static_cast<std::size_t>(n_max - n_min + 1));
    cdouble previous{};
    for (int n = n_min; n <= n_max; ++n) {
      const double mu = mode_frequency(p, n);
      const cdouble l0(0.0, br.speed * mu);
      const cdouble eps = predict_perturbation(p, n, br.branch);
      RootResult r{};
      const cdouble seeds[] = {l0 + eps, l0, previous * (mu / mode_frequency(p, std::max(1, n - 1)))};
      bool found = false;
      std::string why;
      for (const cdouble& seed : seeds) {
        if (seed == cdouble{}) continue;
        try {
          r = refine_root(seed, p, n, tol);
        } catch (const RootFindingError& e) {
          why = e.what();
          continue;
        }
        // Must stay on its own family.
        const double own = std::abs(r.root / mu - cdouble(0.0, br.speed));
        const double other = std::abs(r.root / mu - cdouble(0.0, br.branch == Branch::plus ? speeds.minus : speeds.plus));
        if (r.root.imag() > 0.0 && own < other) {
          found = true;
          break;
        }
        why = "root converged onto another family";
      }
      if (!found)
        throw RootFindingError("branch_sweep: " + std::string(branch_name(br.branch)) + " branch, mode " +
                                   std::to_string(n) + ": " + why,
                               r.root);
      previous = r.root;
      const double ratio = std::abs(r.root) / mu;
      br.points.push_back({n, mu, r.root, r.residual, r.iterations, eps,
                           std::pow(mu, 1.0 - p.alpha) * r.root.real(),
                           ratio >= 0.5 * speeds.minus && ratio <= 2.0 * speeds.plus});
    }
  }
  return out;
}

/// Slope of log|Re lambda_n| against log mu_n over n in [n_lo, n_hi].
inline LinearFit real_part_slope(const SpectrumBranch& br, int n_lo, int n_hi) {
  std::vector<double> x, y;
  for (const auto& pt : br.points) {
    if (pt.n < n_lo || pt.n > n_hi) continue;
    x.push_back(std::log(pt.mu));
    y.push_back(std::log(std::abs(pt.root.real())));
  }
  return fit_line(x, y);
}

namespace detail {

/// Net number of turns of f along z(s), s in [0, 1], tracked by adaptive
/// bisection until every phase increment is below pi/8. Throws if f vanishes
/// (to double precision) on the path.
inline double phase_turns(const std::function<cdouble(double)>& z, const std::function<cdouble(cdouble)>& f,
                          int initial = 2048) {
  std::function<double(double, double, cdouble, cdouble, int)> piece = [&](double a, double b, cdouble fa, cdouble fb,
                                                                             int depth) -> double {
    const double d = std::arg(fb / fa);
    if (std::abs(d) < std::numbers::pi / 8.0) return d;
    if (depth > 40) throw std::domain_error("phase_turns: function vanishes on the contour");
    const double m = 0.5 * (a + b);
    const cdouble fm = f(z(m));
    return piece(a, m, fa, fm, depth + 1) + piece(m, b, fm, fb, depth + 1);
  };
  double total = 0.0;
  cdouble prev = f(z(0.0));
  for (int k = 1; k <= initial; ++k) {
    const double s0 = static_cast<double>(k - 1) / initial, s1 = static_cast<double>(k) / initial;
    const cdouble next = f(z(s1));
    if (next == 0.0 || prev == 0.0) throw std::domain_error("phase_turns: function vanishes on the contour");
    total += piece(s0, s1, prev, next, 0);
    prev = next;
  }
  return total / (2.0 * std::numbers::pi);
}

}  // namespace detail

/// Radius beyond which mode n has no zeros with Re lambda >= 0. There
/// |lambda + kappa| >= |lambda|, so every non-quartic term is bounded by
/// m mu^2 R^2 + (gamma/rho_z) R^alpha (R^2 + (a3/rho_u) mu^2) + p mu^4, and
/// this bound over R^4 decreases in R.
inline double right_half_plane_root_bound(const PhysicalParams& p, int n) {
  const double mu2 = std::pow(mode_frequency(p, n), 2);
  auto rest = [&](double R) {
    return m_coefficient(p) * mu2 * R * R + p.gamma / p.rho_z * std::pow(R, p.alpha) * (R * R + p.a3 / p.rho_u * mu2) +
           p_coefficient(p) * mu2 * mu2;
  };
  double R = 1.0;
  while (!(std::pow(R, 4) > rest(R))) R *= 2.0;
  return R;
}

/// Zeros of the characteristic function of mode n in the closed right
/// half-plane, by the argument principle on the boundary of the half-disc
/// of radius 2 * right_half_plane_root_bound. Throws std::domain_error if a
/// zero lies on the imaginary axis (e.g. gamma = 0) or kappa = 0.
inline int right_half_plane_zero_count(const PhysicalParams& p, int n) {
  require_valid(p);
  if (!(p.kappa > 0.0)) throw std::domain_error("right_half_plane_zero_count requires kappa > 0");
  const double R = 2.0 * right_half_plane_root_bound(p, n);
  const cdouble I(0.0, 1.0);
  auto f = [&](cdouble l) { return char_eval(l, p, n); };
  // Counter-clockwise: arc from -iR through R to iR, then down the axis.
  const double arc = detail::phase_turns([&](double s) { return R * std::exp(I * std::numbers::pi * (s - 0.5)); }, f);
  const double axis = detail::phase_turns([&](double s) { return I * R * (1.0 - 2.0 * s); }, f);
  const double turns = arc + axis;
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 1e-6) throw std::domain_error("right_half_plane_zero_count: winding not an integer");
  return static_cast<int>(rounded);
}

}  // namespace swellfrac
