// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/sin_pi.hpp>

#include "swellfrac/core_model.hpp"
#include "swellfrac/fit.hpp"
#include "swellfrac/fractional_kernel.hpp"
#include "swellfrac/modal_dynamics.hpp"
#include "swellfrac/spectrum.hpp"

namespace swellfrac {

/// Sine coefficients of a forcing F = (f1, f2, f3, f4, f5) on one mode. f5 is
/// sampled at the positive grid nodes and taken even in y; empty means zero.
struct ModalForcing {
  cdouble f1{}, f2{}, f3{}, f4{};
  std::vector<cdouble> f5;
};

struct ModalResponse {
  int mode = 1;
  cdouble z{}, w{}, u{}, v{};
  double phi_energy = 0.0;  ///< zeta int |phi|^2 dy
  cdouble det{};
};

class SpectralHit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 2x2 reduced matrix on mode n at frequency lambda (the resolvent point is
/// i lambda):
///   [-rho_z l^2 + gamma i l (i l + kappa)^(alpha-1) + a1 mu^2,   a2 mu^2      ]
///   [ a2 mu^2,                                                   -rho_u l^2 + a3 mu^2]
inline Eigen::Matrix2cd reduced_matrix(const PhysicalParams& p, int n, double lambda) {
  const double mu2 = std::pow(mode_frequency(p, n), 2);
  const cdouble il(0.0, lambda);
  cdouble damping = 0.0;
  if (p.gamma != 0.0 && lambda != 0.0) damping = p.gamma * il * std::pow(il + p.kappa, p.alpha - 1.0);
  Eigen::Matrix2cd M;
  M << -p.rho_z * lambda * lambda + damping + p.a1 * mu2, p.a2 * mu2,
       p.a2 * mu2, -p.rho_u * lambda * lambda + p.a3 * mu2;
  return M;
}

/// int_R mu^2 / ((y^2 + kappa)^2 + lambda^2) dy on the log grid.
inline double phi_norm_integral(double lambda, double kappa, double alpha, const DiffusiveGrid& g) {
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double y = g.nodes[j];
    const double r = y * y + kappa;
    acc += g.weights[j] * std::pow(y, 2.0 * alpha - 1.0) / (r * r + lambda * lambda);
  }
  return 2.0 * acc;
}

/// Solves (i lambda - A) U = F on mode n after eliminating phi, w and v.
inline ModalResponse reduced_solve(const PhysicalParams& p, int n, double lambda, const ModalForcing& F,
                                   const DiffusiveGrid& g) {
  require_valid(p);
  if (p.kappa == 0.0 && lambda == 0.0)
    throw std::domain_error("reduced_solve: lambda = 0 requires kappa > 0");
  if (!F.f5.empty() && F.f5.size() != g.size()) throw std::invalid_argument("reduced_solve: f5 size differs from grid");
  const cdouble il(0.0, lambda);
  const double zeta = damping_constant(p);
  const Eigen::Matrix2cd M = reduced_matrix(p, n, lambda);
  const cdouble det = M.determinant();
  const double scale = std::abs(M(0, 0) * M(1, 1)) + std::abs(M(0, 1) * M(1, 0));
  if (std::abs(det) <= 1e-13 * scale) throw SpectralHit("reduced_solve: singular reduced matrix (i lambda is an eigenvalue)");

  cdouble f5_term = 0.0;
  if (!F.f5.empty()) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double y = g.nodes[j];
      f5_term += g.weights[j] * mu_eval(y, p.alpha) * F.f5[j] / (y * y + p.kappa + il);
    }
    f5_term *= 2.0 * zeta;
  }
  cdouble frac = 0.0;
  if (p.gamma != 0.0) frac = p.gamma * std::pow(il + p.kappa, p.alpha - 1.0);
  Eigen::Vector2cd rhs;
  rhs << p.rho_z * F.f2 + (il * p.rho_z + frac) * F.f1 - f5_term, p.rho_u * F.f4 + il * p.rho_u * F.f3;
  const Eigen::Vector2cd zu = M.partialPivLu().solve(rhs);

  ModalResponse r;
  r.mode = n;
  r.z = zu(0);
  r.u = zu(1);
  r.w = il * r.z - F.f1;
  r.v = il * r.u - F.f3;
  r.det = det;
  if (zeta != 0.0) {
    if (F.f5.empty()) {
      r.phi_energy = zeta * std::norm(r.w) * phi_norm_integral(lambda, p.kappa, p.alpha, g);
    } else {
      double acc = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double y = g.nodes[j];
        const double rr = y * y + p.kappa;
        acc += g.weights[j] * std::norm(F.f5[j] + r.w * mu_eval(y, p.alpha)) / (rr * rr + lambda * lambda);
      }
      r.phi_energy = 2.0 * zeta * acc;
    }
  }
  return r;
}

/// Memory variable of a response, phi_j = (f5_j + w mu_j) / (y_j^2 + kappa + i lambda).
inline std::vector<cdouble> response_phi(const PhysicalParams& p, double lambda, const ModalForcing& F,
                                         const ModalResponse& r, const DiffusiveGrid& g) {
  std::vector<cdouble> phi(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double y = g.nodes[j];
    const cdouble f5 = F.f5.empty() ? cdouble{} : F.f5[j];
    phi[j] = (f5 + r.w * mu_eval(y, p.alpha)) / (y * y + p.kappa + cdouble(0.0, lambda));
  }
  return phi;
}

/// Squared H-norm of a modal state per unit L/2.
inline double modal_h_norm_sq(const PhysicalParams& p, int n, const ModalResponse& r) {
  const double mu2 = std::pow(mode_frequency(p, n), 2);
  return p.rho_z * std::norm(r.w) + p.rho_u * std::norm(r.v) +
         mu2 * (p.a1 * std::norm(r.z) + 2.0 * p.a2 * (r.z * std::conj(r.u)).real() + p.a3 * std::norm(r.u)) +
         r.phi_energy;
}

/// Squared H-norm of a forcing: f1, f3 are displacements and f2, f4 velocities.
inline double forcing_h_norm_sq(const PhysicalParams& p, int n, const ModalForcing& F, const DiffusiveGrid& g) {
  const double mu2 = std::pow(mode_frequency(p, n), 2);
  double mem = 0.0;
  for (std::size_t j = 0; j < F.f5.size(); ++j) mem += g.weights[j] * std::norm(F.f5[j]);
  return p.rho_z * std::norm(F.f2) + p.rho_u * std::norm(F.f4) +
         mu2 * (p.a1 * std::norm(F.f1) + 2.0 * p.a2 * (F.f1 * std::conj(F.f3)).real() + p.a3 * std::norm(F.f3)) +
         2.0 * damping_constant(p) * mem;
}

// ---------------------------------------------------------------------------
// Resolvent growth along the imaginary axis

enum class ProbeFrequency { limit_speed, refined };

struct ResolventSample {
  int n;
  double lambda;
  double ratio;    ///< ||U||_H / ||F||_H, a lower bound on ||(i lambda - A)^-1||
  double det_abs;
};

struct ResolventGrowth {
  std::vector<ResolventSample> samples;
  LinearFit fit;  ///< log ratio against log mu_n
};

/// Unit f2 forcing on mode n at lambda = l+ mu_n (or Im of the refined
/// l+ root). Captures the near-resonant blow-up only: a lower bound.
inline ResolventGrowth resolvent_growth(const PhysicalParams& p, int n_min, int n_max, const DiffusiveGrid& g,
                                        ProbeFrequency probe = ProbeFrequency::limit_speed) {
  require_valid(p);
  if (!(p.kappa > 0.0) || !(p.gamma > 0.0)) throw std::domain_error("resolvent_growth requires kappa > 0 and gamma > 0");
  if (n_min < 1 || n_max <= n_min) throw std::invalid_argument("resolvent_growth: need 1 <= n_min < n_max");
  const double l_plus = limit_speeds(p).plus;
  ResolventGrowth out;
  std::vector<double> x, y;
  ModalForcing F;
  F.f2 = 1.0;
  for (int n = n_min; n <= n_max; ++n) {
    const double mu = mode_frequency(p, n);
    double lambda = l_plus * mu;
    if (probe == ProbeFrequency::refined) {
      const cdouble seed = cdouble(0.0, lambda) + predict_perturbation(p, n, Branch::plus);
      lambda = refine_root(seed, p, n).root.imag();
    }
    const auto r = reduced_solve(p, n, lambda, F, g);
    const double ratio = std::sqrt(modal_h_norm_sq(p, n, r) / forcing_h_norm_sq(p, n, F, g));
    out.samples.push_back({n, lambda, ratio, std::abs(r.det)});
    x.push_back(std::log(mu));
    y.push_back(std::log(ratio));
  }
  out.fit = fit_line(x, y);
  return out;
}

// ---------------------------------------------------------------------------
// Static problem -A U = F

struct StaticSolution {
  std::vector<ModalResponse> modes;
  double ratio = 0.0;  ///< ||U||_H / ||F||_H
};

inline StaticSolution static_solve(const PhysicalParams& p, std::span<const ModalForcing> forcing,
                                   const DiffusiveGrid& g) {
  require_valid(p);
  if (!(p.kappa > 0.0))
    throw std::domain_error(
        "static_solve: kappa = 0 is refused; 0 is then not in the resolvent set "
        "(A^-1 (sin(pi x/L),0,0,0,0) has phi = -sin(pi x/L)|y|^((2 alpha-5)/2), not square integrable)");
  StaticSolution s;
  double un = 0.0, fn = 0.0;
  for (std::size_t i = 0; i < forcing.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    s.modes.push_back(reduced_solve(p, n, 0.0, forcing[i], g));
    un += modal_h_norm_sq(p, n, s.modes.back());
    fn += forcing_h_norm_sq(p, n, forcing[i], g);
  }
  s.ratio = fn > 0.0 ? std::sqrt(un / fn) : 0.0;
  return s;
}

struct StaticFields {
  std::vector<double> x, z, u;
};

/// Real parts of the synthesized static displacements.
inline StaticFields static_fields(const PhysicalParams& p, const StaticSolution& s, std::span<const double> x_grid) {
  StaticFields f{{x_grid.begin(), x_grid.end()}, std::vector<double>(x_grid.size(), 0.0),
                 std::vector<double>(x_grid.size(), 0.0)};
  for (std::size_t i = 0; i < x_grid.size(); ++i)
    for (const auto& m : s.modes) {
      const double sn = boost::math::sin_pi(m.mode * x_grid[i] / p.length);
      f.z[i] += m.z.real() * sn;
      f.u[i] += m.u.real() * sn;
    }
  return f;
}

/// Smooth random forcing: coefficients uniform in [-1, 1] damped like n^-2,
/// f5 a smooth bump in log y with random amplitude per mode.
inline std::vector<ModalForcing> random_smooth_forcing(int modes, std::uint64_t seed, const DiffusiveGrid& g) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<ModalForcing> out(static_cast<std::size_t>(modes));
  for (int n = 1; n <= modes; ++n) {
    auto& F = out[static_cast<std::size_t>(n - 1)];
    const double damp = 1.0 / (static_cast<double>(n) * n);
    F.f1 = U(rng) * damp / n;
    F.f2 = U(rng) * damp;
    F.f3 = U(rng) * damp / n;
    F.f4 = U(rng) * damp;
    const double amp = U(rng) * damp;
    F.f5.resize(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double ly = std::log(g.nodes[j]);
      F.f5[j] = amp * std::exp(-0.5 * ly * ly);
    }
  }
  return out;
}

/// max over n <= N of ||A_n^-1|| in the discrete energy norm, from dense
/// matrices. Independent of the reduced elimination used by static_solve.
inline double static_norm_bound(const PhysicalParams& p, int modes, const DiffusiveGrid& g) {
  if (!(p.kappa > 0.0) || !(p.gamma > 0.0)) throw std::domain_error("static_norm_bound requires kappa > 0 and gamma > 0");
  double best = 0.0;
  for (int n = 1; n <= modes; ++n) {
    const Eigen::MatrixXd A = assemble_generator(p, n, g);
    const Eigen::MatrixXd G = energy_gram(p, n, g);
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    const Eigen::MatrixXd R = llt.matrixU();  // G = R^T R
    const Eigen::MatrixXd Ainv = A.partialPivLu().inverse();
    const Eigen::MatrixXd K = R * Ainv * R.inverse();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(K);
    best = std::max(best, svd.singularValues()(0));
  }
  return best;
}

}  // namespace swellfrac
