// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <boost/math/special_functions/sin_pi.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swellfrac/core_model.hpp"
#include "swellfrac/fractional_kernel.hpp"

namespace swellfrac {

/// Sine coefficients of one mode of the augmented system. phi holds the memory
/// variable at the positive grid nodes.
struct ModalState {
  int mode = 1;
  double z = 0.0;
  double w = 0.0;  ///< z_t
  double u = 0.0;
  double v = 0.0;  ///< u_t
  std::vector<double> phi;
};

// ---------------------------------------------------------------------------
// Initial data

/// Built-in initial profiles with closed-form sine coefficients.
struct Profile {
  enum class Kind { zero, sine, parabola, power };
  Kind kind = Kind::zero;
  int mode = 1;            ///< sine: active mode
  double exponent = 2.5;   ///< power: b_n = amplitude * n^-exponent
  double amplitude = 1.0;

  static Profile zero() { return {}; }
  static Profile sine(int k, double amp = 1.0) { return {Kind::sine, k, 0.0, amp}; }
  static Profile parabola(double amp = 1.0) { return {Kind::parabola, 1, 0.0, amp}; }
  static Profile power(double exponent, double amp = 1.0) { return {Kind::power, 1, exponent, amp}; }
};

struct ModalCoefficients {
  std::vector<double> z0, z1, u0, u1;  ///< index n - 1
};

struct Projection {
  std::vector<double> coefficients;
  std::vector<std::string> warnings;
};

/// b_n = (2/L) int_0^L f(x) sin(n pi x / L) dx for the built-in profiles.
inline std::vector<double> profile_coefficients(const Profile& prof, double length, int modes) {
  if (modes < 1) throw std::invalid_argument("profile_coefficients: need at least one mode");
  std::vector<double> b(static_cast<std::size_t>(modes), 0.0);
  switch (prof.kind) {
    case Profile::Kind::zero:
      break;
    case Profile::Kind::sine:
      if (prof.mode >= 1 && prof.mode <= modes) b[static_cast<std::size_t>(prof.mode - 1)] = prof.amplitude;
      break;
    case Profile::Kind::parabola: {
      // f = x (L - x)
      const double pi3 = std::numbers::pi * std::numbers::pi * std::numbers::pi;
      for (int n = 1; n <= modes; n += 2)
        b[static_cast<std::size_t>(n - 1)] = prof.amplitude * 8.0 * length * length / (pi3 * n * n * n);
      break;
    }
    case Profile::Kind::power:
      for (int n = 1; n <= modes; ++n) b[static_cast<std::size_t>(n - 1)] = prof.amplitude * std::pow(n, -prof.exponent);
      break;
  }
  return b;
}

/// Sine coefficients of samples f(x_i), x_i = i L / (M - 1), by the composite
/// trapezoid rule. Samples that do not vanish at the ends still project, with
/// a warning (the series converges slowly, Gibbs).
inline Projection project_sampled(std::span<const double> samples, double length, int modes) {
  if (samples.size() < 3) throw std::invalid_argument("project_sampled: need at least 3 samples");
  if (modes < 1) throw std::invalid_argument("project_sampled: need at least one mode");
  Projection out;
  double scale = 0.0;
  for (double s : samples) scale = std::max(scale, std::abs(s));
  const double tol = 1e-12 * std::max(1.0, scale);
  if (std::abs(samples.front()) > tol || std::abs(samples.back()) > tol)
    out.warnings.emplace_back("profile does not satisfy the Dirichlet boundary values; expect Gibbs oscillation");
  const std::size_t M = samples.size();
  const double dx = length / static_cast<double>(M - 1);
  out.coefficients.assign(static_cast<std::size_t>(modes), 0.0);
  for (int n = 1; n <= modes; ++n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
      const double end = (i == 0 || i + 1 == M) ? 0.5 : 1.0;
      acc += end * samples[i] * boost::math::sin_pi(static_cast<double>(n) * static_cast<double>(i) / static_cast<double>(M - 1));
    }
    out.coefficients[static_cast<std::size_t>(n - 1)] = 2.0 / length * dx * acc;
  }
  return out;
}

inline Projection project_function(const std::function<double(double)>& f, double length, int modes,
                                   std::size_t samples = 4097) {
  std::vector<double> xs(samples);
  for (std::size_t i = 0; i < samples; ++i) xs[i] = f(length * static_cast<double>(i) / static_cast<double>(samples - 1));
  return project_sampled(xs, length, modes);
}

inline ModalCoefficients project_initial(const Profile& z0, const Profile& z1, const Profile& u0,
                                         const Profile& u1, double length, int modes) {
  return {profile_coefficients(z0, length, modes), profile_coefficients(z1, length, modes),
          profile_coefficients(u0, length, modes), profile_coefficients(u1, length, modes)};
}

// ---------------------------------------------------------------------------
// Per-mode generator

/// Dense generator of mode n, unknowns ordered (z, w, u, v, phi_1..phi_J).
inline Eigen::MatrixXd assemble_generator(const PhysicalParams& p, int n, const DiffusiveGrid& g) {
  require_valid(p);
  const auto J = static_cast<Eigen::Index>(g.size());
  const double mu2 = std::pow(mode_frequency(p, n), 2);
  const double zeta = damping_constant(p);
  const auto mu = mu_on(g, p.alpha);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4 + J, 4 + J);
  A(0, 1) = 1.0;
  A(1, 0) = -p.a1 * mu2 / p.rho_z;
  A(1, 2) = -p.a2 * mu2 / p.rho_z;
  A(2, 3) = 1.0;
  A(3, 0) = -p.a2 * mu2 / p.rho_u;
  A(3, 2) = -p.a3 * mu2 / p.rho_u;
  for (Eigen::Index j = 0; j < J; ++j) {
    const auto js = static_cast<std::size_t>(j);
    A(1, 4 + j) = -2.0 * zeta * g.weights[js] * mu[js] / p.rho_z;
    A(4 + j, 1) = mu[js];
    A(4 + j, 4 + j) = -(g.nodes[js] * g.nodes[js] + p.kappa);
  }
  return A;
}

/// Gram matrix G of the energy inner product for mode n (without the L/2
/// Parseval factor): E_n = (L/4) x^T G x.
inline Eigen::MatrixXd energy_gram(const PhysicalParams& p, int n, const DiffusiveGrid& g) {
  const auto J = static_cast<Eigen::Index>(g.size());
  const double mu2 = std::pow(mode_frequency(p, n), 2);
  const double zeta = damping_constant(p);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(4 + J, 4 + J);
  G(0, 0) = p.a1 * mu2;
  G(0, 2) = G(2, 0) = p.a2 * mu2;
  G(2, 2) = p.a3 * mu2;
  G(1, 1) = p.rho_z;
  G(3, 3) = p.rho_u;
  for (Eigen::Index j = 0; j < J; ++j) G(4 + j, 4 + j) = 2.0 * zeta * g.weights[static_cast<std::size_t>(j)];
  return G;
}

inline Eigen::VectorXd to_vector(const ModalState& s) {
  Eigen::VectorXd x(4 + static_cast<Eigen::Index>(s.phi.size()));
  x << s.z, s.w, s.u, s.v, Eigen::Map<const Eigen::VectorXd>(s.phi.data(), static_cast<Eigen::Index>(s.phi.size()));
  return x;
}

inline ModalState from_vector(int mode, const Eigen::VectorXd& x) {
  ModalState s;
  s.mode = mode;
  s.z = x(0);
  s.w = x(1);
  s.u = x(2);
  s.v = x(3);
  s.phi.assign(x.data() + 4, x.data() + x.size());
  return s;
}

/// (I - dt/2 A)^-1 (I + dt/2 A).
inline Eigen::MatrixXd crank_nicolson_matrix(const Eigen::MatrixXd& A, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("crank_nicolson_matrix: dt must be positive");
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - 0.5 * dt * A);
  return lu.solve(I + 0.5 * dt * A);
}

/// One implicit-midpoint step with a dense generator; reference route for the
/// structured stepper below.
inline ModalState step_cn(const ModalState& state, const Eigen::MatrixXd& A, double dt) {
  return from_vector(state.mode, crank_nicolson_matrix(A, dt) * to_vector(state));
}

/// Crank-Nicolson for one mode. The memory rows of the generator are diagonal,
/// so they are eliminated exactly and each step costs O(J) plus a 4x4
/// product with a matrix factored once at construction.
class CrankNicolsonStepper {
 public:
  CrankNicolsonStepper(const PhysicalParams& p, int n, const DiffusiveGrid& g, double dt)
      : mode_(n), dt_(dt), length_(p.length), rho_z_(p.rho_z), rho_u_(p.rho_u), a1_(p.a1), a2_(p.a2), a3_(p.a3) {
    require_valid(p);
    if (!(dt > 0.0)) throw std::invalid_argument("CrankNicolsonStepper: dt must be positive");
    if (n < 1) throw std::invalid_argument("CrankNicolsonStepper: mode index must be >= 1");
    const std::size_t J = g.size();
    mu2_ = std::pow(mode_frequency(p, n), 2);
    zeta_ = damping_constant(p);
    const auto mu = mu_on(g, p.alpha);
    keep_.resize(J);
    feed_.resize(J);
    sum_w_.resize(J);
    wq_.resize(J);
    wrq_.resize(J);
    double s = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double rate = g.nodes[j] * g.nodes[j] + p.kappa;
      const double d = 1.0 + 0.5 * dt * rate;
      const double c = g.weights[j] * mu[j];
      keep_[j] = (1.0 - 0.5 * dt * rate) / d;
      feed_[j] = 0.5 * dt * mu[j] / d;
      sum_w_[j] = 2.0 * c / d;
      s += c * mu[j] / d;
      wq_[j] = g.weights[j];
      wrq_[j] = g.weights[j] * rate;
    }
    gain_ = 2.0 * zeta_ / p.rho_z;
    Eigen::Matrix4d B = Eigen::Matrix4d::Zero();
    B(0, 1) = 1.0;
    B(1, 0) = -p.a1 * mu2_ / p.rho_z;
    B(1, 2) = -p.a2 * mu2_ / p.rho_z;
    B(2, 3) = 1.0;
    B(3, 0) = -p.a2 * mu2_ / p.rho_u;
    B(3, 2) = -p.a3 * mu2_ / p.rho_u;
    const Eigen::Matrix4d I = Eigen::Matrix4d::Identity();
    Eigen::Matrix4d S = I - 0.5 * dt * B;
    schur_w_ = 0.25 * dt * dt * gain_ * s;
    S(1, 1) += schur_w_;
    explicit_ = I + 0.5 * dt * B;
    Eigen::FullPivLU<Eigen::Matrix4d> lu(S);
    if (!lu.isInvertible()) throw std::runtime_error("CrankNicolsonStepper: singular implicit matrix");
    implicit_inv_ = lu.inverse();
  }

  [[nodiscard]] int mode() const noexcept { return mode_; }
  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] std::size_t grid_size() const noexcept { return keep_.size(); }

  struct StepInfo {
    double midpoint_dissipation;  ///< D at (x_k + x_{k+1}) / 2
  };

  /// Advances in place.
  StepInfo step(ModalState& s) const {
    double sigma = 0.0;
    const std::size_t J = keep_.size();
    for (std::size_t j = 0; j < J; ++j) sigma += sum_w_[j] * s.phi[j];
    Eigen::Vector4d x(s.z, s.w, s.u, s.v);
    Eigen::Vector4d rhs = explicit_ * x;
    rhs(1) -= 0.5 * dt_ * gain_ * sigma + schur_w_ * s.w;
    const Eigen::Vector4d xn = implicit_inv_ * rhs;
    const double wsum = s.w + xn(1);
    double dmid = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const double next = keep_[j] * s.phi[j] + feed_[j] * wsum;
      const double mid = 0.5 * (s.phi[j] + next);
      dmid += wrq_[j] * mid * mid;
      s.phi[j] = next;
    }
    s.z = xn(0);
    s.w = xn(1);
    s.u = xn(2);
    s.v = xn(3);
    return {length_ * zeta_ * dmid};
  }

  /// Modal share of the energy: (L/4) [rho_z w^2 + rho_u v^2 + mu^2 (a1 z^2
  /// + 2 a2 z u + a3 u^2) + 2 zeta sum w_j phi_j^2].
  [[nodiscard]] double energy(const ModalState& s) const {
    double mem = 0.0;
    for (std::size_t j = 0; j < wq_.size(); ++j) mem += wq_[j] * s.phi[j] * s.phi[j];
    const double mech = rho_z_ * s.w * s.w + rho_u_ * s.v * s.v +
                        mu2_ * (a1_ * s.z * s.z + 2.0 * a2_ * s.z * s.u + a3_ * s.u * s.u);
    return 0.25 * length_ * (mech + 2.0 * zeta_ * mem);
  }

  /// zeta int int (y^2 + kappa) phi^2 restricted to this mode.
  [[nodiscard]] double dissipation(const ModalState& s) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < wrq_.size(); ++j) acc += wrq_[j] * s.phi[j] * s.phi[j];
    return length_ * zeta_ * acc;
  }

 private:
  int mode_;
  double dt_;
  double length_, rho_z_, rho_u_, a1_, a2_, a3_;
  double mu2_ = 0.0;
  double zeta_ = 0.0;
  double gain_ = 0.0;
  double schur_w_ = 0.0;
  std::vector<double> keep_, feed_, sum_w_, wq_, wrq_;
  Eigen::Matrix4d explicit_;
  Eigen::Matrix4d implicit_inv_;
};

// ---------------------------------------------------------------------------
// Simulation driver

struct SimConfig {
  PhysicalParams params;
  int modes = 16;
  double dt = 0.01;
  double t_end = 10.0;
  DiffusiveGrid grid = dynamics_grid();
  ModalCoefficients initial;
  int energy_stride = 1;    ///< record every k-th step in the energy trace
  int snapshot_stride = 0;  ///< 0: keep only the initial and final states
};

struct EnergyTrace {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> dissipation;
  /// E(t_i) - E(t_{i-1}) + trapezoid integral of D over the interval, with the
  /// trapezoid taken per time step; 0 for the first record.
  std::vector<double> residual;

  double max_step_increase = 0.0;     ///< max_k (E_{k+1} - E_k), every step
  double cumulative_residual = 0.0;   ///< sum_k |r_k| over all steps
  double max_midpoint_balance = 0.0;  ///< max_k |E_{k+1} - E_k + dt D(x_{k+1/2})|
};

struct Snapshot {
  double time = 0.0;
  std::vector<ModalState> modes;
};

struct SimResult {
  std::vector<Snapshot> trajectory;
  EnergyTrace energy;
};

inline void validate_config(const SimConfig& cfg) {
  require_valid(cfg.params);
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
  if (!(cfg.t_end > 0.0)) throw std::invalid_argument("SimConfig: t_end must be positive");
  if (cfg.modes < 1) throw std::invalid_argument("SimConfig: need at least one mode");
  if (cfg.energy_stride < 1) throw std::invalid_argument("SimConfig: energy_stride must be >= 1");
  if (cfg.snapshot_stride < 0) throw std::invalid_argument("SimConfig: snapshot_stride must be >= 0");
  if (cfg.grid.empty()) throw std::invalid_argument("SimConfig: empty diffusive grid");
  const auto N = static_cast<std::size_t>(cfg.modes);
  for (const auto* c : {&cfg.initial.z0, &cfg.initial.z1, &cfg.initial.u0, &cfg.initial.u1})
    if (!c->empty() && c->size() < N) throw std::invalid_argument("SimConfig: fewer initial coefficients than modes");
}

inline std::size_t step_count(double t_end, double dt) {
  return static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

/// Steps every mode from its initial coefficients (phi = 0) and records the
/// total energy budget. Modes are independent; totals are accumulated in mode
/// order so the output does not depend on scheduling.
inline SimResult simulate(const SimConfig& cfg) {
  validate_config(cfg);
  const std::size_t K = step_count(cfg.t_end, cfg.dt);
  const std::size_t J = cfg.grid.size();
  std::vector<double> E(K + 1, 0.0), D(K + 1, 0.0), Dmid(K, 0.0);

  std::vector<std::size_t> snap_steps{0};
  if (cfg.snapshot_stride > 0)
    for (std::size_t k = static_cast<std::size_t>(cfg.snapshot_stride); k < K; k += static_cast<std::size_t>(cfg.snapshot_stride))
      snap_steps.push_back(k);
  if (snap_steps.back() != K) snap_steps.push_back(K);

  SimResult res;
  res.trajectory.resize(snap_steps.size());
  for (std::size_t i = 0; i < snap_steps.size(); ++i) {
    res.trajectory[i].time = static_cast<double>(snap_steps[i]) * cfg.dt;
    res.trajectory[i].modes.reserve(static_cast<std::size_t>(cfg.modes));
  }

  auto coef = [](const std::vector<double>& c, int n) {
    return c.empty() ? 0.0 : c[static_cast<std::size_t>(n - 1)];
  };

  for (int n = 1; n <= cfg.modes; ++n) {
    const CrankNicolsonStepper stepper(cfg.params, n, cfg.grid, cfg.dt);
    ModalState s;
    s.mode = n;
    s.z = coef(cfg.initial.z0, n);
    s.w = coef(cfg.initial.z1, n);
    s.u = coef(cfg.initial.u0, n);
    s.v = coef(cfg.initial.u1, n);
    s.phi.assign(J, 0.0);
    std::size_t next_snap = 0;
    auto maybe_snapshot = [&](std::size_t k) {
      if (next_snap < snap_steps.size() && snap_steps[next_snap] == k) res.trajectory[next_snap++].modes.push_back(s);
    };
    E[0] += stepper.energy(s);
    maybe_snapshot(0);
    for (std::size_t k = 0; k < K; ++k) {
      const auto info = stepper.step(s);
      Dmid[k] += info.midpoint_dissipation;
      E[k + 1] += stepper.energy(s);
      D[k + 1] += stepper.dissipation(s);
      maybe_snapshot(k + 1);
    }
  }

  EnergyTrace& tr = res.energy;
  const double dt = cfg.dt;
  double acc_residual = 0.0;
  const auto stride = static_cast<std::size_t>(cfg.energy_stride);
  auto record = [&](std::size_t k) {
    tr.times.push_back(static_cast<double>(k) * dt);
    tr.energy.push_back(E[k]);
    tr.dissipation.push_back(D[k]);
    tr.residual.push_back(acc_residual);
    acc_residual = 0.0;
  };
  record(0);
  for (std::size_t k = 0; k < K; ++k) {
    const double dE = E[k + 1] - E[k];
    const double r = dE + 0.5 * dt * (D[k] + D[k + 1]);
    acc_residual += r;
    tr.cumulative_residual += std::abs(r);
    tr.max_step_increase = std::max(tr.max_step_increase, dE);
    tr.max_midpoint_balance = std::max(tr.max_midpoint_balance, std::abs(dE + dt * Dmid[k]));
    if ((k + 1) % stride == 0 || k + 1 == K) record(k + 1);
  }
  return res;
}

struct Fields {
  double time = 0.0;
  std::vector<double> x, z, u;
  std::string warning;  ///< set when t is not a stored snapshot time
};

/// Sine synthesis of the snapshot nearest to t. sin(n pi x / L) is evaluated
/// with sin_pi so both boundaries give exact zeros.
inline Fields reconstruct(const std::vector<Snapshot>& trajectory, std::span<const double> x_grid, double length,
                          double t) {
  if (trajectory.empty()) throw std::invalid_argument("reconstruct: empty trajectory");
  std::size_t best = 0;
  for (std::size_t i = 1; i < trajectory.size(); ++i)
    if (std::abs(trajectory[i].time - t) < std::abs(trajectory[best].time - t)) best = i;
  const Snapshot& snap = trajectory[best];
  Fields f;
  f.time = snap.time;
  if (std::abs(snap.time - t) > 1e-9 * std::max(1.0, std::abs(t)))
    f.warning = "requested time is not on the trajectory grid; using nearest snapshot t = " + std::to_string(snap.time);
  f.x.assign(x_grid.begin(), x_grid.end());
  f.z.assign(x_grid.size(), 0.0);
  f.u.assign(x_grid.size(), 0.0);
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double frac = x_grid[i] / length;
    for (const auto& m : snap.modes) {
      const double s = boost::math::sin_pi(m.mode * frac);
      f.z[i] += m.z * s;
      f.u[i] += m.u * s;
    }
  }
  return f;
}

}  // namespace swellfrac
