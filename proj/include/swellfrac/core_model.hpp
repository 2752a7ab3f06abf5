// Copyright The swellfrac Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace swellfrac {

/// Constants of the swelling porous-elastic model with fractional damping on
/// the fluid displacement. The defaults are the reference configuration used
/// throughout the tests (rho = 1, a1 = a3 = 2, a2 = 1, L = pi).
struct PhysicalParams {
  double rho_z = 1.0;   ///< fluid density
  double rho_u = 1.0;   ///< solid density
  double a1 = 2.0;
  double a2 = 1.0;      ///< coupling; must be nonzero
  double a3 = 2.0;
  double gamma = 1.0;   ///< damping gain, 0 gives the conservative limit
  double alpha = 0.5;   ///< fractional order in (0, 1)
  double kappa = 1.0;   ///< exponential weight of the memory kernel
  double length = std::numbers::pi;
};

struct ValidationReport {
  std::vector<std::string> violations;

  [[nodiscard]] bool ok() const noexcept { return violations.empty(); }

  [[nodiscard]] std::string message() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
      if (i) os << "; ";
      os << violations[i];
    }
    return os.str();
  }
};

class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(ValidationReport report)
      : std::invalid_argument("invalid parameters: " + report.message()),
        report_(std::move(report)) {}

  [[nodiscard]] const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

inline ValidationReport validate_params(const PhysicalParams& p) {
  ValidationReport r;
  auto require = [&r](bool cond, const char* what) {
    if (!cond) r.violations.emplace_back(what);
  };
  const double fields[] = {p.rho_z, p.rho_u, p.a1, p.a2, p.a3, p.gamma, p.alpha, p.kappa, p.length};
  for (double f : fields) {
    if (!std::isfinite(f)) {
      r.violations.emplace_back("all parameters must be finite");
      return r;
    }
  }
  require(p.rho_z > 0.0, "rho_z > 0 required");
  require(p.rho_u > 0.0, "rho_u > 0 required");
  require(p.a1 > 0.0, "a1 > 0 required");
  require(p.a3 > 0.0, "a3 > 0 required");
  require(p.a2 != 0.0, "a2 != 0 required");
  require(p.a1 * p.a3 > p.a2 * p.a2, "a1*a3 > a2^2 required");
  require(p.alpha > 0.0 && p.alpha < 1.0, "alpha must lie in (0,1)");
  require(p.kappa >= 0.0, "kappa >= 0 required");
  require(p.gamma >= 0.0, "gamma >= 0 required");
  require(p.length > 0.0, "length L > 0 required");
  return r;
}

inline void require_valid(const PhysicalParams& p) {
  auto report = validate_params(p);
  if (!report.ok()) throw ValidationError(std::move(report));
}

/// zeta = gamma sin(alpha pi) / pi, the gain in front of the memory integral.
inline double damping_constant(const PhysicalParams& p) {
  return p.gamma * std::sin(p.alpha * std::numbers::pi) / std::numbers::pi;
}

/// Dirichlet sine frequency n pi / L.
inline double mode_frequency(const PhysicalParams& p, int n) {
  return n * std::numbers::pi / p.length;
}

inline double m_coefficient(const PhysicalParams& p) { return p.a1 / p.rho_z + p.a3 / p.rho_u; }

inline double p_coefficient(const PhysicalParams& p) {
  return (p.a1 * p.a3 - p.a2 * p.a2) / (p.rho_z * p.rho_u);
}

struct LimitSpeeds {
  double minus;
  double plus;
};

/// Positive roots of l^4 - m l^2 + p = 0. The smaller square is taken from
/// Vieta (p / l_plus^2) so it keeps full relative precision when a2 is small.
inline LimitSpeeds limit_speeds(const PhysicalParams& p) {
  const double m = m_coefficient(p);
  const double q = p_coefficient(p);
  const double disc = std::sqrt(std::max(0.0, m * m - 4.0 * q));
  const double plus_sq = 0.5 * (m + disc);
  const double minus_sq = q / plus_sq;
  return {std::sqrt(minus_sq), std::sqrt(plus_sq)};
}

struct DerivedConstants {
  double zeta;
  double l_plus;
  double l_minus;
  double m;
  double p;
  double length;

  [[nodiscard]] double mode_freq(int n) const { return n * std::numbers::pi / length; }
};

inline DerivedConstants derive_constants(const PhysicalParams& p) {
  const auto speeds = limit_speeds(p);
  return {damping_constant(p), speeds.plus, speeds.minus, m_coefficient(p), p_coefficient(p), p.length};
}

/// Diffusive weight |y|^((2 alpha - 1) / 2). The origin is rejected for
/// alpha <= 1/2; quadrature grids never place a node there.
inline double mu_eval(double y, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("mu_eval: alpha must lie in (0,1)");
  const double e = (2.0 * alpha - 1.0) / 2.0;
  if (y == 0.0) {
    if (e > 0.0) return 0.0;
    throw std::domain_error("mu_eval: y = 0 is excluded for alpha <= 1/2");
  }
  return std::pow(std::abs(y), e);
}

}  // namespace swellfrac
