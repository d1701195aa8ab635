#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatfun/errors.hpp"

namespace spatfun {

/// Isotropic spatial covariance families for the scalar score fields.
/// All kinds are nonincreasing in distance with phi(0) = sigma2
/// (the tent kind is parameter-free with phi(0) = 1).
enum class CovKind {
  PoweredExponential,  // sigma2 * exp(-(x/rho)^p), p in (0,2]
  Matern,              // half-integer smoothness nu in {1/2, 3/2, 5/2}
  Spherical,           // compactly supported on [0, rho]
  RationalQuadratic,   // sigma2 / (1 + (x/rho)^2)
  Tent,                // (1 - x)+
  SquaredExponential,  // sigma2 * exp(-(x/rho)^2)
};

inline const char* cov_kind_name(CovKind k) {
  switch (k) {
    case CovKind::PoweredExponential: return "powered-exponential";
    case CovKind::Matern: return "matern";
    case CovKind::Spherical: return "spherical";
    case CovKind::RationalQuadratic: return "rational-quadratic";
    case CovKind::Tent: return "tent";
    case CovKind::SquaredExponential: return "squared-exponential";
  }
  return "?";
}

struct CovFamily {
  CovKind kind = CovKind::PoweredExponential;
  double sigma2 = 1.0;  // variance phi(0); ignored by tent
  double rho = 1.0;     // range / length scale
  double p = 1.0;       // powered-exponential exponent
  double nu = 0.5;      // matern smoothness

  static CovFamily powered_exponential(double sigma2, double rho, double p) {
    CovFamily f{CovKind::PoweredExponential, sigma2, rho, p, 0.5};
    f.validate();
    return f;
  }
  static CovFamily exponential(double sigma2, double rho) {
    return powered_exponential(sigma2, rho, 1.0);
  }
  static CovFamily matern(double sigma2, double rho, double nu) {
    CovFamily f{CovKind::Matern, sigma2, rho, 1.0, nu};
    f.validate();
    return f;
  }
  static CovFamily spherical(double sigma2, double rho) {
    CovFamily f{CovKind::Spherical, sigma2, rho, 1.0, 0.5};
    f.validate();
    return f;
  }
  static CovFamily rational_quadratic(double sigma2, double rho) {
    CovFamily f{CovKind::RationalQuadratic, sigma2, rho, 1.0, 0.5};
    f.validate();
    return f;
  }
  static CovFamily tent() {
    CovFamily f{CovKind::Tent, 1.0, 1.0, 1.0, 0.5};
    return f;
  }
  static CovFamily squared_exponential(double sigma2, double scale) {
    CovFamily f{CovKind::SquaredExponential, sigma2, scale, 2.0, 0.5};
    f.validate();
    return f;
  }

  /// phi(0)
  double variance() const { return kind == CovKind::Tent ? 1.0 : sigma2; }

  void validate() const {
    if (sigma2 < 0.0) throw std::invalid_argument("CovFamily: sigma2 must be >= 0");
    if (rho <= 0.0) throw std::invalid_argument("CovFamily: rho must be > 0");
    if (kind == CovKind::PoweredExponential && (p <= 0.0 || p > 2.0))
      throw std::invalid_argument("CovFamily: powered-exponential needs p in (0, 2]");
    if (kind == CovKind::Matern && nu != 0.5 && nu != 1.5 && nu != 2.5)
      throw std::invalid_argument("CovFamily: unsupported matern nu (use 1/2, 3/2 or 5/2)");
  }
};

/// Evaluates the covariance family at distance x >= 0.
inline double phi_eval(const CovFamily& f, double x) {
  if (x < 0.0) throw std::invalid_argument("phi_eval: distance must be >= 0");
  f.validate();
  const double z = x / f.rho;
  switch (f.kind) {
    case CovKind::PoweredExponential:
      return f.sigma2 * std::exp(-std::pow(z, f.p));
    case CovKind::Matern:
      // normalized half-integer closed forms, phi(0) = sigma2
      if (f.nu == 0.5) return f.sigma2 * std::exp(-z);
      if (f.nu == 1.5) return f.sigma2 * (1.0 + z) * std::exp(-z);
      return f.sigma2 * (1.0 + z + z * z / 3.0) * std::exp(-z);
    case CovKind::Spherical:
      if (x > f.rho) return 0.0;
      return f.sigma2 * (1.0 - 1.5 * z + 0.5 * z * z * z);
    case CovKind::RationalQuadratic:
      return f.sigma2 / (1.0 + z * z);
    case CovKind::Tent:
      return x >= 1.0 ? 0.0 : 1.0 - x;
    case CovKind::SquaredExponential:
      return f.sigma2 * std::exp(-z * z);
  }
  return 0.0;
}

enum class DecayKind {
  HEnvelope,      // h(x) = sum_j phi_j(x)
  CovEnvelope,    // H(x) = 2 sum_j phi_j(x)^2 + (sum_j phi_j(x))^2
  LogDecay,       // 1 / log(max(x, e))
  InverseSquare,  // 1 / (1 + x)^2
};

/// Nonincreasing envelope function used by the consistency bounds. Either
/// built from covariance components or one of the slow-decay reference
/// shapes (which are bound inputs only, not simulatable covariances).
class DecayFunction {
public:
  static DecayFunction h_envelope(std::vector<CovFamily> components) {
    return DecayFunction(DecayKind::HEnvelope, std::move(components));
  }
  static DecayFunction cov_envelope(std::vector<CovFamily> components) {
    return DecayFunction(DecayKind::CovEnvelope, std::move(components));
  }
  static DecayFunction log_decay() { return DecayFunction(DecayKind::LogDecay, {}); }
  static DecayFunction inverse_square() { return DecayFunction(DecayKind::InverseSquare, {}); }

  double operator()(double x) const {
    if (x < 0.0) throw std::invalid_argument("DecayFunction: distance must be >= 0");
    switch (kind_) {
      case DecayKind::HEnvelope: {
        double s = 0.0;
        for (const auto& f : components_) s += phi_eval(f, x);
        return s;
      }
      case DecayKind::CovEnvelope: {
        double s = 0.0, sq = 0.0;
        for (const auto& f : components_) {
          const double v = phi_eval(f, x);
          s += v;
          sq += v * v;
        }
        return 2.0 * sq + s * s;
      }
      case DecayKind::LogDecay:
        return 1.0 / std::log(std::max(x, std::exp(1.0)));
      case DecayKind::InverseSquare:
        return 1.0 / ((1.0 + x) * (1.0 + x));
    }
    return 0.0;
  }

  double at_zero() const { return (*this)(0.0); }
  DecayKind kind() const { return kind_; }
  const std::vector<CovFamily>& components() const { return components_; }

  /// Summability diagnostics for component-built envelopes.
  double sigma2_sum() const {
    double s = 0.0;
    for (const auto& f : components_) s += f.variance();
    return s;
  }
  double rho_max() const {
    double r = 0.0;
    for (const auto& f : components_) r = std::max(r, f.rho);
    return r;
  }

private:
  DecayFunction(DecayKind kind, std::vector<CovFamily> components)
      : kind_(kind), components_(std::move(components)) {
    for (const auto& f : components_) f.validate();
  }
  DecayKind kind_;
  std::vector<CovFamily> components_;
};

/// h(x) = sum_j phi_j(x). Empty list gives h == 0.
inline DecayFunction h_from_components(std::vector<CovFamily> components) {
  return DecayFunction::h_envelope(std::move(components));
}

/// Fourth-order envelope for Gaussian models with independent score fields:
/// H(x) = 2 sum_j phi_j(x)^2 + (sum_j phi_j(x))^2.
inline DecayFunction H_gaussian_independent(std::vector<CovFamily> components) {
  return DecayFunction::cov_envelope(std::move(components));
}

/// cov(X^2, Y^2) = 2 rho^2 sigma^2 nu^2 for jointly normal mean-zero X, Y
/// with standard deviations sigma, nu and correlation rho.
inline double gaussian_sq_cov(double sigma, double nu, double rho) {
  if (sigma < 0.0 || nu < 0.0)
    throw std::invalid_argument("gaussian_sq_cov: standard deviations must be >= 0");
  if (std::abs(rho) > 1.0)
    throw std::invalid_argument("gaussian_sq_cov: |rho| must be <= 1");
  const double s2 = sigma * sigma, n2 = nu * nu;
  return 2.0 * rho * rho * s2 * n2;
}

/// Reference two-component squared-score covariance profile in the weight
/// lambda of the second component:
///   f(l) = (3 - 2 sqrt(2)) (1 + l^2) + 2 [1 + l + l^2 - (1 + l^{3/2})(1 + l)^{1/2}].
/// Implemented exactly as this closed form. Note that it does NOT agree with
/// the first-principles Isserlis evaluation below (the i != j cross terms
/// differ); both are kept so the discrepancy stays visible in tests.
inline double f_lambda(double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("f_lambda: lambda must be in [0, 1]");
  const double a = 3.0 - 2.0 * std::sqrt(2.0);
  return a * (1.0 + lambda * lambda) +
         2.0 * (1.0 + lambda + lambda * lambda -
                (1.0 + std::pow(lambda, 1.5)) * std::sqrt(1.0 + lambda));
}

/// Isserlis-theorem value of sum_{i,j} cov(xi_i(s1) xi_j(s1), xi_i(s2) xi_j(s2))
/// for two independent Gaussian score fields with variances (1, lambda) and a
/// common correlation r at the given distance:
///   2 r^2 (1 + lambda + lambda^2).
inline double kappa_isserlis_two_component(double lambda, double r) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("kappa_isserlis_two_component: lambda must be in [0, 1]");
  if (std::abs(r) > 1.0)
    throw std::invalid_argument("kappa_isserlis_two_component: |r| must be <= 1");
  return 2.0 * r * r * (1.0 + lambda + lambda * lambda);
}

}  // namespace spatfun
