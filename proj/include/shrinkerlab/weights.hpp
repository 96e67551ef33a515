#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

#include "shrinkerlab/errors.hpp"

namespace shrinkerlab {

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Pointwise weights. Each takes the squared distance |x - x0|^2 so callers can
// reuse it across families; the vector overloads compute it for them.
// ---------------------------------------------------------------------------

// Conformal weight W^M_rho = rho^M (1 + rho^2 d^2 / 4)^{-M}.
inline double conformal_weight_sq(double M, double rho, double dist_sq) {
  return std::exp(M * std::log(rho) - M * std::log1p(0.25 * rho * rho * dist_sq));
}

// Modified weight What^n_{M,rho} = (4 pi rho)^{-n/2} (1 + d^2 / (4 M rho))^{-M}.
inline double modified_weight_sq(double n, double M, double rho, double dist_sq) {
  return std::exp(-0.5 * n * std::log(4.0 * kPi * rho) - M * std::log1p(dist_sq / (4.0 * M * rho)));
}

// Gaussian (4 pi t)^{-n/2} exp(-d^2 / 4t); n may differ from the ambient dimension.
inline double gaussian_sq(double n, double t, double dist_sq) {
  return std::exp(-0.5 * n * std::log(4.0 * kPi * t) - dist_sq / (4.0 * t));
}

inline double weight_eval(double M, double rho, const Eigen::VectorXd& center,
                          const Eigen::VectorXd& x) {
  if (!(M > 0.0) || !(rho > 0.0)) throw ValidationError("weight_eval: M and rho must be positive");
  return conformal_weight_sq(M, rho, (x - center).squaredNorm());
}

// What^n_{n+m,rho}; the exponent is n + m.
inline double what_eval(int n, double m, double rho, const Eigen::VectorXd& center,
                        const Eigen::VectorXd& x) {
  if (n < 1 || m < 0.0 || !(rho > 0.0)) throw ValidationError("what_eval: need n >= 1, m >= 0, rho > 0");
  return modified_weight_sq(n, n + m, rho, (x - center).squaredNorm());
}

inline double gaussian_eval(double n, double t, const Eigen::VectorXd& center,
                            const Eigen::VectorXd& x) {
  if (!(t > 0.0)) throw ValidationError("gaussian_eval: t must be positive");
  return gaussian_sq(n, t, (x - center).squaredNorm());
}

// ---------------------------------------------------------------------------
// Sphere areas and the stabilization constants.
// ---------------------------------------------------------------------------

// log |S^k| by the upward recursion |S^{k+2}| = 2 pi / (k + 1) |S^k|.
inline double log_sphere_area(int k) {
  if (k < 0) throw ValidationError("sphere_area: k must be non-negative");
  double value = (k % 2 == 0) ? std::log(2.0) : std::log(2.0 * kPi);
  for (int j = k % 2; j + 2 <= k; j += 2) value += std::log(2.0 * kPi / (j + 1));
  return value;
}

inline double sphere_area(int k) {
  if (k < 0) throw ValidationError("sphere_area: k must be non-negative");
  if (k > 300) return std::exp(log_sphere_area(k));
  double value = (k % 2 == 0) ? 2.0 : 2.0 * kPi;
  for (int j = k % 2; j + 2 <= k; j += 2) value *= 2.0 * kPi / (j + 1);
  return value;
}

// log C_{M,m} = m log(4 pi) + log (M+m-1)! - log (M+2m-1)!
inline double log_c_const(int M, int m) {
  if (M < 1 || m < 0) throw ValidationError("c_const: need M >= 1 and m >= 0");
  return m * std::log(4.0 * kPi) + std::lgamma(double(M + m)) - std::lgamma(double(M + 2 * m));
}

// Small arguments use the exact finite product so that, e.g., C_{M,0} is exactly 1.
inline double c_const(int M, int m) {
  if (M < 1 || m < 0) throw ValidationError("c_const: need M >= 1 and m >= 0");
  if (M + 2 * m > 300) return std::exp(log_c_const(M, m));
  double value = 1.0;
  for (int k = M + m; k <= M + 2 * m - 1; ++k) value *= 4.0 * kPi / k;
  return value;
}

// Second expression of C_{M,m} through sphere areas, used as a cross-check.
inline double c_const_from_spheres(int M, int m) {
  if (M < 1 || m < 0) throw ValidationError("c_const: need M >= 1 and m >= 0");
  return std::exp(m * std::log(2.0) + log_sphere_area(M + 2 * m) + log_sphere_area(M + 2 * m - 1) -
                  log_sphere_area(M + m) - log_sphere_area(M + m - 1));
}

// Chat_{n,m} = (4 pi / (n+m))^{n/2} |S^{n+2m}|^{-1} C_{n,m}, which reduces to
// Gamma(n+m) / (Gamma(m + n/2) (n+m)^{n/2}). Evaluated as a product of ratios
// below one (plus the half-integer Gamma ratio for odd n), so it neither
// overflows nor cancels for m in the millions.
inline double c_hat(int n, int m) {
  if (n < 1 || m < 0) throw ValidationError("c_hat: need n >= 1 and m >= 0");
  const double scale = static_cast<double>(n) + m;
  double value = 1.0;
  for (long k = m + (n + 1) / 2; k <= m + n - 1; ++k) value *= k / scale;
  if (n % 2 == 1) {
    // Gamma(K + 1) / Gamma(K + 1/2) = prod_{j<=K} 2j / (2j - 1) / sqrt(pi)
    const long K = m + (n - 1) / 2;
    double ratio = 1.0;
    for (long j = 1; j <= K; ++j) ratio *= (2.0 * j) / (2.0 * j - 1.0);
    value *= ratio / std::sqrt(kPi * scale);
  }
  return value;
}

inline double log_c_hat(int n, int m) { return std::log(c_hat(n, m)); }

// Chat from its defining expression; for cross-checks at moderate m.
inline double c_hat_from_definition(int n, int m) {
  if (n < 1 || m < 0) throw ValidationError("c_hat: need n >= 1 and m >= 0");
  return std::exp(0.5 * n * std::log(4.0 * kPi / (n + m)) - log_sphere_area(n + 2 * m) +
                  log_c_const(n, m));
}

// Normalizer making alpha * What^n_{n+m,1} a unit-mass density on R^N.
inline double alpha_mass(int n, int m, int N) {
  if (n < 1 || N < n) throw ValidationError("alpha_mass: need 1 <= n <= N");
  if (m < N - n) throw ValidationError("alpha_mass: m < N - n, the weight is not integrable on R^N");
  return std::pow(4.0 * kPi, 0.5 * (n - N)) * c_hat(N, n - N + m);
}

// ---------------------------------------------------------------------------
// Log-Hessians and virtual times.
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd log_hessian_weight(double M, double rho, const Eigen::VectorXd& x) {
  if (!(M > 0.0) || !(rho > 0.0)) throw ValidationError("log_hessian_weight: M, rho must be positive");
  const double r2 = rho * rho;
  const double denom = 1.0 + 0.25 * r2 * x.squaredNorm();
  const auto N = x.size();
  Eigen::MatrixXd hess = (-0.5 * M * r2 / denom) * Eigen::MatrixXd::Identity(N, N);
  hess += (0.25 * M * r2 * r2 / (denom * denom)) * (x * x.transpose());
  return hess;
}

enum class WeightKind { conformal, modified };

struct VirtualTimeParams {
  WeightKind kind = WeightKind::conformal;
  double M = 1.0;    // conformal exponent
  double rho = 1.0;  // scale for either family
};

inline double virtual_time_closed(const VirtualTimeParams& p) {
  if (!(p.rho > 0.0)) throw ValidationError("virtual_time_closed: rho must be positive");
  if (p.kind == WeightKind::modified) return p.rho;
  if (!(p.M > 0.0)) throw ValidationError("virtual_time_closed: M must be positive");
  return 1.0 / (p.M * p.rho * p.rho);
}

// ---------------------------------------------------------------------------
// Exact reference values.
// ---------------------------------------------------------------------------

// (2k / (4 pi e))^{k/2} |S^k|: the Gaussian density of the round shrinking k-sphere.
inline double sphere_entropy_exact(int k) {
  if (k < 1) throw ValidationError("sphere_entropy_exact: k must be >= 1");
  return std::exp(0.5 * k * std::log(2.0 * k / (4.0 * kPi * std::numbers::e)) + log_sphere_area(k));
}

// pi y / (x^2 + y^2 - x + 1) on the reduced lattice domain.
inline double lattice_bound(double x, double y) {
  if (!(x >= 0.0 && x <= 0.5)) throw ValidationError("lattice_bound: need 0 <= x <= 1/2");
  if (!(y * y >= 1.0 - x * x - 1e-15) || !(y > 0.0))
    throw ValidationError("lattice_bound: need y >= sqrt(1 - x^2)");
  return kPi * y / (x * x + y * y - x + 1.0);
}

}  // namespace shrinkerlab
