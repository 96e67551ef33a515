#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "shrinkerlab/errors.hpp"

namespace shrinkerlab {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre nodes and weights on [lo, hi]. Newton iteration on the
// three-term Legendre recurrence, seeded with the Tricomi approximation.
inline QuadratureRule gauss_legendre(int count, double lo, double hi) {
  if (count < 1) throw ValidationError("gauss_legendre: count must be positive");
  QuadratureRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const int half_count = (count + 1) / 2;
  for (int i = 0; i < half_count; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0;
    double p1 = z;
    for (int k = 2; k <= count; ++k) {
      const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = count * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = mid - half * z;
    rule.nodes[count - 1 - i] = mid + half * z;
    rule.weights[i] = half * w;
    rule.weights[count - 1 - i] = half * w;
  }
  return rule;
}

// Uniform rule for a periodic axis; spectrally accurate for smooth periodic integrands.
inline QuadratureRule periodic_trapezoid(int count, double lo, double hi) {
  if (count < 1) throw ValidationError("periodic_trapezoid: count must be positive");
  QuadratureRule rule;
  const double step = (hi - lo) / count;
  for (int i = 0; i < count; ++i) {
    rule.nodes.push_back(lo + (i + 0.5) * step);
    rule.weights.push_back(step);
  }
  return rule;
}

}  // namespace shrinkerlab
