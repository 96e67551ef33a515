#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shrinkerlab/errors.hpp"
#include "shrinkerlab/quadrature.hpp"

namespace shrinkerlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;

  double span() const { return hi - lo; }
};

// Embedding value together with its first and second parameter derivatives.
// first is N x n (column i is dF/du_i); second is N x (n*n) with column
// i*n + j holding d2F/du_i du_j.
struct ChartJet {
  Vec position;
  Mat first;
  Mat second;
};

// A parametrized piece of an n-dimensional submanifold of R^N. A chart may
// consist of several congruent pieces sharing one parameter box (the doubled
// logarithmic spiral is two rays); `pieces` counts them and both callbacks
// receive the piece index.
struct ChartSpec {
  std::string name;
  std::vector<double> params;
  int intrinsic_dim = 1;
  int ambient_dim = 2;
  std::vector<Axis> domain;
  int pieces = 1;
  std::function<Vec(const Vec& u, int piece)> embed;
  std::function<ChartJet(const Vec& u, int piece)> jet;  // empty if no analytic derivatives
  double multiplicity = 1.0;
  std::string truncation_note;
  // Upper bound on the Gaussian-density mass cut away by truncation, for t in [0.05, 20].
  double tail_bound = 0.0;
  std::vector<int> default_resolution;
};

enum class DerivativeMode { analytic, finite_difference };

struct SampledManifold {
  int intrinsic_dim = 1;
  int ambient_dim = 2;
  double multiplicity = 1.0;
  double tail_bound = 0.0;
  Mat positions;               // N x K
  Vec area;                    // K; parameter weight x sqrt(det g) x multiplicity
  Vec spacing;                 // K; local node spacing, (area / multiplicity)^{1/n}
  std::vector<Mat> tangents;   // K entries, each N x n
  std::optional<Mat> mean_curvature;  // N x K

  Eigen::Index size() const { return positions.cols(); }
  double total_area() const { return area.sum(); }

  Vec weighted_centroid() const { return positions * area / area.sum(); }

  Vec lower_corner() const { return positions.rowwise().minCoeff(); }
  Vec upper_corner() const { return positions.rowwise().maxCoeff(); }
};

// Central differences with per-axis steps. Second-order accurate.
inline ChartJet finite_difference_jet(const ChartSpec& chart, const Vec& u, int piece,
                                      const std::vector<double>& steps) {
  const int n = chart.intrinsic_dim;
  ChartJet jet;
  jet.position = chart.embed(u, piece);
  const auto N = jet.position.size();
  jet.first.resize(N, n);
  jet.second.resize(N, n * n);
  Vec shifted = u;
  for (int i = 0; i < n; ++i) {
    const double hi = steps[i];
    shifted = u;
    shifted[i] += hi;
    const Vec plus = chart.embed(shifted, piece);
    shifted[i] = u[i] - hi;
    const Vec minus = chart.embed(shifted, piece);
    jet.first.col(i) = (plus - minus) / (2.0 * hi);
    jet.second.col(i * n + i) = (plus - 2.0 * jet.position + minus) / (hi * hi);
    for (int j = 0; j < i; ++j) {
      const double hj = steps[j];
      Vec q = u;
      q[i] += hi;
      q[j] += hj;
      const Vec pp = chart.embed(q, piece);
      q[j] = u[j] - hj;
      const Vec pm = chart.embed(q, piece);
      q[i] = u[i] - hi;
      const Vec mm = chart.embed(q, piece);
      q[j] = u[j] + hj;
      const Vec mp = chart.embed(q, piece);
      const Vec mixed = (pp - pm - mp + mm) / (4.0 * hi * hj);
      jet.second.col(i * n + j) = mixed;
      jet.second.col(j * n + i) = mixed;
    }
  }
  return jet;
}

inline std::vector<double> default_fd_steps(const ChartSpec& chart) {
  std::vector<double> steps;
  for (const auto& axis : chart.domain) steps.push_back(axis.span() * 1e-4);
  return steps;
}

// H = g^{ij} (d2F/du_i du_j)^perp from a jet.
inline Vec mean_curvature_from_jet(const ChartJet& jet) {
  const auto n = jet.first.cols();
  const Mat metric = jet.first.transpose() * jet.first;
  const Mat inverse = metric.inverse();
  Vec trace = Vec::Zero(jet.position.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) trace += inverse(i, j) * jet.second.col(i * n + j);
  const Vec tangential = jet.first * (inverse * (jet.first.transpose() * trace));
  return trace - tangential;
}

// Gram determinant relative to the Hadamard bound of its columns; scale invariant,
// and zero exactly when the tangent vectors are linearly dependent.
inline double relative_gram(const Mat& tangent) {
  const Mat metric = tangent.transpose() * tangent;
  const double bound = metric.diagonal().prod();
  return bound > 0.0 ? metric.determinant() / bound : 0.0;
}

inline constexpr double kDegenerateGram = 1e-14;

// Normal component of v relative to the column span of `tangent`.
inline Vec normal_part(const Mat& tangent, const Vec& v) {
  const Mat metric = tangent.transpose() * tangent;
  return v - tangent * metric.ldlt().solve(tangent.transpose() * v);
}

inline Vec mean_curvature_at(const ChartSpec& chart, const Vec& u, double h, int piece = 0) {
  if (!(h > 0.0)) throw ValidationError("mean_curvature_at: step must be positive");
  for (int i = 0; i < chart.intrinsic_dim; ++i) {
    const auto& axis = chart.domain[i];
    if (axis.periodic) continue;
    if (u[i] - axis.lo < 2.0 * h || axis.hi - u[i] < 2.0 * h)
      throw ValidationError("mean_curvature_at: parameter point within 2h of the boundary");
  }
  const ChartJet jet =
      finite_difference_jet(chart, u, piece, std::vector<double>(chart.intrinsic_dim, h));
  if (!(relative_gram(jet.first) > kDegenerateGram))
    throw NumericError("mean_curvature_at: degenerate metric");
  return mean_curvature_from_jet(jet);
}

inline SampledManifold build_samples(const ChartSpec& chart, const std::vector<int>& resolution,
                                     DerivativeMode mode = DerivativeMode::analytic) {
  const int n = chart.intrinsic_dim;
  if (static_cast<int>(resolution.size()) != n || static_cast<int>(chart.domain.size()) != n)
    throw ValidationError("build_samples: resolution and domain must have one entry per axis");
  for (int r : resolution)
    if (r < 4) throw ValidationError("build_samples: resolution must be at least 4 per axis");
  if (mode == DerivativeMode::analytic && !chart.jet)
    throw ValidationError("build_samples: chart '" + chart.name + "' has no analytic derivatives");

  std::vector<QuadratureRule> rules;
  for (int i = 0; i < n; ++i) {
    const auto& axis = chart.domain[i];
    rules.push_back(axis.periodic ? periodic_trapezoid(resolution[i], axis.lo, axis.hi)
                                  : gauss_legendre(resolution[i], axis.lo, axis.hi));
  }
  Eigen::Index per_piece = 1;
  for (int r : resolution) per_piece *= r;
  const Eigen::Index total = per_piece * chart.pieces;

  SampledManifold out;
  out.intrinsic_dim = n;
  out.ambient_dim = chart.ambient_dim;
  out.multiplicity = chart.multiplicity;
  out.tail_bound = chart.tail_bound;
  out.positions.resize(chart.ambient_dim, total);
  out.area.resize(total);
  out.spacing.resize(total);
  out.tangents.reserve(total);
  Mat curvature(chart.ambient_dim, total);

  const auto steps = default_fd_steps(chart);
  std::vector<int> index(n, 0);
  Vec u(n);
  Eigen::Index k = 0;
  for (int piece = 0; piece < chart.pieces; ++piece) {
    std::fill(index.begin(), index.end(), 0);
    for (Eigen::Index flat = 0; flat < per_piece; ++flat, ++k) {
      double weight = chart.multiplicity;
      for (int i = 0; i < n; ++i) {
        u[i] = rules[i].nodes[index[i]];
        weight *= rules[i].weights[index[i]];
      }
      const ChartJet jet = mode == DerivativeMode::analytic
                               ? chart.jet(u, piece)
                               : finite_difference_jet(chart, u, piece, steps);
      const double det = (jet.first.transpose() * jet.first).determinant();
      if (!(relative_gram(jet.first) > kDegenerateGram))
        throw NumericError("build_samples: degenerate Jacobian at node " + std::to_string(k) +
                           " (piece " + std::to_string(piece) + ")");
      out.positions.col(k) = jet.position;
      out.area[k] = weight * std::sqrt(det);
      out.spacing[k] = std::pow(out.area[k] / chart.multiplicity, 1.0 / n);
      out.tangents.push_back(jet.first);
      curvature.col(k) = mean_curvature_from_jet(jet);
      for (int i = n - 1; i >= 0; --i) {
        if (++index[i] < resolution[i]) break;
        index[i] = 0;
      }
    }
  }
  out.mean_curvature = std::move(curvature);
  return out;
}

inline SampledManifold build_samples(const ChartSpec& chart,
                                     DerivativeMode mode = DerivativeMode::analytic) {
  return build_samples(chart, chart.default_resolution, mode);
}

// max over nodes of |H + x_perp / 2|; zero exactly on self-shrinkers.
inline double shrinker_residual(const SampledManifold& sampled) {
  if (!sampled.mean_curvature) throw ValidationError("shrinker_residual: no mean curvature");
  double worst = 0.0;
  for (Eigen::Index k = 0; k < sampled.size(); ++k) {
    const Vec x = sampled.positions.col(k);
    const Vec residual = sampled.mean_curvature->col(k) + 0.5 * normal_part(sampled.tangents[k], x);
    worst = std::max(worst, residual.norm());
  }
  return worst;
}

}  // namespace shrinkerlab
