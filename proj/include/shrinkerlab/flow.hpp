#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "shrinkerlab/errors.hpp"
#include "shrinkerlab/functionals.hpp"
#include "shrinkerlab/manifold.hpp"

namespace shrinkerlab {

inline constexpr int kMinCurvePoints = 64;
inline constexpr int kResampleEvery = 20;
inline constexpr double kCollapseLength = 1e-3;

// Closed polyline in R^d, d in {2, 3}; column k is point k and the last point
// connects back to the first.
struct CurveState {
  Mat points;
  double time = 0.0;
  long steps = 0;

  int size() const { return static_cast<int>(points.cols()); }
  Vec point(int k) const { return points.col((k % size() + size()) % size()); }
  double edge(int k) const { return (point(k + 1) - point(k)).norm(); }
  double length() const {
    double sum = 0.0;
    for (int k = 0; k < size(); ++k) sum += edge(k);
    return sum;
  }
  double min_spacing() const {
    double v = HUGE_VAL;
    for (int k = 0; k < size(); ++k) v = std::min(v, edge(k));
    return v;
  }
  double max_spacing() const {
    double v = 0.0;
    for (int k = 0; k < size(); ++k) v = std::max(v, edge(k));
    return v;
  }
};

inline void validate_curve(const CurveState& c) {
  if (c.points.rows() != 2 && c.points.rows() != 3) throw ValidationError("curve must live in R^2 or R^3");
  if (c.size() < kMinCurvePoints) throw ValidationError("curve needs at least 64 points");
  if (!c.points.allFinite()) throw NumericError("curve has non-finite coordinates");
}

// Periodic Catmull-Rom resampling to `count` points equally spaced in arclength.
inline CurveState resample_uniform(const CurveState& c, int count) {
  const int P = c.size();
  std::vector<double> cumulative(P + 1, 0.0);
  for (int k = 0; k < P; ++k) cumulative[k + 1] = cumulative[k] + c.edge(k);
  const double total = cumulative[P];
  CurveState out = c;
  out.points.resize(c.points.rows(), count);
  int seg = 0;
  for (int j = 0; j < count; ++j) {
    const double s = total * j / count;
    while (seg + 1 < P && cumulative[seg + 1] <= s) ++seg;
    const double f = (s - cumulative[seg]) / std::max(cumulative[seg + 1] - cumulative[seg], 1e-300);
    const Vec p0 = c.point(seg - 1), p1 = c.point(seg), p2 = c.point(seg + 1), p3 = c.point(seg + 2);
    const double f2 = f * f, f3 = f2 * f;
    out.points.col(j) = 0.5 * ((2.0 * p1) + (-p0 + p2) * f + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * f2 +
                               (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * f3);
  }
  return out;
}

// Closed curve from a parametrization on [0, 2 pi), resampled to uniform arclength.
inline CurveState curve_from_param(const std::function<Vec(double)>& gamma, int P) {
  if (P < kMinCurvePoints) throw ValidationError("curve needs at least 64 points");
  const int fine = 8 * P;
  CurveState c;
  const Vec first = gamma(0.0);
  c.points.resize(first.size(), fine);
  for (int k = 0; k < fine; ++k) c.points.col(k) = gamma(2.0 * kPi * k / fine);
  validate_curve(c);
  return resample_uniform(c, P);
}

inline CurveState circle_curve(double R, int P = 256) {
  if (!(R > 0.0)) throw ValidationError("circle radius must be positive");
  return curve_from_param([R](double s) { return Vec(Eigen::Vector2d(R * std::cos(s), R * std::sin(s))); }, P);
}

inline CurveState ellipse_curve(double a, double b, int P = 256) {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("ellipse semi-axes must be positive");
  return curve_from_param([a, b](double s) { return Vec(Eigen::Vector2d(a * std::cos(s), b * std::sin(s))); }, P);
}

// Curvature vector at each point from the circle through it and its neighbours:
// directed at the centre with magnitude 1/R, zero for collinear triples.
inline Mat curvature_vector(const CurveState& c) {
  validate_curve(c);
  Mat kappa = Mat::Zero(c.points.rows(), c.size());
  for (int k = 0; k < c.size(); ++k) {
    const Vec b = c.point(k);
    const Vec u = c.point(k - 1) - b, v = c.point(k + 1) - b;
    const double uu = u.squaredNorm(), vv = v.squaredNorm(), uv = u.dot(v);
    if (uu == 0.0 || vv == 0.0) throw NumericError("curve has coincident points at index " + std::to_string(k));
    // o / |o|^2 for the circumcentre o, rewritten without the 1 / |u x v| factor
    const double chord = uu + vv - 2.0 * uv;
    kappa.col(k) = 2.0 * ((uu - uv) / uu * u + (vv - uv) / vv * v) / chord;
  }
  return kappa;
}

// Explicit Euler step; resamples to uniform arclength every kResampleEvery steps.
inline CurveState flow_step(const CurveState& c, double dt) {
  validate_curve(c);
  const double h = c.min_spacing();
  if (!(dt > 0.0) || dt > 0.2 * h * h * (1.0 + 1e-12))
    throw ValidationError("flow_step: dt must lie in (0, 0.2 min_spacing^2]");
  CurveState next = c;
  next.points += dt * curvature_vector(c);
  next.time += dt;
  next.steps += 1;
  if (next.steps % kResampleEvery == 0) next = resample_uniform(next, next.size());
  if (next.length() < kCollapseLength) throw NumericError("flow_step: curve collapsed (length < 1e-3)");
  return next;
}

// Polyline as a 1-dimensional sample: node k carries half of each adjacent edge.
inline SampledManifold polyline_samples(const CurveState& c) {
  validate_curve(c);
  SampledManifold s;
  s.intrinsic_dim = 1;
  s.ambient_dim = static_cast<int>(c.points.rows());
  s.positions = c.points;
  s.area.resize(c.size());
  s.tangents.resize(c.size());
  for (int k = 0; k < c.size(); ++k) {
    s.area[k] = 0.5 * (c.edge(k - 1) + c.edge(k));
    s.tangents[k] = (c.point(k + 1) - c.point(k - 1)).normalized();
  }
  s.spacing = s.area;
  s.mean_curvature = curvature_vector(c);
  return s;
}

// max_k |kappa_k + x_k^perp / (2 (1 - t))|: zero along the self-similar flow
// that passes through a shrinker (H + x^perp / 2 = 0) at t = 0.
inline double flow_shrinker_residual(const CurveState& c) {
  const double tau = 1.0 - c.time;
  if (!(tau > 0.0)) return HUGE_VAL;
  const Mat kappa = curvature_vector(c);
  double worst = 0.0;
  for (int k = 0; k < c.size(); ++k) {
    const Vec tangent = (c.point(k + 1) - c.point(k - 1)).normalized();
    const Vec x = c.point(k);
    const Vec normal_part = x - x.dot(tangent) * tangent;
    worst = std::max(worst, (kappa.col(k) + normal_part / (2.0 * tau)).norm());
  }
  return worst;
}

struct FlowConfig {
  double dt_factor = 0.2;  // dt = dt_factor * min_spacing^2
  int checkpoints = 10;
  OptimizerConfig optimizer;
};

struct FlowTrace {
  std::vector<double> times;
  std::vector<double> lengths;
  std::vector<FunctionalResult> entropy;
  std::vector<double> residuals;
  std::vector<double> min_spacing;
  std::vector<long> steps;
  CurveState final_state;

  // Largest increase lambda(t2) - lambda(t1) over checkpoint pairs t1 < t2.
  double worst_increase() const {
    double worst = -HUGE_VAL;
    for (std::size_t i = 0; i < entropy.size(); ++i)
      for (std::size_t j = i + 1; j < entropy.size(); ++j)
        worst = std::max(worst, entropy[j].value - entropy[i].value);
    return worst;
  }
};

inline FlowTrace run_flow(const CurveState& curve0, double T, const FlowConfig& cfg = {}) {
  validate_curve(curve0);
  if (!(T > 0.0)) throw ValidationError("run_flow: T must be positive");
  if (cfg.checkpoints < 1) throw ValidationError("run_flow: need at least one checkpoint");
  if (!(cfg.dt_factor > 0.0) || cfg.dt_factor > 0.2) throw ValidationError("run_flow: dt_factor must lie in (0, 0.2]");
  FlowTrace trace;
  auto record = [&](const CurveState& c) {
    trace.times.push_back(c.time);
    trace.lengths.push_back(c.length());
    trace.entropy.push_back(cm_entropy(polyline_samples(c), cfg.optimizer));
    trace.residuals.push_back(flow_shrinker_residual(c));
    trace.min_spacing.push_back(c.min_spacing());
    trace.steps.push_back(c.steps);
  };
  CurveState c = curve0;
  const double t0 = c.time;
  record(c);
  for (int k = 1; k <= cfg.checkpoints; ++k) {
    const double target = t0 + T * k / cfg.checkpoints;
    while (c.time < target) {
      const double h = c.min_spacing();
      const double dt = std::min(cfg.dt_factor * h * h, target - c.time);
      c = flow_step(c, dt);
      if (target - c.time < 1e-14 * std::max(1.0, target)) c.time = target;
    }
    record(c);
  }
  trace.final_state = c;
  return trace;
}

// Rigid image x -> Q x + b of a curve, Q with orthonormal columns (d_out x d_in).
inline CurveState transform_curve(const CurveState& c, const Mat& Q, const Vec& b) {
  if (Q.cols() != c.points.rows() || Q.rows() != b.size()) throw ValidationError("transform_curve: shape mismatch");
  if (!(Q.transpose() * Q).isIdentity(1e-12)) throw ValidationError("transform_curve: Q must have orthonormal columns");
  CurveState out = c;
  out.points = (Q * c.points).colwise() + b;
  return out;
}

}  // namespace shrinkerlab
