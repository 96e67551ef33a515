#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "shrinkerlab/errors.hpp"
#include "shrinkerlab/manifold.hpp"

namespace shrinkerlab {

namespace detail {

constexpr double kTailTimeMax = 20.0;
constexpr double kTailTimeMin = 0.05;

inline void require_positive(double value, const std::string& what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw ValidationError(what + " must be positive and finite");
}

inline void require_count(const std::vector<double>& params, std::size_t lo, std::size_t hi,
                          const std::string& name) {
  if (params.size() < lo || params.size() > hi) {
    std::ostringstream msg;
    msg << "catalog entry '" << name << "' takes " << lo;
    if (hi != lo) msg << ".." << hi;
    msg << " parameters, got " << params.size();
    throw ValidationError(msg.str());
  }
}

inline int require_integer(double value, const std::string& what) {
  if (std::round(value) != value) throw ValidationError(what + " must be an integer");
  return static_cast<int>(value);
}

// Unit 2-sphere in polar coordinates (theta, phi) with derivatives up to order two.
struct SpherePoint {
  Eigen::Vector3d s, d_theta, d_phi, dd_theta, dd_mixed, dd_phi;
};

inline SpherePoint unit_sphere(double theta, double phi) {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  SpherePoint p;
  p.s = {st * cp, st * sp, ct};
  p.d_theta = {ct * cp, ct * sp, -st};
  p.d_phi = {-st * sp, st * cp, 0.0};
  p.dd_theta = -p.s;
  p.dd_mixed = {-ct * sp, ct * cp, 0.0};
  p.dd_phi = {-st * cp, -st * sp, 0.0};
  return p;
}

// Symmetric bilinear form B with Veronese map = B(s, s) / 2.
inline Vec veronese_bilinear(const Eigen::Vector3d& v, const Eigen::Vector3d& w) {
  const double r3 = std::sqrt(3.0);
  Vec out(5);
  out << r3 * (v.x() * w.y() + v.y() * w.x()), r3 * (v.x() * w.z() + v.z() * w.x()),
      r3 * (v.y() * w.z() + v.z() * w.y()), r3 * (v.x() * w.x() - v.y() * w.y()),
      v.x() * w.x() + v.y() * w.y() - 2.0 * v.z() * w.z();
  return out;
}

inline ChartJet make_jet(Eigen::Index ambient, Eigen::Index intrinsic) {
  ChartJet jet;
  jet.position = Vec::Zero(ambient);
  jet.first = Mat::Zero(ambient, intrinsic);
  jet.second = Mat::Zero(ambient, intrinsic * intrinsic);
  return jet;
}

inline ChartSpec from_jet(ChartSpec chart) {
  auto jet = chart.jet;
  chart.embed = [jet](const Vec& u, int piece) { return jet(u, piece).position; };
  return chart;
}

inline ChartSpec plane_patch(const std::vector<double>& params) {
  require_count(params, 2, 3, "plane_patch");
  const int n = require_integer(params[0], "plane_patch dimension");
  if (n < 1 || n > 2) throw ValidationError("plane_patch dimension must be 1 or 2");
  const double half = params[1];
  require_positive(half, "plane_patch half width");
  const int ambient = params.size() > 2 ? require_integer(params[2], "plane_patch ambient dim") : n + 1;
  if (ambient < n) throw ValidationError("plane_patch ambient dimension below intrinsic");

  ChartSpec chart;
  chart.name = "plane_patch";
  chart.params = params;
  chart.intrinsic_dim = n;
  chart.ambient_dim = ambient;
  chart.domain.assign(n, Axis{-half, half, false});
  chart.jet = [n, ambient](const Vec& u, int) {
    ChartJet jet = make_jet(ambient, n);
    for (int i = 0; i < n; ++i) {
      jet.position[i] = u[i];
      jet.first(i, i) = 1.0;
    }
    return jet;
  };
  const double reach = half / std::sqrt(4.0 * kTailTimeMax);
  chart.tail_bound = n == 1 ? std::erfc(reach) : std::exp(-reach * reach);
  std::ostringstream note;
  note << "affine " << n << "-plane truncated to [-" << half << ", " << half << "]^" << n;
  chart.truncation_note = note.str();
  // about 50 nodes per unit length in 1-D, capped; 2-D defaults stay affordable
  const int per_axis = n == 1 ? std::clamp(static_cast<int>(std::ceil(50.0 * half)), 400, 100000)
                              : std::clamp(static_cast<int>(std::ceil(10.0 * half)), 100, 600);
  chart.default_resolution.assign(n, per_axis);
  return from_jet(chart);
}

inline ChartSpec sphere(const std::vector<double>& params) {
  require_count(params, 2, 2, "sphere");
  const int n = require_integer(params[0], "sphere dimension");
  const double radius = params[1];
  require_positive(radius, "sphere radius");
  ChartSpec chart;
  chart.name = "sphere";
  chart.params = params;
  chart.intrinsic_dim = n;
  chart.ambient_dim = n + 1;
  if (n == 1) {
    chart.domain = {Axis{0.0, 2.0 * std::numbers::pi, true}};
    chart.jet = [radius](const Vec& u, int) {
      ChartJet jet = make_jet(2, 1);
      const double c = std::cos(u[0]), s = std::sin(u[0]);
      jet.position << radius * c, radius * s;
      jet.first.col(0) << -radius * s, radius * c;
      jet.second.col(0) << -radius * c, -radius * s;
      return jet;
    };
    chart.default_resolution = {256};
  } else if (n == 2) {
    chart.domain = {Axis{0.0, std::numbers::pi, false}, Axis{0.0, 2.0 * std::numbers::pi, true}};
    chart.jet = [radius](const Vec& u, int) {
      const SpherePoint p = unit_sphere(u[0], u[1]);
      ChartJet jet = make_jet(3, 2);
      jet.position = radius * p.s;
      jet.first.col(0) = radius * p.d_theta;
      jet.first.col(1) = radius * p.d_phi;
      jet.second.col(0) = radius * p.dd_theta;
      jet.second.col(1) = radius * p.dd_mixed;
      jet.second.col(2) = radius * p.dd_mixed;
      jet.second.col(3) = radius * p.dd_phi;
      return jet;
    };
    chart.default_resolution = {64, 128};
  } else {
    throw ValidationError("sphere dimension must be 1 or 2");
  }
  return from_jet(chart);
}

inline ChartSpec ellipse(const std::vector<double>& params) {
  require_count(params, 2, 2, "ellipse");
  const double a = params[0], b = params[1];
  require_positive(a, "ellipse semi-axis a");
  require_positive(b, "ellipse semi-axis b");
  ChartSpec chart;
  chart.name = "ellipse";
  chart.params = params;
  chart.intrinsic_dim = 1;
  chart.ambient_dim = 2;
  chart.domain = {Axis{0.0, 2.0 * std::numbers::pi, true}};
  chart.jet = [a, b](const Vec& u, int) {
    ChartJet jet = make_jet(2, 1);
    const double c = std::cos(u[0]), s = std::sin(u[0]);
    jet.position << a * c, b * s;
    jet.first.col(0) << -a * s, b * c;
    jet.second.col(0) << -a * c, -b * s;
    return jet;
  };
  chart.default_resolution = {512};
  return from_jet(chart);
}

inline ChartSpec cylinder(const std::vector<double>& params) {
  require_count(params, 1, 2, "cylinder");
  const double radius = params[0];
  require_positive(radius, "cylinder radius");
  const double half = params.size() > 1 ? params[1] : 40.0;
  require_positive(half, "cylinder half length");
  ChartSpec chart;
  chart.name = "cylinder";
  chart.params = {radius, half};
  chart.intrinsic_dim = 2;
  chart.ambient_dim = 3;
  chart.domain = {Axis{0.0, 2.0 * std::numbers::pi, true}, Axis{-half, half, false}};
  chart.jet = [radius](const Vec& u, int) {
    ChartJet jet = make_jet(3, 2);
    const double c = std::cos(u[0]), s = std::sin(u[0]);
    jet.position << radius * c, radius * s, u[1];
    jet.first.col(0) << -radius * s, radius * c, 0.0;
    jet.first.col(1) << 0.0, 0.0, 1.0;
    jet.second.col(0) << -radius * c, -radius * s, 0.0;
    return jet;
  };
  // circle density never exceeds sqrt(2 pi / e) < 1.53
  chart.tail_bound = 1.53 * std::erfc(half / std::sqrt(4.0 * kTailTimeMax));
  std::ostringstream note;
  note << "axis truncated to [-" << half << ", " << half << "]";
  chart.truncation_note = note.str();
  chart.default_resolution = {64, 480};
  return from_jet(chart);
}

inline ChartSpec clifford_torus(const std::vector<double>& params) {
  require_count(params, 1, 1, "clifford_torus");
  const double scale = params[0];
  require_positive(scale, "clifford_torus scale");
  const double r = scale / std::sqrt(2.0);
  ChartSpec chart;
  chart.name = "clifford_torus";
  chart.params = params;
  chart.intrinsic_dim = 2;
  chart.ambient_dim = 4;
  chart.domain = {Axis{0.0, 2.0 * std::numbers::pi, true}, Axis{0.0, 2.0 * std::numbers::pi, true}};
  chart.jet = [r](const Vec& u, int) {
    ChartJet jet = make_jet(4, 2);
    const double ca = std::cos(u[0]), sa = std::sin(u[0]);
    const double cb = std::cos(u[1]), sb = std::sin(u[1]);
    jet.position << r * ca, r * sa, r * cb, r * sb;
    jet.first.col(0) << -r * sa, r * ca, 0.0, 0.0;
    jet.first.col(1) << 0.0, 0.0, -r * sb, r * cb;
    jet.second.col(0) << -r * ca, -r * sa, 0.0, 0.0;
    jet.second.col(3) << 0.0, 0.0, -r * cb, -r * sb;
    return jet;
  };
  chart.default_resolution = {96, 96};
  return from_jet(chart);
}

// Standard minimal Veronese embedding of RP^2 into the sphere of radius `scale`
// in R^5, parametrized through its double cover S^2 (multiplicity 1/2).
inline ChartSpec veronese(const std::vector<double>& params) {
  require_count(params, 1, 1, "veronese");
  const double scale = params[0];
  require_positive(scale, "veronese scale");
  ChartSpec chart;
  chart.name = "veronese";
  chart.params = params;
  chart.intrinsic_dim = 2;
  chart.ambient_dim = 5;
  chart.multiplicity = 0.5;
  chart.domain = {Axis{0.0, std::numbers::pi, false}, Axis{0.0, 2.0 * std::numbers::pi, true}};
  chart.jet = [scale](const Vec& u, int) {
    const SpherePoint p = unit_sphere(u[0], u[1]);
    ChartJet jet = make_jet(5, 2);
    jet.position = 0.5 * scale * veronese_bilinear(p.s, p.s);
    jet.first.col(0) = scale * veronese_bilinear(p.s, p.d_theta);
    jet.first.col(1) = scale * veronese_bilinear(p.s, p.d_phi);
    jet.second.col(0) =
        scale * (veronese_bilinear(p.d_theta, p.d_theta) + veronese_bilinear(p.s, p.dd_theta));
    jet.second.col(1) =
        scale * (veronese_bilinear(p.d_theta, p.d_phi) + veronese_bilinear(p.s, p.dd_mixed));
    jet.second.col(2) = jet.second.col(1);
    jet.second.col(3) =
        scale * (veronese_bilinear(p.d_phi, p.d_phi) + veronese_bilinear(p.s, p.dd_phi));
    return jet;
  };
  chart.default_resolution = {64, 128};
  return from_jet(chart);
}

// Doubled logarithmic spiral: t -> +-(e^t cos(alpha t), e^t sin(alpha t)), t in [-T0, T0].
inline ChartSpec loxodrome(const std::vector<double>& params) {
  require_count(params, 1, 2, "loxodrome");
  const double alpha = params[0];
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("loxodrome alpha must be >= 0");
  const double reach = params.size() > 1 ? params[1] : 12.0;
  require_positive(reach, "loxodrome parameter range");
  ChartSpec chart;
  chart.name = "loxodrome";
  chart.params = {alpha, reach};
  chart.intrinsic_dim = 1;
  chart.ambient_dim = 2;
  chart.pieces = 2;
  chart.domain = {Axis{-reach, reach, false}};
  chart.jet = [alpha](const Vec& u, int piece) {
    const double sign = piece == 0 ? 1.0 : -1.0;
    const double t = u[0];
    const double e = sign * std::exp(t);
    const double c = std::cos(alpha * t), s = std::sin(alpha * t);
    ChartJet jet = make_jet(2, 1);
    jet.position << e * c, e * s;
    jet.first.col(0) << e * (c - alpha * s), e * (s + alpha * c);
    const double a2 = 1.0 - alpha * alpha;
    jet.second.col(0) << e * (a2 * c - 2.0 * alpha * s), e * (a2 * s + 2.0 * alpha * c);
    return jet;
  };
  const double stretch = std::sqrt(1.0 + alpha * alpha);
  const double inner = 2.0 * stretch * std::exp(-reach) / std::sqrt(4.0 * std::numbers::pi * kTailTimeMin);
  const double outer = stretch * std::erfc(std::exp(reach) / std::sqrt(4.0 * kTailTimeMax));
  chart.tail_bound = inner + outer;
  std::ostringstream note;
  note << "spiral parameter truncated to [-" << reach << ", " << reach << "]; radii in [e^-" << reach
       << ", e^" << reach << "]";
  chart.truncation_note = note.str();
  chart.default_resolution = {1200};
  return from_jet(chart);
}

}  // namespace detail

inline std::vector<std::string> catalog_names() {
  return {"plane_patch", "sphere", "cylinder", "clifford_torus", "veronese", "loxodrome", "ellipse"};
}

// Parameters per entry:
//   plane_patch  n, half_width[, N]   sphere     n, R
//   cylinder     R[, half_length]     clifford_torus  scale
//   veronese     scale                loxodrome  alpha[, T0]
//   ellipse      a, b
inline ChartSpec catalog_make(const std::string& name, const std::vector<double>& params) {
  if (name == "plane_patch") return detail::plane_patch(params);
  if (name == "sphere") return detail::sphere(params);
  if (name == "cylinder") return detail::cylinder(params);
  if (name == "clifford_torus") return detail::clifford_torus(params);
  if (name == "veronese") return detail::veronese(params);
  if (name == "loxodrome") return detail::loxodrome(params);
  if (name == "ellipse") return detail::ellipse(params);
  if (name == "lattice_torus")
    throw ValidationError(
        "lattice_torus is not available as an embedded surface; use the lattice_bound evaluator");
  throw ValidationError("unknown catalog entry '" + name + "'");
}

// Sigma x R^{2m} inside R^{N+2m}, each plane factor truncated to [-half_width, half_width].
inline ChartSpec product_with_plane(const ChartSpec& chart, int m, double half_width) {
  if (m < 1) throw ValidationError("product_with_plane: m must be at least 1");
  if (m > 2) throw ValidationError("product_with_plane: m > 2 is not supported");
  detail::require_positive(half_width, "product_with_plane half width");
  if (!chart.jet) throw ValidationError("product_with_plane: base chart needs analytic derivatives");

  const int n = chart.intrinsic_dim;
  const int N = chart.ambient_dim;
  const int extra = 2 * m;
  ChartSpec out = chart;
  out.name = chart.name + "_x_R" + std::to_string(extra);
  out.intrinsic_dim = n + extra;
  out.ambient_dim = N + extra;
  for (int i = 0; i < extra; ++i) out.domain.push_back(Axis{-half_width, half_width, false});
  auto base = chart.jet;
  out.jet = [base, n, N, extra](const Vec& u, int piece) {
    const ChartJet inner = base(u.head(n), piece);
    const int dim = n + extra;
    ChartJet jet = detail::make_jet(N + extra, dim);
    jet.position.head(N) = inner.position;
    jet.position.tail(extra) = u.tail(extra);
    jet.first.topLeftCorner(N, n) = inner.first;
    for (int i = 0; i < extra; ++i) jet.first(N + i, n + i) = 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) jet.second.col(i * dim + j).head(N) = inner.second.col(i * n + j);
    return jet;
  };
  out.embed = [base, n, N, extra](const Vec& u, int piece) {
    Vec x(N + extra);
    x.head(N) = base(u.head(n), piece).position;
    x.tail(extra) = u.tail(extra);
    return x;
  };
  std::ostringstream note;
  note << (chart.truncation_note.empty() ? "" : chart.truncation_note + "; ") << "R^" << extra
       << " factor truncated to [-" << half_width << ", " << half_width << "]^" << extra;
  out.truncation_note = note.str();
  out.default_resolution = chart.default_resolution;
  for (int i = 0; i < extra; ++i) out.default_resolution.push_back(400);
  return out;
}

// Ambient similarity x -> scale * rotation * x + shift applied to a chart.
inline ChartSpec transform_chart(const ChartSpec& chart, const Mat& rotation, const Vec& shift,
                                 double scale) {
  detail::require_positive(scale, "transform scale");
  const auto N = chart.ambient_dim;
  if (rotation.rows() != N || rotation.cols() != N || shift.size() != N)
    throw ValidationError("transform_chart: rotation/shift do not match the ambient dimension");
  if (!(rotation.transpose() * rotation).isIdentity(1e-10))
    throw ValidationError("transform_chart: rotation is not orthogonal");
  ChartSpec out = chart;
  const Mat linear = scale * rotation;
  auto base_embed = chart.embed;
  out.embed = [base_embed, linear, shift](const Vec& u, int piece) -> Vec {
    return linear * base_embed(u, piece) + shift;
  };
  if (chart.jet) {
    auto base_jet = chart.jet;
    out.jet = [base_jet, linear, shift](const Vec& u, int piece) {
      ChartJet jet = base_jet(u, piece);
      jet.position = linear * jet.position + shift;
      jet.first = linear * jet.first;
      jet.second = linear * jet.second;
      return jet;
    };
  }
  // tail mass of the Gaussian density is scale invariant only up to the time window
  out.tail_bound = chart.tail_bound;
  return out;
}

}  // namespace shrinkerlab
