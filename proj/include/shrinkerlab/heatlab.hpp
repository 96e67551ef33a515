#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "shrinkerlab/errors.hpp"
#include "shrinkerlab/quadrature.hpp"
#include "shrinkerlab/weights.hpp"

namespace shrinkerlab {

// Positive density on the uniform grid [-L, L]^N, N in {1, 2}, with `points`
// nodes per axis including both ends. Node (i, j) is stored at j * points + i.
struct GridDensity {
  int dim = 1;
  double L = 1.0;
  int points = 0;
  double h = 0.0;
  std::vector<double> values;
  // Nodes per side whose values are affected by convolution near the boundary.
  int reliable_margin = 0;

  double coord(int i) const { return -L + i * h; }
  std::size_t size() const { return values.size(); }
  double cell() const { return dim == 1 ? h : h * h; }
  double mass() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * cell();
  }
  double peak() const { return *std::max_element(values.begin(), values.end()); }
  double at(int i, int j = 0) const { return values[static_cast<std::size_t>(j) * points + i]; }

  // Largest ratio of a boundary-node value to the peak.
  double boundary_ratio() const {
    double worst = 0.0;
    const int n = points;
    auto visit = [&](int i, int j = 0) { worst = std::max(worst, at(i, j)); };
    if (dim == 1) {
      visit(0);
      visit(n - 1);
    } else {
      for (int k = 0; k < n; ++k) {
        visit(k, 0);
        visit(k, n - 1);
        visit(0, k);
        visit(n - 1, k);
      }
    }
    return worst / peak();
  }
};

namespace detail {

inline void check_grid(int N, double L, int points) {
  if (N != 1 && N != 2) throw ValidationError("grid dimension must be 1 or 2");
  if (!(L > 0.0)) throw ValidationError("grid extent L must be positive");
  if (points < 16) throw ValidationError("grid needs at least 16 points per axis");
}

inline void clamp_positive(std::vector<double>& values) {
  for (double& v : values) v = std::max(v, DBL_MIN);
}

inline void normalize(GridDensity& u) {
  const double mass = u.mass();
  if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericError("density has no finite positive mass");
  for (double& v : u.values) v /= mass;
  clamp_positive(u.values);
}

}  // namespace detail

// Samples f(x) (x in R^N) on the grid; optionally rescales to discrete mass 1.
inline GridDensity sample_density(int N, double L, int points,
                                  const std::function<double(const Eigen::VectorXd&)>& f,
                                  bool normalize = true) {
  detail::check_grid(N, L, points);
  GridDensity u;
  u.dim = N;
  u.L = L;
  u.points = points;
  u.h = 2.0 * L / (points - 1);
  u.values.resize(N == 1 ? points : static_cast<std::size_t>(points) * points);
  Eigen::VectorXd x(N);
  for (int j = 0; j < (N == 1 ? 1 : points); ++j)
    for (int i = 0; i < points; ++i) {
      x[0] = u.coord(i);
      if (N == 2) x[1] = u.coord(j);
      u.values[static_cast<std::size_t>(j) * points + i] = f(x);
    }
  if (normalize)
    detail::normalize(u);
  else
    detail::clamp_positive(u.values);
  return u;
}

// Chat_{N,m} What^N_{N+m,rho}: a unit-mass density with virtual time rho. Throws
// ValidationError if the grid does not resolve it (h > sqrt(rho)/10) and
// NumericError if more than tail_tolerance of its mass lies outside the grid.
inline GridDensity density_from_weight(int N, int m, double rho, double L, int points,
                                       double tail_tolerance = 1e-4) {
  if (m < 0 || !(rho > 0.0)) throw ValidationError("density_from_weight: need m >= 0 and rho > 0");
  detail::check_grid(N, L, points);
  const double h = 2.0 * L / (points - 1);
  if (h > std::sqrt(rho) / 10.0) throw ValidationError("density_from_weight: grid spacing exceeds sqrt(rho)/10");
  const double scale = c_hat(N, m);
  GridDensity u = sample_density(
      N, L, points,
      [&](const Eigen::VectorXd& x) { return scale * modified_weight_sq(N, N + m, rho, x.squaredNorm()); }, false);
  const double tail = 1.0 - u.mass();
  if (std::abs(tail) > tail_tolerance)
    throw NumericError("density_from_weight: mass outside the grid " + std::to_string(tail) +
                       " exceeds the tail tolerance");
  detail::normalize(u);
  return u;
}

inline GridDensity gaussian_density(int N, double t, const Eigen::VectorXd& center, double L, int points) {
  if (!(t > 0.0)) throw ValidationError("gaussian_density: t must be positive");
  if (center.size() != N) throw ValidationError("gaussian_density: center dimension mismatch");
  return sample_density(N, L, points, [&](const Eigen::VectorXd& x) {
    return gaussian_sq(N, t, (x - center).squaredNorm());
  });
}

struct MixtureComponent {
  double weight = 1.0;
  Eigen::VectorXd center;
  double t = 1.0;
};

inline GridDensity mixture_density(int N, const std::vector<MixtureComponent>& parts, double L, int points) {
  if (parts.empty()) throw ValidationError("mixture_density: no components");
  for (const auto& p : parts)
    if (!(p.weight > 0.0) || !(p.t > 0.0) || p.center.size() != N)
      throw ValidationError("mixture_density: invalid component");
  return sample_density(N, L, points, [&](const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const auto& p : parts) v += p.weight * gaussian_sq(N, p.t, (x - p.center).squaredNorm());
    return v;
  });
}

// Indicator of [-a, a]^N heated for time s (a smooth, log-concave bump).
inline GridDensity bump_density(int N, double a, double L, int points, double s = 0.01) {
  if (!(a > 0.0) || !(s > 0.0)) throw ValidationError("bump_density: need a > 0 and s > 0");
  const double r = std::sqrt(4.0 * s);
  return sample_density(N, L, points, [&](const Eigen::VectorXd& x) {
    double v = 1.0;
    for (int k = 0; k < N; ++k) v *= 0.5 * (std::erf((a - x[k]) / r) + std::erf((a + x[k]) / r));
    return v;
  });
}

// ---------------------------------------------------------------------------
// Heat flow.
// ---------------------------------------------------------------------------

namespace detail {

// One-axis convolution along stride-separated lines. Each source's sampled
// kernel is normalized over the grid, so mass is conserved exactly.
inline void convolve_axis(std::vector<double>& values, int points, int lines, std::size_t line_stride,
                          std::size_t step, const std::vector<double>& kernel, int reach) {
  std::vector<double> column_norm(points);
  for (int j = 0; j < points; ++j) {
    double sum = 0.0;
    for (int i = std::max(0, j - reach); i <= std::min(points - 1, j + reach); ++i) sum += kernel[std::abs(i - j)];
    column_norm[j] = sum;
  }
  std::vector<double> in(points), out(points);
  for (int line = 0; line < lines; ++line) {
    const std::size_t base = static_cast<std::size_t>(line) * line_stride;
    for (int i = 0; i < points; ++i) in[i] = values[base + i * step] / column_norm[i];
    for (int i = 0; i < points; ++i) {
      double sum = 0.0;
      const int lo = std::max(0, i - reach), hi = std::min(points - 1, i + reach);
      for (int j = lo; j <= hi; ++j) sum += kernel[std::abs(i - j)] * in[j];
      out[i] = sum;
    }
    for (int i = 0; i < points; ++i) values[base + i * step] = out[i];
  }
}

}  // namespace detail

// Kernel cut where it drops below e^{-800}: far enough that the cut is
// invisible even at nodes 1e-12 below the peak, where log-Hessians are read.
inline constexpr double kHeatKernelRadii = 40.0;

// U(t) = H(t) * u0 by separable direct summation.
inline GridDensity heat_at(const GridDensity& u0, double t) {
  if (!(t > 0.0)) throw ValidationError("heat_at: t must be positive");
  const double sigma = std::sqrt(2.0 * t);
  if (std::sqrt(t) > u0.L / 6.0) throw ValidationError("heat_at: sqrt(t) exceeds L/6, kernel not contained");
  if (sigma < u0.h) throw ValidationError("heat_at: kernel not resolved by the grid (sqrt(2t) < h)");
  const int reach = std::min(u0.points - 1, static_cast<int>(std::ceil(kHeatKernelRadii * sigma / u0.h)));
  std::vector<double> kernel(reach + 1);
  for (int k = 0; k <= reach; ++k) kernel[k] = std::exp(-(k * u0.h) * (k * u0.h) / (4.0 * t));

  GridDensity u = u0;
  const int n = u.points;
  if (u.dim == 1) {
    detail::convolve_axis(u.values, n, 1, 0, 1, kernel, reach);
  } else {
    detail::convolve_axis(u.values, n, n, n, 1, kernel, reach);  // along x, one line per row
    detail::convolve_axis(u.values, n, n, 1, n, kernel, reach);  // along y, one line per column
  }
  detail::clamp_positive(u.values);
  u.reliable_margin = std::min(n / 2, u0.reliable_margin + static_cast<int>(std::ceil(4.0 * sigma / u.h)));
  return u;
}

// ---------------------------------------------------------------------------
// Log-Hessian scans.
// ---------------------------------------------------------------------------

inline constexpr double kDensityFloor = 1e-12;

// Central-difference Hessian of log u at node (i, j).
inline Eigen::MatrixXd fd_log_hessian(const GridDensity& u, int i, int j = 0) {
  auto lg = [&](int a, int b) { return std::log(u.at(a, b)); };
  const double h2 = u.h * u.h;
  if (u.dim == 1) {
    Eigen::MatrixXd H(1, 1);
    H(0, 0) = (lg(i + 1, 0) - 2.0 * lg(i, 0) + lg(i - 1, 0)) / h2;
    return H;
  }
  Eigen::MatrixXd H(2, 2);
  H(0, 0) = (lg(i + 1, j) - 2.0 * lg(i, j) + lg(i - 1, j)) / h2;
  H(1, 1) = (lg(i, j + 1) - 2.0 * lg(i, j) + lg(i, j - 1)) / h2;
  H(0, 1) = H(1, 0) = (lg(i + 1, j + 1) - lg(i + 1, j - 1) - lg(i - 1, j + 1) + lg(i - 1, j - 1)) / (4.0 * h2);
  return H;
}

inline double min_eigenvalue(const Eigen::MatrixXd& H) {
  if (H.rows() == 1) return H(0, 0);
  const double mean = 0.5 * (H(0, 0) + H(1, 1));
  const double half_gap = 0.5 * (H(0, 0) - H(1, 1));
  return mean - std::sqrt(half_gap * half_gap + H(0, 1) * H(0, 1));
}

struct VirtualTimeEstimate {
  double tau = std::numeric_limits<double>::infinity();
  double min_eigenvalue = 0.0;
  int argmin_i = -1;
  int argmin_j = -1;
  double boundary_margin = 0.0;  // distance from the argmin node to the grid boundary
  int nodes_scanned = 0;
};

// Visits interior nodes at least max(3, reliable_margin) from the boundary
// whose 3^N stencil stays above kDensityFloor x peak.
inline void scan_interior(const GridDensity& u, const std::function<void(int, int)>& visit) {
  const double floor = kDensityFloor * u.peak();
  const int margin = std::max(3, u.reliable_margin);
  const int n = u.points;
  for (int j = (u.dim == 1 ? 0 : margin); j < (u.dim == 1 ? 1 : n - margin); ++j)
    for (int i = margin; i < n - margin; ++i) {
      bool above = true;
      for (int dj = (u.dim == 1 ? 0 : -1); dj <= (u.dim == 1 ? 0 : 1) && above; ++dj)
        for (int di = -1; di <= 1; ++di)
          if (u.at(i + di, j + dj) < floor) {
            above = false;
            break;
          }
      if (above) visit(i, j);
    }
}

// tau = -1 / (2 min eigenvalue of the log-Hessian) over scanned nodes, or +inf.
inline VirtualTimeEstimate estimate_virtual_time(const GridDensity& u) {
  VirtualTimeEstimate out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  scan_interior(u, [&](int i, int j) {
    ++out.nodes_scanned;
    const double lambda = min_eigenvalue(fd_log_hessian(u, i, j));
    if (lambda < out.min_eigenvalue) {
      out.min_eigenvalue = lambda;
      out.argmin_i = i;
      out.argmin_j = j;
    }
  });
  if (out.nodes_scanned == 0) throw NumericError("estimate_virtual_time: every node lies below the floor");
  if (out.min_eigenvalue < 0.0) out.tau = -1.0 / (2.0 * out.min_eigenvalue);
  const int n = u.points;
  int edge = std::min(out.argmin_i, n - 1 - out.argmin_i);
  if (u.dim == 2) edge = std::min({edge, out.argmin_j, n - 1 - out.argmin_j});
  out.boundary_margin = edge * u.h;
  return out;
}

// min over scanned nodes of (smallest log-Hessian eigenvalue of U(t) + 1/(2t)).
inline double check_harnack(const GridDensity& u0, double t) {
  const GridDensity u = heat_at(u0, t);
  double margin = std::numeric_limits<double>::infinity();
  scan_interior(u, [&](int i, int j) {
    margin = std::min(margin, min_eigenvalue(fd_log_hessian(u, i, j)) + 1.0 / (2.0 * t));
  });
  if (!std::isfinite(margin)) throw NumericError("check_harnack: every node lies below the floor");
  return margin;
}

// ---------------------------------------------------------------------------
// Mean-value inequality, virtual-time growth, long-time behaviour.
// ---------------------------------------------------------------------------

// omega_N^{-1} exp(1 / (4(N + 2))). The ball average of |x - x0|^2 / 4T over
// B_sqrt(T) is N / (4(N + 2)), so for N >= 2 pass sharp = true for the
// exponent that makes the bound hold.
inline double mean_value_constant(int N, bool sharp = false) {
  const double omega = sphere_area(N - 1) / N;
  return std::exp((sharp ? N : 1.0) / (4.0 * (N + 2))) / omega;
}

namespace detail {

// Linear interpolation along row j at abscissa x.
inline double interpolate(const GridDensity& u, double x, int j = 0) {
  const double s = (x + u.L) / u.h;
  const int i = std::clamp(static_cast<int>(std::floor(s)), 0, u.points - 2);
  const double f = s - i;
  return (1.0 - f) * u.at(i, j) + f * u.at(i + 1, j);
}

// Integral of the piecewise-linear interpolant of row j over [a, b].
inline double row_integral(const GridDensity& u, int j, double a, double b) {
  const int first = static_cast<int>(std::ceil((a + u.L) / u.h));
  const int last = static_cast<int>(std::floor((b + u.L) / u.h));
  if (first > last) return 0.5 * (interpolate(u, a, j) + interpolate(u, b, j)) * (b - a);
  double sum = 0.0;
  for (int i = first; i < last; ++i) sum += 0.5 * (u.at(i, j) + u.at(i + 1, j)) * u.h;
  sum += 0.5 * (interpolate(u, a, j) + u.at(first, j)) * (u.coord(first) - a);
  sum += 0.5 * (u.at(last, j) + interpolate(u, b, j)) * (b - u.coord(last));
  return sum;
}

inline double ball_integral(const GridDensity& u, const Eigen::VectorXd& center, double radius) {
  if (u.dim == 1) return row_integral(u, 0, center[0] - radius, center[0] + radius);
  // y = cy + r sin(theta): the chord-length singularity becomes a smooth cos factor
  const auto rule = gauss_legendre(96, -0.5 * kPi, 0.5 * kPi);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double theta = rule.nodes[q];
    const double y = center[1] + radius * std::sin(theta);
    const double half = radius * std::cos(theta);
    const double s = (y + u.L) / u.h;
    const int j = std::clamp(static_cast<int>(std::floor(s)), 0, u.points - 2);
    const double f = s - j;
    const double a = center[0] - half, b = center[0] + half;
    const double chord = (1.0 - f) * row_integral(u, j, a, b) + f * row_integral(u, j + 1, a, b);
    sum += rule.weights[q] * chord * radius * std::cos(theta);
  }
  return sum;
}

inline double value_at(const GridDensity& u, const Eigen::VectorXd& x) {
  if (u.dim == 1) return interpolate(u, x[0]);
  // bilinear
  const double sx = (x[0] + u.L) / u.h, sy = (x[1] + u.L) / u.h;
  const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, u.points - 2);
  const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, u.points - 2);
  const double fx = sx - i, fy = sy - j;
  return (1 - fx) * (1 - fy) * u.at(i, j) + fx * (1 - fy) * u.at(i + 1, j) + (1 - fx) * fy * u.at(i, j + 1) +
         fx * fy * u.at(i + 1, j + 1);
}

}  // namespace detail

// min over samples of C0 T^{-N/2} int_{B_sqrt(T)(x0)} u - u(x0).
inline double check_meanvalue_bound(const GridDensity& u, double T, const std::vector<Eigen::VectorXd>& samples,
                                    bool sharp_constant = false) {
  if (!(T > 0.0)) throw ValidationError("check_meanvalue_bound: T must be positive");
  if (samples.empty()) throw ValidationError("check_meanvalue_bound: no sample points");
  const double radius = std::sqrt(T);
  const double c0 = mean_value_constant(u.dim, sharp_constant);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& x : samples) {
    if (x.size() != u.dim) throw ValidationError("check_meanvalue_bound: sample dimension mismatch");
    for (int k = 0; k < u.dim; ++k)
      if (std::abs(x[k]) + radius > u.L) throw ValidationError("check_meanvalue_bound: ball leaves the grid");
    const double average = c0 * std::pow(T, -0.5 * u.dim) * detail::ball_integral(u, x, radius);
    margin = std::min(margin, average - detail::value_at(u, x));
  }
  return margin;
}

struct TauGrowth {
  double time = 0.0;
  double tau = 0.0;
  double margin = 0.0;  // tau - (tau0 + time)
};

inline std::vector<TauGrowth> check_tau_growth(const GridDensity& u0, double tau0, const std::vector<double>& times) {
  if (!(tau0 > 0.0)) throw ValidationError("check_tau_growth: tau0 must be positive");
  std::vector<TauGrowth> out;
  for (double t : times) {
    const auto est = estimate_virtual_time(heat_at(u0, t));
    out.push_back({t, est.tau, est.tau - (tau0 + t)});
  }
  return out;
}

struct MomentMatch {
  double T0 = 0.0;
  Eigen::VectorXd x0;
};

// x0 = discrete mean, T0 = t - m2 / (2N) with m2 the centered second moment.
inline MomentMatch moment_match(const GridDensity& u, double t) {
  const int N = u.dim;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(N);
  double mass = 0.0;
  for (int j = 0; j < (N == 1 ? 1 : u.points); ++j)
    for (int i = 0; i < u.points; ++i) {
      const double v = u.at(i, j);
      mass += v;
      mean[0] += v * u.coord(i);
      if (N == 2) mean[1] += v * u.coord(j);
    }
  mean /= mass;
  double m2 = 0.0;
  for (int j = 0; j < (N == 1 ? 1 : u.points); ++j)
    for (int i = 0; i < u.points; ++i) {
      double d2 = (u.coord(i) - mean[0]) * (u.coord(i) - mean[0]);
      if (N == 2) d2 += (u.coord(j) - mean[1]) * (u.coord(j) - mean[1]);
      m2 += u.at(i, j) * d2;
    }
  m2 /= mass;
  return {t - m2 / (2.0 * N), mean};
}

struct GaussianDistance {
  double l1 = 0.0;
  double scaled_sup = 0.0;
};

// Distances from u to H(t - T0, ., x0): discrete L1 and t^{N/2} times sup.
inline GaussianDistance gaussian_distance(const GridDensity& u, double t, double T0, const Eigen::VectorXd& x0) {
  if (!(t > T0)) throw ValidationError("gaussian_distance: need t > T0");
  if (x0.size() != u.dim) throw ValidationError("gaussian_distance: x0 dimension mismatch");
  const double s = t - T0;
  GaussianDistance out;
  double sup = 0.0;
  Eigen::VectorXd x(u.dim);
  for (int j = 0; j < (u.dim == 1 ? 1 : u.points); ++j)
    for (int i = 0; i < u.points; ++i) {
      x[0] = u.coord(i);
      if (u.dim == 2) x[1] = u.coord(j);
      const double diff = std::abs(u.at(i, j) - gaussian_sq(u.dim, s, (x - x0).squaredNorm()));
      out.l1 += diff;
      sup = std::max(sup, diff);
    }
  out.l1 *= u.cell();
  out.scaled_sup = std::pow(t, 0.5 * u.dim) * sup;
  return out;
}

}  // namespace shrinkerlab
