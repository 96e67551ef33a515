#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "shrinkerlab/catalog.hpp"
#include "shrinkerlab/errors.hpp"
#include "shrinkerlab/manifold.hpp"
#include "shrinkerlab/optimize.hpp"
#include "shrinkerlab/quadrature.hpp"
#include "shrinkerlab/weights.hpp"

namespace shrinkerlab {

struct OptimizerConfig {
  double scale_min = 0.02;
  double scale_max = 50.0;
  int scale_points = 40;
  double center_pad = 2.0;
  int grid_per_axis = 5;     // used when N <= 3
  int random_centers = 200;  // used when N > 3
  int refine_starts = 5;
  int max_iterations = 200;
  double tol = 1e-9;
  unsigned seed = 0;
  int threads = 0;  // 0: SHRINKERLAB_THREADS or 1
  bool record_scan = false;
  // A probe of natural length l (sqrt t, 1/rho or sqrt rho) is discarded when a
  // node within 3l of its nearest node has spacing above l / nodes_per_length.
  // 0 disables the guard.
  double nodes_per_length = 2.0;

  void validate() const {
    if (!(scale_min > 0.0) || !(scale_max > scale_min) || scale_points < 2)
      throw ValidationError("optimizer: scale grid needs 0 < min < max and at least 2 points");
    if (center_pad < 0.0 || grid_per_axis < 1 || random_centers < 0 || refine_starts < 0 ||
        max_iterations < 0 || !(tol > 0.0) || nodes_per_length < 0.0)
      throw ValidationError("optimizer: invalid configuration");
  }
};

struct ScanRecord {
  Vec center;
  double scale = 0.0;
  double value = 0.0;
};

struct FunctionalResult {
  double value = 0.0;
  Vec center;
  double scale = 0.0;
  int n_starts = 0;
  bool converged = false;
  double refinement_gap = 0.0;
  long evaluations = 0;
  std::vector<ScanRecord> scan;  // coarse probes, only when record_scan is set
};

// ---------------------------------------------------------------------------
// Integrals over a sampled manifold.
// ---------------------------------------------------------------------------

inline Eigen::ArrayXd squared_distances(const SampledManifold& s, const Vec& center) {
  if (center.size() != s.ambient_dim) throw ValidationError("center has the wrong dimension");
  return (s.positions.colwise() - center).colwise().squaredNorm().transpose().array();
}

namespace detail {

// Per-node contributions weight(x_k) dA_k; the integrals are their sums.
inline Eigen::ArrayXd gaussian_terms(const SampledManifold& s, const Eigen::ArrayXd& d2, double t) {
  const double prefactor = std::pow(4.0 * kPi * t, -0.5 * s.intrinsic_dim);
  return prefactor * (-d2 / (4.0 * t)).exp() * s.area.array();
}

inline Eigen::ArrayXd conformal_terms(const SampledManifold& s, const Eigen::ArrayXd& d2, double M,
                                      double rho) {
  const Eigen::ArrayXd base = rho / (1.0 + 0.25 * rho * rho * d2);
  return base.pow(M) * s.area.array();
}

inline Eigen::ArrayXd modified_terms(const SampledManifold& s, const Eigen::ArrayXd& d2, double M,
                                     double rho) {
  const double prefactor = std::pow(4.0 * kPi * rho, -0.5 * s.intrinsic_dim);
  const Eigen::ArrayXd decay = (M * (d2 / (4.0 * M * rho)).log1p()).exp();
  return prefactor * s.area.array() / decay;
}

inline double gaussian_sum(const SampledManifold& s, const Eigen::ArrayXd& d2, double t) {
  return gaussian_terms(s, d2, t).sum();
}

inline double conformal_sum(const SampledManifold& s, const Eigen::ArrayXd& d2, double M, double rho) {
  return conformal_terms(s, d2, M, rho).sum();
}

inline double modified_sum(const SampledManifold& s, const Eigen::ArrayXd& d2, double M, double rho) {
  return modified_terms(s, d2, M, rho).sum();
}

}  // namespace detail

inline double gaussian_density_at(const SampledManifold& s, const Vec& center, double t) {
  if (!(t > 0.0)) throw ValidationError("gaussian_density_at: t must be positive");
  return detail::gaussian_sum(s, squared_distances(s, center), t);
}

inline double conformal_integral(const SampledManifold& s, double M, double rho, const Vec& center) {
  if (!(rho > 0.0) || !(M > 0.0)) throw ValidationError("conformal_integral: M, rho must be positive");
  return detail::conformal_sum(s, squared_distances(s, center), M, rho);
}

// sum of What^n_{n+m,rho}(x - x0) dA with n the intrinsic dimension.
inline double modified_integral(const SampledManifold& s, int m, double rho, const Vec& center) {
  if (!(rho > 0.0) || m < 0) throw ValidationError("modified_integral: need rho > 0 and m >= 0");
  return detail::modified_sum(s, squared_distances(s, center), s.intrinsic_dim + m, rho);
}

// ---------------------------------------------------------------------------
// Multi-start supremum search over (center, scale).
// ---------------------------------------------------------------------------

// Objective as per-node contributions given squared distances to the center,
// plus the natural length attached to a scale (sizes the initial simplex).
struct ProbeObjective {
  std::function<Eigen::ArrayXd(const Eigen::ArrayXd& d2, double scale)> terms;
  std::function<double(double scale)> length;

  double value(const Eigen::ArrayXd& d2, double scale) const { return terms(d2, scale).sum(); }
};

inline bool probe_resolved(const SampledManifold& s, const Eigen::ArrayXd& d2, double length,
                           double nodes_per_length) {
  if (nodes_per_length <= 0.0 || s.spacing.size() != d2.size()) return true;
  const double reach = std::sqrt(d2.minCoeff()) + 3.0 * length;
  const double coarsest = (d2 <= reach * reach).select(s.spacing.array(), 0.0).maxCoeff();
  return coarsest * nodes_per_length <= length;
}

inline std::vector<Vec> coarse_centers(const SampledManifold& s, const OptimizerConfig& cfg) {
  const Vec lo = s.lower_corner().array() - cfg.center_pad;
  const Vec hi = s.upper_corner().array() + cfg.center_pad;
  const int N = s.ambient_dim;
  std::vector<Vec> centers{s.weighted_centroid()};
  if (N <= 3) {
    const int g = cfg.grid_per_axis;
    int total = 1;
    for (int i = 0; i < N; ++i) total *= g;
    for (int flat = 0; flat < total; ++flat) {
      Vec c(N);
      int rest = flat;
      for (int i = 0; i < N; ++i) {
        const int k = rest % g;
        rest /= g;
        c[i] = g == 1 ? 0.5 * (lo[i] + hi[i]) : lo[i] + (hi[i] - lo[i]) * k / (g - 1);
      }
      centers.push_back(c);
    }
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int r = 0; r < cfg.random_centers; ++r) {
      Vec c(N);
      for (int i = 0; i < N; ++i) c[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
      centers.push_back(c);
    }
  }
  return centers;
}

inline std::vector<double> scale_grid(const OptimizerConfig& cfg) {
  std::vector<double> out(cfg.scale_points);
  const double a = std::log(cfg.scale_min), b = std::log(cfg.scale_max);
  for (int i = 0; i < cfg.scale_points; ++i) out[i] = std::exp(a + (b - a) * i / (cfg.scale_points - 1));
  return out;
}

inline FunctionalResult maximize_probe(const SampledManifold& s, const ProbeObjective& objective,
                                       const OptimizerConfig& cfg) {
  cfg.validate();
  const int threads = resolve_threads(cfg.threads);
  const auto centers = coarse_centers(s, cfg);
  const auto scales = scale_grid(cfg);
  const int n_centers = static_cast<int>(centers.size());
  const int n_scales = static_cast<int>(scales.size());

  std::vector<double> grid(static_cast<std::size_t>(n_centers) * n_scales);
  parallel_for(n_centers, threads, [&](int c) {
    const Eigen::ArrayXd d2 = squared_distances(s, centers[c]);
    for (int k = 0; k < n_scales; ++k)
      grid[c * n_scales + k] =
          probe_resolved(s, d2, objective.length(scales[k]), cfg.nodes_per_length)
              ? objective.value(d2, scales[k])
              : -HUGE_VAL;
  });

  FunctionalResult out;
  out.evaluations = static_cast<long>(grid.size());
  std::vector<int> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  // ties broken by index so the ranking is deterministic
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return grid[a] > grid[b]; });
  const int top = order.front();
  if (!std::isfinite(grid[top]))
    throw NumericError("no probe in the search window is resolved by the sampling; refine the resolution");
  out.value = grid[top];
  out.center = centers[top / n_scales];
  out.scale = scales[top % n_scales];
  if (cfg.record_scan) {
    out.scan.reserve(grid.size());
    for (int i = 0; i < static_cast<int>(grid.size()); ++i)
      if (std::isfinite(grid[i])) out.scan.push_back({centers[i / n_scales], scales[i % n_scales], grid[i]});
  }

  const int starts = std::min<int>(cfg.refine_starts, static_cast<int>(grid.size()));
  out.n_starts = starts;
  if (starts == 0) return out;

  const int N = s.ambient_dim;
  std::vector<NelderMeadResult> runs(starts);
  parallel_for(starts, threads, [&](int r) {
    const int idx = order[r];
    Vec start(N + 1), step(N + 1);
    start.head(N) = centers[idx / n_scales];
    const double scale = scales[idx % n_scales];
    start[N] = std::log(scale);
    step.head(N).setConstant(0.25 * objective.length(scale));
    step[N] = 0.25;
    auto f = [&](const Vec& p) {
      // the scale search is confined to the configured window; below it a probe
      // can resolve single quadrature nodes and report spurious mass
      const double sc = std::exp(p[N]);
      if (!(sc >= cfg.scale_min && sc <= cfg.scale_max)) return -HUGE_VAL;
      const Eigen::ArrayXd d2 = squared_distances(s, p.head(N));
      if (!probe_resolved(s, d2, objective.length(sc), cfg.nodes_per_length)) return -HUGE_VAL;
      return objective.value(d2, sc);
    };
    runs[r] = nelder_mead_max(f, start, step, cfg.max_iterations, cfg.tol);
  });

  int best_run = -1;
  for (int r = 0; r < starts; ++r) {
    out.evaluations += runs[r].evaluations;
    if (runs[r].value > out.value) {
      out.value = runs[r].value;
      best_run = r;
    }
  }
  if (best_run >= 0) {
    out.center = runs[best_run].argmax.head(N);
    out.scale = std::exp(runs[best_run].argmax[N]);
    out.converged = runs[best_run].converged;
  } else {
    // the coarse optimum was not improved; report whether its own run settled
    out.converged = runs.front().converged;
  }
  return out;
}

// ---------------------------------------------------------------------------
// The functionals.
// ---------------------------------------------------------------------------

enum class Functional { entropy, confvol, stabilized, vt_bound };

inline std::string functional_name(Functional f) {
  switch (f) {
    case Functional::entropy: return "entropy";
    case Functional::confvol: return "confvol";
    case Functional::stabilized: return "stable";
    case Functional::vt_bound: return "vtbound";
  }
  return "unknown";
}

// Multiplicative constant of each functional at stabilization index m.
inline double functional_prefactor(Functional f, const SampledManifold& s, int m) {
  const int n = s.intrinsic_dim, N = s.ambient_dim;
  switch (f) {
    case Functional::entropy: return 1.0;
    case Functional::confvol: return 1.0 / sphere_area(n);
    case Functional::stabilized: return c_hat(n, m);
    case Functional::vt_bound:
      if (m < N - n) throw ValidationError("vt_lower_bound: need m >= N - n");
      return c_hat(N, n - N + m);
  }
  return 1.0;
}

inline ProbeObjective make_objective(Functional f, const SampledManifold& s, int m) {
  if (m < 0) throw ValidationError("stabilization index m must be non-negative");
  const double pre = functional_prefactor(f, s, m);
  const int n = s.intrinsic_dim;
  ProbeObjective obj;
  switch (f) {
    case Functional::entropy:
      obj.terms = [&s](const Eigen::ArrayXd& d2, double t) { return detail::gaussian_terms(s, d2, t); };
      obj.length = [](double t) { return std::sqrt(t); };
      break;
    case Functional::confvol:
      obj.terms = [&s, n, pre](const Eigen::ArrayXd& d2, double rho) -> Eigen::ArrayXd {
        return pre * detail::conformal_terms(s, d2, n, rho);
      };
      obj.length = [](double rho) { return 1.0 / rho; };
      break;
    case Functional::stabilized:
    case Functional::vt_bound:
      obj.terms = [&s, n, m, pre](const Eigen::ArrayXd& d2, double rho) -> Eigen::ArrayXd {
        return pre * detail::modified_terms(s, d2, n + m, rho);
      };
      obj.length = [](double rho) { return std::sqrt(rho); };
      break;
  }
  return obj;
}

inline double functional_at(Functional f, const SampledManifold& s, int m, const Vec& center,
                            double scale) {
  if (!(scale > 0.0)) throw ValidationError("scale must be positive");
  return make_objective(f, s, m).value(squared_distances(s, center), scale);
}

inline FunctionalResult functional_sup(Functional f, const SampledManifold& s, int m,
                                       const OptimizerConfig& cfg) {
  return maximize_probe(s, make_objective(f, s, m), cfg);
}

// sup over (x0, t) of the Gaussian density.
inline FunctionalResult cm_entropy(const SampledManifold& s, const OptimizerConfig& cfg = {}) {
  return functional_sup(Functional::entropy, s, 0, cfg);
}

// sup over (x0, rho) of the n-th conformal weight integral divided by |S^n|.
inline FunctionalResult ly_confvol(const SampledManifold& s, const OptimizerConfig& cfg = {}) {
  return functional_sup(Functional::confvol, s, 0, cfg);
}

// Normalized conformal volume of Sigma x R^{2m}, evaluated on Sigma alone as
// Chat_{n,m} sup of the modified weight integral.
inline FunctionalResult stabilized_confvol(const SampledManifold& s, int m,
                                           const OptimizerConfig& cfg = {}) {
  return functional_sup(Functional::stabilized, s, m, cfg);
}

// Virtual-entropy lower bound from the unit-mass density Chat_{N,n-N+m} What^n_{n+m,rho}
// rescaled to time one; requires m >= N - n.
inline double vt_lower_bound(const SampledManifold& s, int m, double rho, const Vec& center) {
  return functional_at(Functional::vt_bound, s, m, center, rho);
}

inline FunctionalResult vt_lower_bound_sup(const SampledManifold& s, int m,
                                           const OptimizerConfig& cfg = {}) {
  return functional_sup(Functional::vt_bound, s, m, cfg);
}

struct StableEstimate {
  std::vector<int> m_values;
  std::vector<FunctionalResult> results;
  bool monotone = true;
  double worst_decrease = 0.0;  // largest value[i] - value[i+1], or 0
  double estimate = 0.0;        // last value: a lower bound for the stable limit
};

inline StableEstimate stable_confvol_estimate(const SampledManifold& s, const std::vector<int>& m_list,
                                              const OptimizerConfig& cfg = {}, double tolerance = 1e-6) {
  if (m_list.empty()) throw ValidationError("stable_confvol_estimate: empty m list");
  for (std::size_t i = 1; i < m_list.size(); ++i)
    if (m_list[i] <= m_list[i - 1]) throw ValidationError("stable_confvol_estimate: m list must increase");
  StableEstimate out;
  out.m_values = m_list;
  for (int m : m_list) out.results.push_back(stabilized_confvol(s, m, cfg));
  for (std::size_t i = 1; i < out.results.size(); ++i) {
    const double drop = out.results[i - 1].value - out.results[i].value;
    out.worst_decrease = std::max(out.worst_decrease, drop);
    if (drop > tolerance) out.monotone = false;
  }
  out.estimate = out.results.back().value;
  return out;
}

// ---------------------------------------------------------------------------
// Resolution refinement.
// ---------------------------------------------------------------------------

inline std::vector<int> halved_resolution(const std::vector<int>& res) {
  std::vector<int> out;
  for (int r : res) out.push_back(std::max(4, r / 2));
  return out;
}

// Runs the supremum search at `resolution` and re-evaluates the optimal probe at
// half resolution; refinement_gap = |difference| + the chart's tail bound.
inline FunctionalResult evaluate_functional(const ChartSpec& chart, Functional f, int m,
                                            const OptimizerConfig& cfg,
                                            std::vector<int> resolution = {},
                                            DerivativeMode mode = DerivativeMode::analytic) {
  if (resolution.empty()) resolution = chart.default_resolution;
  const SampledManifold full = build_samples(chart, resolution, mode);
  FunctionalResult out = functional_sup(f, full, m, cfg);
  const SampledManifold coarse = build_samples(chart, halved_resolution(resolution), mode);
  const double coarse_value = functional_at(f, coarse, m, out.center, out.scale);
  out.refinement_gap = std::abs(out.value - coarse_value) + chart.tail_bound;
  return out;
}

// ---------------------------------------------------------------------------
// Cross-checks.
// ---------------------------------------------------------------------------

struct IterateCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_gap() const { return std::abs(lhs - rhs) / std::abs(rhs); }
};

// Symmetric rule on [-L, L] from Gauss-Legendre panels whose widths double
// away from the origin, starting at `first`.
inline QuadratureRule graded_rule(double first, double L, int per_panel = 16) {
  std::vector<double> edges{0.0};
  for (double e = first; e < L; e *= 2.0) edges.push_back(e);
  edges.push_back(L);
  QuadratureRule out;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const auto panel = gauss_legendre(per_panel, edges[p], edges[p + 1]);
    for (std::size_t i = 0; i < panel.nodes.size(); ++i)
      for (double sign : {-1.0, 1.0}) {
        out.nodes.push_back(sign * panel.nodes[i]);
        out.weights.push_back(panel.weights[i]);
      }
  }
  return out;
}

// Integral of W^{M+2}_rho centered at (y0, 0) over Sigma x [-L, L]^2, computed as a
// tensor product of the chart quadrature and a graded rule on each plane axis,
// against (C_{M,1} / rho) * integral over Sigma of W^{M+1}_rho centered at y0.
inline IterateCheck iterate_check(const ChartSpec& chart, int M, double rho, const Vec& y0,
                                  double half_width, std::vector<int> resolution = {}) {
  if (M < 1) throw ValidationError("iterate_check: M must be a positive integer");
  if (!(rho > 0.0)) throw ValidationError("iterate_check: rho must be positive");
  if (!(half_width > 0.0)) throw ValidationError("iterate_check: half width must be positive");
  if (resolution.empty()) resolution = chart.default_resolution;
  const SampledManifold base = build_samples(chart, resolution);
  const Eigen::ArrayXd d2 = squared_distances(base, y0);
  const QuadratureRule z = graded_rule(std::min(0.5, 0.5 / rho), half_width);

  const std::size_t nz = z.nodes.size();
  std::vector<double> plane_sq, plane_w;
  plane_sq.reserve(nz * nz);
  plane_w.reserve(nz * nz);
  for (std::size_t i = 0; i < nz; ++i)
    for (std::size_t j = 0; j < nz; ++j) {
      plane_sq.push_back(z.nodes[i] * z.nodes[i] + z.nodes[j] * z.nodes[j]);
      plane_w.push_back(z.weights[i] * z.weights[j]);
    }

  const double q = 0.25 * rho * rho;
  IterateCheck out;
  for (Eigen::Index k = 0; k < base.size(); ++k) {
    double fiber = 0.0;
    for (std::size_t p = 0; p < plane_sq.size(); ++p) {
      const double b = rho / (1.0 + q * (d2[k] + plane_sq[p]));
      double w = b;
      for (int e = 1; e < M + 2; ++e) w *= b;
      fiber += plane_w[p] * w;
    }
    out.lhs += base.area[k] * fiber;
  }
  out.rhs = c_const(M, 1) / rho * detail::conformal_sum(base, d2, M + 1, rho);
  return out;
}

// Unit n-ball volume |S^{n-1}| / n.
inline double unit_ball_volume(int n) { return sphere_area(n - 1) / n; }

struct AreaProbe {
  Vec center;
  double radius = 1.0;
};

inline double area_in_ball(const SampledManifold& s, const AreaProbe& probe) {
  if (!(probe.radius > 0.0)) throw ValidationError("area ratio probe radius must be positive");
  const Eigen::ArrayXd d2 = squared_distances(s, probe.center);
  return (d2 < probe.radius * probe.radius).select(s.area.array(), 0.0).sum();
}

// max over probes of |Sigma in B_R(p)| / (omega_n R^n).
inline double area_ratio_theta(const SampledManifold& s, const std::vector<AreaProbe>& probes) {
  if (probes.empty()) throw ValidationError("area_ratio_theta: no probes");
  double best = 0.0;
  for (const auto& p : probes)
    best = std::max(best, area_in_ball(s, p) /
                              (unit_ball_volume(s.intrinsic_dim) * std::pow(p.radius, s.intrinsic_dim)));
  return best;
}

// Functional value before and after an ambient similarity.
inline std::pair<double, double> invariance_check(const ChartSpec& chart, const Mat& rotation,
                                                  const Vec& translation, double scale, Functional f,
                                                  const OptimizerConfig& cfg = {},
                                                  std::vector<int> resolution = {}) {
  if (f != Functional::entropy && f != Functional::confvol)
    throw ValidationError("invariance_check: functional must be entropy or confvol");
  if (resolution.empty()) resolution = chart.default_resolution;
  const ChartSpec moved = transform_chart(chart, rotation, translation, scale);
  const double before = functional_sup(f, build_samples(chart, resolution), 0, cfg).value;
  const double after = functional_sup(f, build_samples(moved, resolution), 0, cfg).value;
  return {before, after};
}

}  // namespace shrinkerlab
