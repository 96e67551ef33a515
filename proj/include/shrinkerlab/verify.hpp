#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shrinkerlab/catalog.hpp"
#include "shrinkerlab/flow.hpp"
#include "shrinkerlab/functionals.hpp"
#include "shrinkerlab/heatlab.hpp"
#include "shrinkerlab/weights.hpp"

namespace shrinkerlab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0: none
};

namespace detail {

class Ledger {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) ok_ = false;
    if (!out_.str().empty()) out_ << "; ";
    out_ << (ok ? "" : "FAIL ") << what;
  }
  bool ok() const { return ok_; }
  std::string str() const { return out_.str(); }

 private:
  bool ok_ = true;
  std::ostringstream out_;
};

inline std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

inline SampledManifold catalog_samples(const std::string& name, const std::vector<double>& params) {
  const auto chart = catalog_make(name, params);
  return build_samples(chart, chart.default_resolution);
}

// Fourth-order central stencil for d^2 f / dx_i dx_j.
inline double fd4_hessian_entry(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                int i, int j, double h) {
  if (i == j) {
    auto at = [&](double s) {
      Eigen::VectorXd y = x;
      y[i] += s * h;
      return f(y);
    };
    return (-at(2) + 16 * at(1) - 30 * at(0) + 16 * at(-1) - at(-2)) / (12 * h * h);
  }
  const double c[4] = {1, -8, 8, -1};
  const double s[4] = {-2, -1, 1, 2};
  double sum = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      Eigen::VectorXd y = x;
      y[i] += s[a] * h;
      y[j] += s[b] * h;
      sum += c[a] * c[b] * f(y);
    }
  return sum / (144 * h * h);
}

inline const double kCircleEntropy = std::sqrt(2.0 * kPi / std::numbers::e);
inline const double kSphereEntropy = 4.0 / std::numbers::e;
inline const double kVeroneseEntropy = 6.0 / std::numbers::e;

}  // namespace detail

// ---------------------------------------------------------------------------
// Criteria. Each returns its own pass flag plus the measured values.
// ---------------------------------------------------------------------------

inline CriterionResult criterion_sphere_entropies(const OptimizerConfig& cfg) {
  CriterionResult r{1, "sphere entropies", false, "", 0.0, 30.0};
  detail::Ledger led;
  const std::pair<double, double> cases[] = {{1, detail::kCircleEntropy}, {2, detail::kSphereEntropy}};
  for (const auto& [n, target] : cases) {
    const auto start = std::chrono::steady_clock::now();
    const double R = n == 1 ? std::sqrt(2.0) : 2.0;
    const double value = cm_entropy(detail::catalog_samples("sphere", {n, R}), cfg).value;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    led.check(std::abs(value - target) <= 1e-3 && secs <= 30.0,
              "S" + std::to_string(int(n)) + " " + detail::fmt(value) + " vs " + detail::fmt(target) + " (" +
                  detail::fmt(secs, 3) + " s)");
  }
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline CriterionResult criterion_veronese(const OptimizerConfig& cfg) {
  CriterionResult r{2, "Veronese shrinker", false, "", 0.0, 300.0};
  detail::Ledger led;
  const auto samples = detail::catalog_samples("veronese", {2});
  const double cm = cm_entropy(samples, cfg).value;
  const double ly = ly_confvol(samples, cfg).value;
  led.check(std::abs(cm - detail::kVeroneseEntropy) <= 5e-3, "entropy " + detail::fmt(cm) + " vs 6/e");
  led.check(std::abs(ly - 1.5) <= 5e-3, "conformal volume " + detail::fmt(ly) + " vs 3/2");
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline CriterionResult criterion_loxodromes(const OptimizerConfig& cfg) {
  CriterionResult r{3, "loxodrome closed form", false, "", 0.0, 120.0};
  detail::Ledger led;
  for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
    const auto samples = detail::catalog_samples("loxodrome", {alpha});
    const double target = std::sqrt(1 + alpha * alpha);
    const double cm = cm_entropy(samples, cfg).value;
    const double ly = ly_confvol(samples, cfg).value;
    led.check(std::abs(cm - target) <= 1e-2 && std::abs(ly - target) <= 1e-2,
              "alpha " + detail::fmt(alpha) + ": " + detail::fmt(cm) + ", " + detail::fmt(ly) + " vs " +
                  detail::fmt(target));
  }
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline CriterionResult criterion_iterate() {
  CriterionResult r{4, "iterate identity", false, "", 0.0, 120.0};
  const auto circle = catalog_make("sphere", {1, 1});
  const auto segment = catalog_make("plane_patch", {1, 1});
  double worst = 0.0;
  for (int M : {1, 2})
    for (double rho : {0.5, 1.0, 2.0})
      for (const auto* chart : {&circle, &segment})
        worst = std::max(worst, iterate_check(*chart, M, rho, Vec::Zero(2), 200.0).relative_gap());
  r.passed = worst <= 1e-4;
  r.detail = "max relative gap " + detail::fmt(worst, 3);
  return r;
}

inline CriterionResult criterion_constants() {
  CriterionResult r{5, "stabilization constants", false, "", 0.0, 0.0};
  detail::Ledger led;
  bool increasing = true;
  for (int n = 1; n <= 6; ++n)
    for (int m = 0; m < 400; ++m)
      if (!(c_hat(n, m + 1) > c_hat(n, m))) increasing = false;
  led.check(increasing, "Chat_{n,m} strictly increasing for n <= 6, m < 400");
  led.check(c_hat(2, 0) == 0.5, "Chat_{2,0} = " + detail::fmt(c_hat(2, 0), 17));
  led.check(std::abs(c_hat(2, 10000) - 1.0) <= 1e-3, "Chat_{2,10^4} = " + detail::fmt(c_hat(2, 10000), 12));
  double worst = 0.0;
  for (int M = 1; M <= 6; ++M)
    for (int m = 0; m <= 6; ++m)
      worst = std::max(worst, std::abs(c_const(M, m) / c_const_from_spheres(M, m) - 1.0));
  led.check(worst <= 1e-12, "C_{M,m} routes agree to " + detail::fmt(worst, 3));
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline CriterionResult criterion_weight_chain(unsigned seed = 7) {
  CriterionResult r{6, "pointwise weight chain", false, "", 0.0, 0.0};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 40.0), scale(0.02, 50.0);
  std::uniform_int_distribution<int> dim(1, 4), idx(0, 30);
  int violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = dim(rng), m = idx(rng);
    const double r2 = dist(rng) * dist(rng), rho = scale(rng);
    const double g = gaussian_sq(n, rho, r2);
    const double next = modified_weight_sq(n, n + m + 1, rho, r2);
    const double current = modified_weight_sq(n, n + m, rho, r2);
    if (g > next * (1 + 1e-12) || next > current * (1 + 1e-12)) ++violations;
  }
  r.passed = violations == 0;
  r.detail = std::to_string(violations) + " violations in 10000 samples";
  return r;
}

inline CriterionResult criterion_hessian(unsigned seed = 3) {
  CriterionResult r{7, "closed-form Hessian", false, "", 0.0, 0.0};
  detail::Ledger led;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double M = 1 + trial % 4, rho = 0.5 + 0.25 * (trial % 7);
    Eigen::VectorXd x(3);
    x << coord(rng), coord(rng), coord(rng);
    auto logw = [&](const Eigen::VectorXd& y) { return std::log(conformal_weight_sq(M, rho, y.squaredNorm())); };
    const Eigen::MatrixXd exact = log_hessian_weight(M, rho, x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        worst = std::max(worst, std::abs(detail::fd4_hessian_entry(logw, x, i, j, 1e-3) - exact(i, j)));
  }
  led.check(worst <= 1e-6, "max FD error " + detail::fmt(worst, 3));
  const auto w = sample_density(
      1, 30.0, 4096, [](const Eigen::VectorXd& y) { return conformal_weight_sq(2, 1, y.squaredNorm()); }, false);
  const double tau_w = estimate_virtual_time(w).tau;
  led.check(std::abs(tau_w - 0.5) <= 0.02 * 0.5, "tau(W^2_1) " + detail::fmt(tau_w) + " vs 1/2");
  const double tau_what = estimate_virtual_time(density_from_weight(1, 1, 1.0, 60.0, 4096)).tau;
  led.check(std::abs(tau_what - 1.0) <= 0.02, "tau(What, rho=1) " + detail::fmt(tau_what) + " vs 1");
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline CriterionResult criterion_harnack_growth() {
  CriterionResult r{8, "Harnack and virtual-time growth", false, "", 0.0, 180.0};
  detail::Ledger led;
  const int points = 4096;
  const auto bump = bump_density(1, 1.0, 40.0, points);
  double worst_harnack = HUGE_VAL;
  for (double t : {0.25, 0.5, 1.0, 2.0}) worst_harnack = std::min(worst_harnack, check_harnack(bump, t));
  led.check(worst_harnack >= -1e-3, "min Harnack margin " + detail::fmt(worst_harnack, 4));

  const std::vector<double> times = {0.5, 1.0, 2.0, 4.0};
  double worst_what = HUGE_VAL;
  for (const auto& g : check_tau_growth(density_from_weight(1, 1, 1.0, 60.0, points), 1.0, times))
    worst_what = std::min(worst_what, g.margin / (1.0 + g.time));
  led.check(worst_what >= -0.02, "What growth margin / (tau0 + t) >= " + detail::fmt(worst_what, 4));

  double worst_gauss = 0.0;
  for (const auto& g : check_tau_growth(gaussian_density(1, 1.0, Eigen::VectorXd::Zero(1), 40.0, points), 1.0, times))
    worst_gauss = std::max(worst_gauss, std::abs(g.margin) / (1.0 + g.time));
  led.check(worst_gauss <= 0.02, "Gaussian |margin| / (tau0 + t) <= " + detail::fmt(worst_gauss, 4));
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline CriterionResult criterion_long_time() {
  CriterionResult r{9, "long-time convergence", false, "", 0.0, 0.0};
  detail::Ledger led;
  const auto u0 = density_from_weight(1, 1, 1.0, 60.0, 4096);
  GaussianDistance last{HUGE_VAL, HUGE_VAL};
  bool decreasing = true;
  std::ostringstream values;
  for (double t : {1.0, 4.0, 16.0}) {
    const auto u = heat_at(u0, t);
    const auto match = moment_match(u, t);
    const auto d = gaussian_distance(u, t, match.T0, match.x0);
    if (!(d.l1 < last.l1) || !(d.scaled_sup < last.scaled_sup)) decreasing = false;
    values << " t=" << t << ":(" << detail::fmt(d.l1, 3) << ", " << detail::fmt(d.scaled_sup, 3) << ")";
    last = d;
  }
  led.check(decreasing, "(l1, scaled sup)" + values.str());
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline CriterionResult criterion_flow(const OptimizerConfig& cfg) {
  CriterionResult r{10, "flow monotonicity", false, "", 0.0, 300.0};
  detail::Ledger led;
  FlowConfig fc;
  fc.optimizer = cfg;
  const auto ellipse = run_flow(ellipse_curve(2, 1, 256), 0.8, fc);
  led.check(ellipse.worst_increase() <= 2e-3, "ellipse largest increase " + detail::fmt(ellipse.worst_increase(), 3));
  const auto circle = run_flow(circle_curve(std::sqrt(2.0), 256), 0.9, fc);
  double worst = 0.0;
  for (const auto& e : circle.entropy) worst = std::max(worst, std::abs(e.value - detail::kCircleEntropy));
  led.check(worst <= 2e-3, "circle max deviation " + detail::fmt(worst, 3));
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline CriterionResult criterion_inequality_chain(const OptimizerConfig& cfg) {
  CriterionResult r{11, "inequality chain on shrinkers", false, "", 0.0, 0.0};
  detail::Ledger led;
  struct Case {
    std::string label, name;
    std::vector<double> params;
  };
  const std::vector<Case> cases = {
      {"S1", "sphere", {1, std::sqrt(2.0)}}, {"S2", "sphere", {2, 2}}, {"Veronese", "veronese", {2}}};
  for (const auto& c : cases) {
    const auto s = detail::catalog_samples(c.name, c.params);
    const double cm = cm_entropy(s, cfg).value;
    const double ly = ly_confvol(s, cfg).value;
    led.check(ly <= cm + 5e-3, c.label + " conformal volume " + detail::fmt(ly) + " <= entropy " + detail::fmt(cm));
    const auto stable = stable_confvol_estimate(s, {0, 1, 2, 5}, cfg);
    std::ostringstream seq;
    for (const auto& res : stable.results) seq << " " << detail::fmt(res.value);
    led.check(stable.monotone, c.label + " stabilized" + seq.str());
    const int codim = s.ambient_dim - s.intrinsic_dim;
    OptimizerConfig scan_cfg = cfg;
    scan_cfg.record_scan = true;
    double worst = -HUGE_VAL;
    for (int m : {codim, codim + 2, codim + 5}) {
      const auto vt = vt_lower_bound_sup(s, m, scan_cfg);
      worst = std::max(worst, vt.value);
      for (const auto& probe : vt.scan) worst = std::max(worst, probe.value);
    }
    led.check(worst <= cm + 1e-2, c.label + " max vt probe " + detail::fmt(worst));
  }
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline CriterionResult criterion_lattice() {
  CriterionResult r{12, "lattice bound evaluator", false, "", 0.0, 0.0};
  detail::Ledger led;
  const double rect = lattice_bound(0.0, std::sqrt(2.0));
  const double hex = lattice_bound(0.5, std::sqrt(3.0) / 2);
  const double y_rect = std::sqrt(2.0), y_hex = std::sqrt(3.0) / 2;
  led.check(rect == kPi * y_rect / (0.0 + y_rect * y_rect - 0.0 + 1.0), "rectangular " + detail::fmt(rect, 17));
  led.check(hex == kPi * y_hex / (0.25 + y_hex * y_hex - 0.5 + 1.0), "hexagonal " + detail::fmt(hex, 17));
  led.check(std::abs(rect - std::sqrt(2.0) * kPi / 3) <= 1e-15 && std::abs(hex - std::sqrt(3.0) * kPi / 3) <= 1e-15,
            "closed forms sqrt2 pi/3, sqrt3 pi/3");
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline CriterionResult criterion_area_ratios(const OptimizerConfig& cfg, unsigned seed = 13) {
  CriterionResult r{13, "area ratios", false, "", 0.0, 0.0};
  detail::Ledger led;
  struct Case {
    std::string name;
    std::vector<double> params;
  };
  const std::vector<Case> cases = {{"sphere", {1, std::sqrt(2.0)}}, {"sphere", {2, 2}},
                                   {"cylinder", {std::sqrt(2.0)}},   {"clifford_torus", {2}},
                                   {"veronese", {2}}};
  std::mt19937_64 rng(seed);
  for (const auto& c : cases) {
    const auto s = detail::catalog_samples(c.name, c.params);
    const double cm = cm_entropy(s, cfg).value;
    const Vec lo = s.lower_corner(), hi = s.upper_corner();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;  // largest |Sigma in B_R(p)| / (e^pi lambda R^n)
    for (int probe = 0; probe < 100; ++probe) {
      Vec p(s.ambient_dim);
      for (int k = 0; k < s.ambient_dim; ++k) p[k] = lo[k] + (hi[k] - lo[k]) * unit(rng);
      const double R = std::exp(std::log(0.1) + (std::log(10.0) - std::log(0.1)) * unit(rng));
      const double ratio = area_in_ball(s, {p, R}) / (std::exp(kPi) * cm * std::pow(R, s.intrinsic_dim));
      worst = std::max(worst, ratio);
    }
    led.check(worst <= 1.0, c.name + " max ratio " + detail::fmt(worst, 3));
  }
  r.passed = led.ok();
  r.detail = led.str();
  return r;
}

inline int criterion_count() { return 13; }

inline CriterionResult run_criterion(int id, const OptimizerConfig& cfg = {}) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  switch (id) {
    case 1: r = criterion_sphere_entropies(cfg); break;
    case 2: r = criterion_veronese(cfg); break;
    case 3: r = criterion_loxodromes(cfg); break;
    case 4: r = criterion_iterate(); break;
    case 5: r = criterion_constants(); break;
    case 6: r = criterion_weight_chain(); break;
    case 7: r = criterion_hessian(); break;
    case 8: r = criterion_harnack_growth(); break;
    case 9: r = criterion_long_time(); break;
    case 10: r = criterion_flow(cfg); break;
    case 11: r = criterion_inequality_chain(cfg); break;
    case 12: r = criterion_lattice(); break;
    case 13: r = criterion_area_ratios(cfg); break;
    default: throw ValidationError("no acceptance criterion " + std::to_string(id));
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.time_limit > 0.0 && r.seconds > r.time_limit) {
    r.passed = false;
    r.detail += "; FAIL runtime " + detail::fmt(r.seconds, 3) + " s over " + detail::fmt(r.time_limit, 3) + " s";
  }
  return r;
}

inline std::string format_criterion(const CriterionResult& r) {
  std::ostringstream s;
  s << (r.passed ? "PASS" : "FAIL") << " criterion " << r.id << " (" << r.title << ", " << detail::fmt(r.seconds, 3)
    << " s): " << r.detail;
  return s.str();
}

}  // namespace shrinkerlab
