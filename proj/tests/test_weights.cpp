#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "shrinkerlab/quadrature.hpp"
#include "shrinkerlab/weights.hpp"

using namespace shrinkerlab;
constexpr double pi = std::numbers::pi;

namespace {

Eigen::VectorXd point(std::initializer_list<double> xs) {
  Eigen::VectorXd v(xs.size());
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Integral over R of f by x = tan(s), s in (-pi/2, pi/2).
template <class F>
double line_integral(F f, int nodes = 4000) {
  const auto rule = gauss_legendre(nodes, -pi / 2, pi / 2);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double c = std::cos(rule.nodes[i]);
    sum += rule.weights[i] * f(std::tan(rule.nodes[i])) / (c * c);
  }
  return sum;
}

}  // namespace

TEST(Weights, ConformalWeightValues) {
  EXPECT_DOUBLE_EQ(weight_eval(1, 1, point({0.3}), point({0.3})), 1.0);
  EXPECT_NEAR(weight_eval(2, 2, point({0, 0}), point({1, 0})), 1.0, 1e-15);
  EXPECT_THROW(weight_eval(0, 1, point({0}), point({0})), ValidationError);
}

TEST(Weights, ConformalMassOnLineIsCircleLength) {
  for (double rho : {0.5, 1.0, 3.0}) {
    const double mass = line_integral([&](double x) { return conformal_weight_sq(1, rho, x * x); });
    EXPECT_NEAR(mass, 2.0 * pi, 1e-9);
  }
}

TEST(Weights, ModifiedWeightPeak) {
  for (int n : {1, 2, 3})
    EXPECT_NEAR(what_eval(n, 2, 0.7, point({1, 1, 1}), point({1, 1, 1})), std::pow(4 * pi * 0.7, -0.5 * n), 1e-15);
}

TEST(Weights, GaussianKernelHasUnitMassWhenExponentMatches) {
  const double mass = line_integral([](double x) { return gaussian_sq(1, 0.8, x * x); });
  EXPECT_NEAR(mass, 1.0, 1e-10);
}

TEST(Weights, PointwiseChainGaussianBelowModifiedFamily) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 40.0), scale(0.02, 50.0);
  std::uniform_int_distribution<int> dim(1, 4), idx(0, 30);
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = dim(rng), m = idx(rng);
    const double r2 = dist(rng) * dist(rng), rho = scale(rng);
    const double g = gaussian_sq(n, rho, r2);
    const double upper = modified_weight_sq(n, n + m + 1, rho, r2);
    const double lower_m = modified_weight_sq(n, n + m, rho, r2);
    EXPECT_LE(g, upper * (1 + 1e-12));
    EXPECT_LE(upper, lower_m * (1 + 1e-12));
  }
}

TEST(Weights, NonSharpGaussianBound) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.0, 20.0), scale(0.02, 50.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = 1 + trial % 3;
    const double r2 = dist(rng) * dist(rng), rho = scale(rng);
    const double lhs = gaussian_sq(n, rho, r2);
    const double rhs = std::pow(n / (4 * pi), 0.5 * n) * conformal_weight_sq(n, 1.0 / std::sqrt(n * rho), r2);
    EXPECT_LE(lhs, rhs * (1 + 1e-12));
  }
}

TEST(Weights, ScaleDerivativeIdentity) {
  for (double M : {1.0, 2.0, 3.5})
    for (double rho : {0.3, 1.0, 2.5})
      for (double r2 : {0.0, 0.4, 3.0}) {
        const double h = 1e-6 * rho;
        const double fd = (conformal_weight_sq(M, rho + h, r2) - conformal_weight_sq(M, rho - h, r2)) / (2 * h);
        const double closed = -(M / rho) * conformal_weight_sq(M, rho, r2) +
                              (2 * M / (rho * rho)) * conformal_weight_sq(M + 1, rho, r2);
        EXPECT_NEAR(fd, closed, 1e-7 * std::max(1.0, std::abs(closed)));
      }
}

TEST(Weights, ModifiedWeightStableForLargeIndex) {
  const double g = gaussian_sq(2, 1.0, 9.0);
  const double w = modified_weight_sq(2, 2 + 1e7, 1.0, 9.0);
  EXPECT_NEAR(w / g, 1.0, 1e-5);
}

TEST(SphereArea, SmallCases) {
  EXPECT_DOUBLE_EQ(sphere_area(0), 2.0);
  EXPECT_DOUBLE_EQ(sphere_area(1), 2 * pi);
  EXPECT_NEAR(sphere_area(2), 4 * pi, 1e-14);
  EXPECT_NEAR(sphere_area(4), 8 * pi * pi / 3, 1e-13);
  EXPECT_NEAR(std::exp(log_sphere_area(4)), 26.318945069571623, 1e-12);
  EXPECT_THROW(sphere_area(-1), ValidationError);
}

TEST(Constants, BothRoutesAgree) {
  for (int M = 1; M <= 6; ++M)
    for (int m = 0; m <= 6; ++m)
      EXPECT_NEAR(c_const_from_spheres(M, m) / c_const(M, m), 1.0, 1e-12) << M << "," << m;
  EXPECT_NEAR(c_const(1, 1), 2 * pi, 1e-14);
  EXPECT_NEAR(c_const(3, 2), 5.2637890139143246, 1e-13);
}

TEST(Constants, ChatReferenceValues) {
  // frozen from an arbitrary-precision evaluation through the Gamma function
  const double n1[] = {0.56418958354775629, 0.79788456080286536, 0.86862668782741319,
                       0.93594182290647495, 0.96545065879062981};
  const double n3[] = {0.4343133439137066, 0.56418958354775629, 0.64592192563716097,
                       0.7737062407785361, 0.85880789745792786};
  const int ms[] = {0, 1, 2, 5, 10};
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(c_hat(1, ms[i]), n1[i], 1e-14);
    EXPECT_NEAR(c_hat(2, ms[i]), (ms[i] + 1.0) / (ms[i] + 2.0), 1e-14);
    EXPECT_NEAR(c_hat(3, ms[i]), n3[i], 1e-14);
  }
  EXPECT_EQ(c_hat(2, 0), 0.5);
  EXPECT_NEAR(c_hat(2, 10000), 0.9999000199960008, 1e-12);
  EXPECT_NEAR(c_hat(1, 10000), 0.99996250320285061, 1e-12);
}

TEST(Constants, ChatStrictlyIncreasingInsideUnitInterval) {
  for (int n = 1; n <= 5; ++n) {
    double previous = 0.0;
    for (int m = 0; m <= 400; ++m) {
      const double v = c_hat(n, m);
      EXPECT_GT(v, previous);
      EXPECT_LT(v, 1.0);
      previous = v;
    }
    EXPECT_GT(c_hat(n, 20000), c_hat(n, 10000));
  }
  for (int n = 1; n <= 6; ++n)
    for (int m : {0, 1, 3, 10, 40, 150})
      EXPECT_NEAR(c_hat_from_definition(n, m) / c_hat(n, m), 1.0, 1e-12) << n << "," << m;
}

TEST(Constants, AlphaGivesUnitMass) {
  // n = N = 1: alpha * integral of What^1_{1+m,1} over the line
  for (int m : {0, 1, 3}) {
    const double mass = line_integral([&](double x) { return modified_weight_sq(1, 1 + m, 1.0, x * x); });
    EXPECT_NEAR(alpha_mass(1, m, 1) * mass, 1.0, 1e-9) << m;
  }
  // n = 1 in N = 2: radial integral 2 pi r dr of What^1_{1+m,1}
  for (int m : {1, 2, 4}) {
    const double mass = line_integral([&](double r) {
      return std::abs(r) * pi * modified_weight_sq(1, 1 + m, 1.0, r * r);
    });
    EXPECT_NEAR(alpha_mass(1, m, 2) * mass, 1.0, 1e-7) << m;
  }
  EXPECT_NEAR(alpha_mass(1, 1, 2), 0.14104739588693907, 1e-15);
  EXPECT_THROW(alpha_mass(1, 0, 2), ValidationError);
}

// Fourth-order central stencils: d2/dx2 from five points, mixed terms from
// the nested first-derivative stencil.
template <class F>
double fd_hessian_entry(F f, Eigen::VectorXd x, int i, int j, double h) {
  if (i == j) {
    auto at = [&](double s) { Eigen::VectorXd y = x; y[i] += s * h; return f(y); };
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

TEST(LogHessian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  const double h = 1e-3;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double M = 1 + trial % 4, rho = 0.5 + 0.25 * (trial % 7);
    Eigen::VectorXd x(3);
    x << coord(rng), coord(rng), coord(rng);
    auto logw = [&](const Eigen::VectorXd& y) { return std::log(conformal_weight_sq(M, rho, y.squaredNorm())); };
    const Eigen::MatrixXd exact = log_hessian_weight(M, rho, x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(fd_hessian_entry(logw, x, i, j, h) - exact(i, j)));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(LogHessian, EigenvaluesAndVirtualTime) {
  const double M = 2, rho = 1.5;
  Eigen::VectorXd x(2);
  x << 0.9, -0.4;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(log_hessian_weight(M, rho, x));
  const double D = 1 + 0.25 * rho * rho * x.squaredNorm();
  const double radial = 0.5 * M * rho * rho * (-1 + 0.25 * rho * rho * x.squaredNorm()) / (D * D);
  const double tangential = -0.5 * M * rho * rho / D;
  EXPECT_NEAR(eig.eigenvalues()[0], std::min(radial, tangential), 1e-12);
  EXPECT_NEAR(eig.eigenvalues()[1], std::max(radial, tangential), 1e-12);
  // most negative eigenvalue is -M rho^2 / 2 at the center
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> at0(log_hessian_weight(M, rho, Eigen::VectorXd::Zero(2)));
  EXPECT_NEAR(-1.0 / (2.0 * at0.eigenvalues()[0]), virtual_time_closed({WeightKind::conformal, M, rho}), 1e-14);
  EXPECT_DOUBLE_EQ(virtual_time_closed({WeightKind::modified, 3, 0.7}), 0.7);
}

TEST(ReferenceValues, SphereEntropy) {
  EXPECT_NEAR(sphere_entropy_exact(1), std::sqrt(2 * pi / std::numbers::e), 1e-14);
  EXPECT_NEAR(sphere_entropy_exact(2), 4 / std::numbers::e, 1e-14);
  EXPECT_NEAR(sphere_entropy_exact(400), 1.4145082204613676, 1e-12);
  EXPECT_LT(std::abs(sphere_entropy_exact(400) - std::sqrt(2.0)), 5e-3);
}

TEST(ReferenceValues, LatticeBound) {
  const double y = std::sqrt(2.0);
  EXPECT_EQ(lattice_bound(0, y), pi * y / (0.0 * 0.0 + y * y - 0.0 + 1.0));
  EXPECT_NEAR(lattice_bound(0, std::sqrt(2.0)), std::sqrt(2.0) * pi / 3, 1e-15);
  EXPECT_NEAR(lattice_bound(0.5, std::sqrt(3.0) / 2), std::sqrt(3.0) * pi / 3, 1e-15);
  EXPECT_NEAR(lattice_bound(0, 1), pi / 2, 1e-15);
  EXPECT_THROW(lattice_bound(0.7, 1), ValidationError);
  EXPECT_THROW(lattice_bound(0.2, 0.5), ValidationError);
}
