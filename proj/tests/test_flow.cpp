#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "shrinkerlab/flow.hpp"

using namespace shrinkerlab;
constexpr double pi = std::numbers::pi;
const double kCircleEntropy = std::sqrt(2 * pi / std::numbers::e);

namespace {

double mean_radius(const CurveState& c) {
  double sum = 0;
  for (int k = 0; k < c.size(); ++k) sum += c.point(k).norm();
  return sum / c.size();
}

// Square [-1, 1]^2 with corners rounded at radius 0.5, sampled at equal spacing.
CurveState rounded_square(int per_side) {
  std::vector<Eigen::Vector2d> pts;
  const double r = 0.5, half = 1.0, flat = half - r;
  const double h = 2 * flat / per_side;
  const int per_arc = std::max(4, static_cast<int>(std::round(0.5 * pi * r / h)));
  const Eigen::Vector2d centres[4] = {{flat, flat}, {-flat, flat}, {-flat, -flat}, {flat, -flat}};
  for (int side = 0; side < 4; ++side) {
    const double a0 = side * pi / 2;
    const Eigen::Vector2d dir(-std::sin(a0), std::cos(a0));
    const Eigen::Vector2d start = centres[(side + 3) % 4] + r * Eigen::Vector2d(std::cos(a0), std::sin(a0));
    for (int k = 0; k < per_side; ++k) pts.push_back(start + (k * h) * dir);
    for (int k = 0; k < per_arc; ++k) {
      const double a = a0 + 0.5 * pi * k / per_arc;
      pts.push_back(centres[side] + r * Eigen::Vector2d(std::cos(a), std::sin(a)));
    }
  }
  CurveState c;
  c.points.resize(2, pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) c.points.col(k) = pts[k];
  return c;
}

}  // namespace

TEST(Curvature, CircleIsInwardWithInverseRadius) {
  for (int P : {64, 256}) {
    const auto c = circle_curve(1.7, P);
    const Mat kappa = curvature_vector(c);
    for (int k = 0; k < P; ++k) {
      ASSERT_NEAR(kappa.col(k).norm() * 1.7, 1.0, 10.0 / (P * P));
      ASSERT_LT(kappa.col(k).dot(c.point(k)), 0.0);
    }
  }
}

TEST(Curvature, EllipseVertex) {
  const auto c = ellipse_curve(2, 1, 256);
  ASSERT_NEAR(c.point(0)[0], 2.0, 1e-12);
  const Vec k0 = curvature_vector(c).col(0);
  EXPECT_NEAR(-k0[0], 2.0, 0.02);
  EXPECT_NEAR(k0[1], 0.0, 1e-6);
}

TEST(Curvature, StraightSidesOfRoundedSquare) {
  const auto c = rounded_square(40);
  const Mat kappa = curvature_vector(c);
  for (int k = 1; k + 1 < 40; ++k) EXPECT_LE(kappa.col(k).norm(), 1e-6);
  EXPECT_NEAR(kappa.col(60).norm(), 2.0, 1e-3);
}

TEST(Curvature, RejectsCoincidentPointsAndSmallCurves) {
  auto c = circle_curve(1, 64);
  c.points.col(5) = c.points.col(4);
  EXPECT_THROW(curvature_vector(c), NumericError);
  CurveState tiny;
  tiny.points = Mat::Zero(2, 10);
  EXPECT_THROW(curvature_vector(tiny), ValidationError);
}

TEST(FlowStep, EnforcesStabilityAndDetectsCollapse) {
  auto c = circle_curve(0.01, 64);
  const double h = c.min_spacing();
  EXPECT_THROW(flow_step(c, 0.3 * h * h), ValidationError);
  EXPECT_THROW(
      {
        for (int i = 0; i < 100000; ++i) c = flow_step(c, 0.2 * c.min_spacing() * c.min_spacing());
      },
      NumericError);
}

TEST(FlowStep, ResamplingKeepsSpacingEven) {
  auto c = ellipse_curve(3, 1, 128);
  for (int i = 0; i < 400; ++i) {
    c = flow_step(c, 0.2 * c.min_spacing() * c.min_spacing());
    ASSERT_LE(c.max_spacing() / c.min_spacing(), 3.0);
  }
}

TEST(RunFlow, ShrinkingCircleFollowsExactSolution) {
  FlowConfig cfg;
  cfg.checkpoints = 9;
  const auto trace = run_flow(circle_curve(std::sqrt(2.0), 256), 0.9, cfg);
  ASSERT_EQ(trace.times.size(), 10u);
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const double t = trace.times[i];
    EXPECT_NEAR(trace.lengths[i] / (2 * pi), std::sqrt(2 - 2 * t), 1e-3) << "t=" << t;
    EXPECT_NEAR(trace.entropy[i].value, kCircleEntropy, 2e-3) << "t=" << t;
    EXPECT_LE(trace.residuals[i], 1e-2) << "t=" << t;
  }
  EXPECT_NEAR(mean_radius(trace.final_state), std::sqrt(0.2), 1e-3);
}

TEST(RunFlow, EllipseEntropyIsMonotone) {
  const auto trace = run_flow(ellipse_curve(2, 1, 256), 0.8);
  ASSERT_EQ(trace.times.size(), 11u);
  EXPECT_LE(trace.worst_increase(), 2e-3);
  for (std::size_t i = 1; i < trace.times.size(); ++i) {
    EXPECT_GT(trace.times[i], trace.times[i - 1]);
    EXPECT_LT(trace.lengths[i], trace.lengths[i - 1]);
  }
  EXPECT_LT(trace.entropy.back().value, trace.entropy.front().value);
}

TEST(RunFlow, TiltedEllipseInSpaceMatchesPlanar) {
  const auto planar = ellipse_curve(2, 1, 256);
  Mat Q(3, 2);
  const double a = 0.7;
  Q << 1, 0, 0, std::cos(a), 0, std::sin(a);
  Vec b(3);
  b << 0.3, -0.2, 0.5;
  FlowConfig cfg;
  cfg.checkpoints = 4;
  const auto flat = run_flow(planar, 0.8, cfg);
  const auto tilted = run_flow(transform_curve(planar, Q, b), 0.8, cfg);
  EXPECT_LE(tilted.worst_increase(), 2e-3);
  for (std::size_t i = 0; i < flat.times.size(); ++i)
    EXPECT_NEAR(tilted.entropy[i].value, flat.entropy[i].value, 1e-5) << "checkpoint " << i;
}
