#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "shrinkerlab/catalog.hpp"
#include "shrinkerlab/manifold.hpp"
#include "shrinkerlab/quadrature.hpp"

using namespace shrinkerlab;
constexpr double pi = std::numbers::pi;

TEST(Quadrature, GaussLegendreIntegratesPolynomialsExactly) {
  const auto rule = gauss_legendre(6, -1.0, 2.0);
  for (int degree = 0; degree <= 11; ++degree) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * std::pow(rule.nodes[i], degree);
    const double exact = (std::pow(2.0, degree + 1) - std::pow(-1.0, degree + 1)) / (degree + 1);
    EXPECT_NEAR(sum, exact, 1e-12 * std::max(1.0, std::abs(exact))) << "degree " << degree;
  }
}

TEST(Quadrature, WeightsSumToParameterVolume) {
  for (int count : {4, 17, 64, 500}) {
    const auto gl = gauss_legendre(count, 0.0, pi);
    const auto tr = periodic_trapezoid(count, 0.0, 2.0 * pi);
    double a = 0.0, b = 0.0;
    for (double w : gl.weights) a += w;
    for (double w : tr.weights) b += w;
    EXPECT_NEAR(a, pi, 1e-10 * pi);
    EXPECT_NEAR(b, 2.0 * pi, 1e-10 * 2.0 * pi);
  }
}

TEST(Quadrature, RejectsEmptyRules) {
  EXPECT_THROW(gauss_legendre(0, 0.0, 1.0), ValidationError);
  EXPECT_THROW(periodic_trapezoid(0, 0.0, 1.0), ValidationError);
}

TEST(Samples, UnitCircleLength) {
  const auto s = build_samples(catalog_make("sphere", {1, 1}), {256});
  EXPECT_NEAR(s.total_area(), 2.0 * pi, 1e-10);
}

TEST(Samples, SphereRadiusTwoArea) {
  const auto s = build_samples(catalog_make("sphere", {2, 2}), {64, 128});
  EXPECT_NEAR(s.total_area(), 16.0 * pi, 1e-6);
}

TEST(Samples, SphereAreaConvergesUnderRefinement) {
  const auto chart = catalog_make("sphere", {2, 1});
  const double coarse = build_samples(chart, {32, 64}).total_area();
  const double fine = build_samples(chart, {64, 128}).total_area();
  EXPECT_LT(std::abs(coarse - fine), 1e-6);
  EXPECT_NEAR(coarse, 4.0 * pi, 1e-5);
  EXPECT_NEAR(fine, 4.0 * pi, 1e-5);
}

TEST(Samples, VeroneseAreaWithHalfMultiplicity) {
  const auto s = build_samples(catalog_make("veronese", {1}), {64, 128});
  EXPECT_NEAR(s.total_area(), 6.0 * pi, 1e-4);
}

TEST(Samples, TangentNormalSplitIsOrthogonal) {
  for (const auto& [name, params] : std::vector<std::pair<std::string, std::vector<double>>>{
           {"sphere", {2, 2}}, {"veronese", {2}}, {"clifford_torus", {2}}, {"ellipse", {2, 1}}}) {
    const auto chart = catalog_make(name, params);
    const auto s = build_samples(chart, std::vector<int>(chart.intrinsic_dim, 16));
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      const Vec x = s.positions.col(k);
      const Vec perp = normal_part(s.tangents[k], x);
      const Vec tang = x - perp;
      EXPECT_NEAR(perp.squaredNorm() + tang.squaredNorm(), x.squaredNorm(), 1e-10) << name;
    }
  }
}

TEST(Samples, RejectsCoarseResolutionAndMismatchedAxes) {
  const auto chart = catalog_make("sphere", {2, 1});
  EXPECT_THROW(build_samples(chart, {3, 8}), ValidationError);
  EXPECT_THROW(build_samples(chart, {8}), ValidationError);
}

TEST(Samples, DegenerateJacobianIsReported) {
  ChartSpec chart = catalog_make("plane_patch", {1, 1});
  chart.jet = [](const Vec& u, int) {
    ChartJet jet;
    jet.position = Vec::Zero(2);
    jet.position[0] = u[0];
    jet.first = Mat::Zero(2, 1);
    jet.second = Mat::Zero(2, 1);
    return jet;
  };
  try {
    build_samples(chart, {8});
    FAIL() << "expected a degenerate-Jacobian error";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("node 0"), std::string::npos);
  }
}

TEST(Samples, PeriodicAxesCloseUp) {
  for (const auto& [name, params] : std::vector<std::pair<std::string, std::vector<double>>>{
           {"sphere", {1, 1.5}}, {"ellipse", {2, 1}}, {"clifford_torus", {2}}}) {
    const auto chart = catalog_make(name, params);
    Vec a(chart.intrinsic_dim), b(chart.intrinsic_dim);
    for (int i = 0; i < chart.intrinsic_dim; ++i) a[i] = b[i] = 0.3 * (chart.domain[i].lo + chart.domain[i].hi);
    for (int i = 0; i < chart.intrinsic_dim; ++i) {
      if (!chart.domain[i].periodic) continue;
      a[i] = chart.domain[i].lo;
      b[i] = chart.domain[i].hi;
      const Vec fa = chart.embed(a, 0), fb = chart.embed(b, 0);
      EXPECT_LE((fa - fb).norm(), 1e-12 * std::max(1.0, fa.norm())) << name;
    }
  }
}

TEST(MeanCurvature, UnitCirclePointsToCenter) {
  const auto chart = catalog_make("sphere", {1, 1});
  for (double phi : {0.1, 1.0, 2.5, 4.0}) {
    Vec u(1);
    u << phi;
    const Vec H = mean_curvature_at(chart, u, 1e-4);
    EXPECT_NEAR(H.norm(), 1.0, 1e-6);
    EXPECT_NEAR(H.dot(chart.embed(u, 0)), -1.0, 1e-6);
  }
}

TEST(MeanCurvature, ShrinkingSphereIdentity) {
  const auto chart = catalog_make("sphere", {2, 2});
  Vec u(2);
  u << 1.1, 0.7;
  const Vec H = mean_curvature_at(chart, u, 1e-4);
  EXPECT_LE((H + 0.5 * chart.embed(u, 0)).norm(), 1e-6);
}

TEST(MeanCurvature, RejectsPointsNearBoundary) {
  const auto chart = catalog_make("sphere", {2, 2});
  Vec u(2);
  u << 1e-5, 0.7;
  EXPECT_THROW(mean_curvature_at(chart, u, 1e-4), ValidationError);
}

TEST(MeanCurvature, DoubledVeroneseFiniteDifferenceResidual) {
  const auto s = build_samples(catalog_make("veronese", {2}), {64, 128}, DerivativeMode::finite_difference);
  EXPECT_LE(shrinker_residual(s), 1e-3);
}

TEST(Residual, CatalogShrinkers) {
  EXPECT_LE(shrinker_residual(build_samples(catalog_make("sphere", {1, std::sqrt(2.0)}))), 1e-8);
  EXPECT_LE(shrinker_residual(build_samples(catalog_make("sphere", {2, 2}))), 1e-8);
  EXPECT_LE(shrinker_residual(build_samples(catalog_make("cylinder", {std::sqrt(2.0), 10}), {32, 16})), 1e-8);
  EXPECT_LE(shrinker_residual(build_samples(catalog_make("veronese", {2}))), 1e-8);
  EXPECT_LE(shrinker_residual(build_samples(catalog_make("clifford_torus", {2}))), 1e-8);
}

TEST(Residual, UnitCircleIsHalf) {
  EXPECT_NEAR(shrinker_residual(build_samples(catalog_make("sphere", {1, 1}))), 0.5, 1e-10);
}

// Finite-difference residuals must fall at second order in the step.
TEST(Residual, FiniteDifferenceOrderAtLeastTwo) {
  const auto chart = catalog_make("veronese", {2});
  Vec u(2);
  u << 1.0, 0.4;
  const Vec x = chart.embed(u, 0);
  auto residual = [&](double h) {
    const auto jet = finite_difference_jet(chart, u, 0, {h, h});
    return (mean_curvature_from_jet(jet) + 0.5 * normal_part(jet.first, x)).norm();
  };
  const double r1 = residual(4e-3), r2 = residual(2e-3);
  EXPECT_GE(std::log2(r1 / r2), 1.9);
}

TEST(Catalog, VeroneseLiesOnSphere) {
  const auto s = build_samples(catalog_make("veronese", {2}), {32, 64});
  const Eigen::ArrayXd radii = s.positions.colwise().norm().transpose().array();
  EXPECT_LE((radii - 2.0).abs().maxCoeff(), 1e-10);
}

TEST(Catalog, LoxodromeBranchArclength) {
  const auto chart = catalog_make("loxodrome", {1, 12});
  const auto s = build_samples(chart, {1200});
  const double branch = s.area.head(1200).sum();
  const double exact = std::sqrt(2.0) * (std::exp(12.0) - std::exp(-12.0));
  EXPECT_NEAR(branch / exact, 1.0, 1e-10);
  EXPECT_EQ(chart.pieces, 2);
  EXPECT_FALSE(chart.truncation_note.empty());
}

TEST(Catalog, AnalyticJetsMatchFiniteDifferences) {
  for (const auto& [name, params] : std::vector<std::pair<std::string, std::vector<double>>>{
           {"sphere", {2, 1.3}}, {"veronese", {1}}, {"clifford_torus", {2}}, {"cylinder", {1.2, 5}},
           {"loxodrome", {0.7, 3}}, {"ellipse", {2, 1}}, {"plane_patch", {2, 3}}}) {
    const auto chart = catalog_make(name, params);
    Vec u(chart.intrinsic_dim);
    for (int i = 0; i < chart.intrinsic_dim; ++i)
      u[i] = chart.domain[i].lo + 0.37 * chart.domain[i].span();
    for (int piece = 0; piece < chart.pieces; ++piece) {
      const auto exact = chart.jet(u, piece);
      const auto fd = finite_difference_jet(chart, u, piece, std::vector<double>(chart.intrinsic_dim, 1e-4));
      EXPECT_LE((exact.first - fd.first).cwiseAbs().maxCoeff(), 1e-6) << name;
      EXPECT_LE((exact.second - fd.second).cwiseAbs().maxCoeff(), 1e-4) << name;
    }
  }
}

TEST(Catalog, RejectsBadInput) {
  EXPECT_THROW(catalog_make("torus_of_doom", {}), ValidationError);
  EXPECT_THROW(catalog_make("lattice_torus", {0, 1}), ValidationError);
  EXPECT_THROW(catalog_make("sphere", {2, -1}), ValidationError);
  EXPECT_THROW(catalog_make("sphere", {3, 1}), ValidationError);
  EXPECT_THROW(catalog_make("veronese", {0}), ValidationError);
  EXPECT_THROW(catalog_make("clifford_torus", {-2}), ValidationError);
  EXPECT_THROW(catalog_make("loxodrome", {-0.5, 12}), ValidationError);
  EXPECT_THROW(catalog_make("cylinder", {1, 0}), ValidationError);
}

TEST(Catalog, NonCompactEntriesRecordTruncation) {
  const auto cyl = catalog_make("cylinder", {std::sqrt(2.0)});
  EXPECT_FALSE(cyl.truncation_note.empty());
  EXPECT_LT(cyl.tail_bound, 1e-8);
  EXPECT_TRUE(catalog_make("sphere", {2, 1}).truncation_note.empty());
}

TEST(Product, CircleTimesPlane) {
  const auto prod = product_with_plane(catalog_make("sphere", {1, 1}), 1, 20);
  EXPECT_EQ(prod.intrinsic_dim, 3);
  EXPECT_EQ(prod.ambient_dim, 4);
  EXPECT_FALSE(prod.truncation_note.empty());
  const auto s = build_samples(prod, {32, 8, 8});
  EXPECT_EQ(s.positions.rows(), 4);
  EXPECT_NEAR(s.total_area(), 2.0 * pi * 40.0 * 40.0, 1e-8);
  EXPECT_LE(shrinker_residual(build_samples(product_with_plane(catalog_make("sphere", {1, std::sqrt(2.0)}), 1, 3),
                                            {32, 6, 6})),
            1e-8);
}

TEST(Product, RejectsUnsupportedIndex) {
  const auto plane = catalog_make("plane_patch", {2, 1});
  EXPECT_THROW(product_with_plane(plane, 0, 1.0), ValidationError);
  EXPECT_THROW(product_with_plane(plane, 3, 1.0), ValidationError);
}

TEST(Transform, SimilarityMovesPositionsAndScalesArea) {
  const auto chart = catalog_make("sphere", {2, 1});
  Mat rot = Eigen::AngleAxisd(0.8, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
  Vec shift(3);
  shift << 3, -1, 2;
  const auto moved = build_samples(transform_chart(chart, rot, shift, 2.0), {32, 64});
  EXPECT_NEAR(moved.total_area(), 16.0 * pi, 1e-6);
  EXPECT_LE((moved.weighted_centroid() - shift).norm(), 1e-10);
  Mat bad = Mat::Identity(3, 3);
  bad(0, 1) = 0.5;
  EXPECT_THROW(transform_chart(chart, bad, shift, 1.0), ValidationError);
}
