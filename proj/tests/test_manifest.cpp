#include <gtest/gtest.h>

#include "shrinkerlab/manifest.hpp"

using namespace shrinkerlab;

TEST(CatalogSpec, ParsesNameAndParams) {
  const auto s = parse_catalog_spec("sphere:2,1.5");
  EXPECT_EQ(s.name, "sphere");
  ASSERT_EQ(s.params.size(), 2u);
  EXPECT_EQ(s.params[1], 1.5);
  EXPECT_TRUE(parse_catalog_spec("veronese").params.empty());
  EXPECT_EQ(parse_catalog_spec("cylinder:1,-2e-1").params[1], -0.2);
}

TEST(CatalogSpec, RejectsMalformedText) {
  EXPECT_THROW(parse_catalog_spec(":1"), ValidationError);
  EXPECT_THROW(parse_catalog_spec("sphere:2,"), ValidationError);
  EXPECT_THROW(parse_catalog_spec("sphere:2,x"), ValidationError);
  EXPECT_THROW(parse_catalog_spec("sphere:1.5abc"), ValidationError);
}

TEST(Manifest, RoundTripsEveryChart) {
  for (const char* text : {"sphere:1,1.4142135623730951", "sphere:2,2", "cylinder:1,1.4142135623730951",
                           "clifford_torus:2", "veronese:2", "ellipse:2,1"}) {
    const auto spec = parse_catalog_spec(text);
    const auto chart = catalog_make(spec.name, spec.params);
    const auto j = chart_manifest(chart, chart.default_resolution);
    const auto back = chart_from_manifest(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.chart.name, chart.name) << text;
    EXPECT_EQ(back.chart.params, chart.params) << text;
    EXPECT_EQ(back.resolution, chart.default_resolution) << text;
    EXPECT_EQ(back.chart.truncation_note, chart.truncation_note) << text;
  }
}

TEST(Manifest, RejectsBadFields) {
  using nlohmann::json;
  EXPECT_THROW(chart_from_manifest(json::array()), ValidationError);
  EXPECT_THROW(chart_from_manifest(json{{"params", {1, 1}}}), ValidationError);
  EXPECT_THROW(chart_from_manifest(json{{"name", "sphere"}, {"params", "2,1"}}), ValidationError);
  EXPECT_THROW(chart_from_manifest(json{{"name", "sphere"}, {"params", {2, "a"}}}), ValidationError);
  EXPECT_THROW(chart_from_manifest(json{{"name", "sphere"}, {"params", {1, 1}}, {"resolution", {1}}}),
               ValidationError);
  EXPECT_THROW(chart_from_manifest(json{{"name", "sphere"}, {"params", {1, 1}}, {"resolution", {64, 64}}}),
               ValidationError);
  EXPECT_THROW(chart_from_manifest(json{{"name", "lattice_torus"}, {"params", {0, 1}}}), ValidationError);
}
