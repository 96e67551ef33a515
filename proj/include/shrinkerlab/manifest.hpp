#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "shrinkerlab/catalog.hpp"
#include "shrinkerlab/errors.hpp"

namespace shrinkerlab {

struct CatalogSpec {
  std::string name;
  std::vector<double> params;
};

inline std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ValidationError("malformed number '" + item + "' in " + what);
    out.push_back(value);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

// "name" or "name:p1,p2,...".
inline CatalogSpec parse_catalog_spec(const std::string& text) {
  const std::size_t colon = text.find(':');
  CatalogSpec spec;
  spec.name = text.substr(0, colon);
  if (spec.name.empty()) throw ValidationError("empty catalog name in '" + text + "'");
  if (colon != std::string::npos) spec.params = parse_number_list(text.substr(colon + 1), "'" + text + "'");
  return spec;
}

inline nlohmann::json chart_manifest(const ChartSpec& chart, const std::vector<int>& resolution) {
  return {{"name", chart.name},
          {"params", chart.params},
          {"resolution", resolution},
          {"truncation", chart.truncation_note}};
}

struct ManifestEntry {
  ChartSpec chart;
  std::vector<int> resolution;
};

// Rebuilds a chart from {name, params[, resolution]}; the truncation text is
// regenerated by the catalog rather than trusted from the file.
inline ManifestEntry chart_from_manifest(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
    throw ValidationError("manifest needs a string field 'name'");
  std::vector<double> params;
  if (j.contains("params")) {
    if (!j["params"].is_array()) throw ValidationError("manifest field 'params' must be an array");
    for (const auto& p : j["params"]) {
      if (!p.is_number()) throw ValidationError("manifest params must be numbers");
      params.push_back(p.get<double>());
    }
  }
  ManifestEntry out{catalog_make(j["name"].get<std::string>(), params), {}};
  out.resolution = out.chart.default_resolution;
  if (j.contains("resolution")) {
    if (!j["resolution"].is_array()) throw ValidationError("manifest field 'resolution' must be an array");
    out.resolution.clear();
    for (const auto& r : j["resolution"]) {
      if (!r.is_number_integer() || r.get<int>() < 2) throw ValidationError("manifest resolution entries must be integers >= 2");
      out.resolution.push_back(r.get<int>());
    }
    if (static_cast<int>(out.resolution.size()) != out.chart.intrinsic_dim)
      throw ValidationError("manifest resolution needs one entry per intrinsic dimension");
  }
  return out;
}

}  // namespace shrinkerlab
