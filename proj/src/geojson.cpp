#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "zonalclim/error.hpp"
#include "zonalclim/geom.hpp"

namespace zonalclim {

using nlohmann::json;

namespace {

class FeatureReader {
 public:
  FeatureReader(std::size_t index, std::vector<std::string>* warnings) : index_(index), warnings_(warnings) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("feature " + std::to_string(index_) + ": " + msg);
  }

  void warn(const std::string& msg) const {
    if (warnings_) warnings_->push_back("feature " + std::to_string(index_) + ": " + msg);
  }

  Ring ring(const json& coords) const {
    if (!coords.is_array()) fail("ring is not an array of positions");
    Ring r;
    r.reserve(coords.size());
    for (const json& pos : coords) {
      if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
        fail("position is not [lon, lat]");
      const Point p(pos[0].get<double>(), pos[1].get<double>());
      if (!std::isfinite(p.x()) || !std::isfinite(p.y())) fail("non-finite coordinate");
      if (!r.empty() && std::abs(p.x() - r.back().x()) > 180.0)
        fail("ring jumps more than 180 degrees of longitude; split it at the antimeridian");
      r.push_back(p);
    }
    if (r.size() < 2 || r.front() != r.back()) fail("unclosed ring");
    return r;
  }

  static bool degenerate(const Ring& r) {
    std::set<std::pair<double, double>> distinct;
    for (const Point& p : r) distinct.emplace(p.x(), p.y());
    return distinct.size() < 3 || signed_area(r) == 0.0;
  }

  std::optional<Polygon> polygon(const json& rings) const {
    if (!rings.is_array() || rings.empty()) fail("polygon has no rings");
    Polygon p;
    p.outer = ring(rings[0]);
    if (degenerate(p.outer)) {
      warn("dropped degenerate polygon");
      return std::nullopt;
    }
    for (std::size_t k = 1; k < rings.size(); ++k) {
      Ring h = ring(rings[k]);
      if (degenerate(h)) {
        warn("dropped degenerate hole");
        continue;
      }
      p.holes.push_back(std::move(h));
    }
    normalize_orientation(p);
    return p;
  }

  MultiPolygon geometry(const json& geom) const {
    if (!geom.is_object() || !geom.contains("type") || !geom.contains("coordinates")) fail("missing geometry");
    const std::string type = geom["type"].get<std::string>();
    MultiPolygon mp;
    if (type == "Polygon") {
      if (auto p = polygon(geom["coordinates"])) mp.push_back(std::move(*p));
    } else if (type == "MultiPolygon") {
      if (!geom["coordinates"].is_array()) fail("MultiPolygon coordinates are not an array");
      for (const json& rings : geom["coordinates"])
        if (auto p = polygon(rings)) mp.push_back(std::move(*p));
    } else {
      fail("unsupported geometry type '" + type + "'");
    }
    return mp;
  }

  Level level(const json& v) const {
    try {
      if (v.is_number_integer()) return parse_level(std::to_string(v.get<int>()));
      if (v.is_string()) return parse_level(v.get<std::string>());
    } catch (const ValidationError& e) {
      fail(e.what());
    }
    fail("missing or malformed 'level'");
  }

 private:
  std::size_t index_;
  std::vector<std::string>* warnings_;
};

}  // namespace

RegionSet parse_geojson(std::istream& in, std::optional<Level> level, std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw ParseError("expected a GeoJSON FeatureCollection");

  std::vector<Region> regions;
  std::set<std::string> seen;
  std::optional<Level> set_level = level;
  const json& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const FeatureReader reader(i, warnings);
    const json& f = features[i];
    if (!f.is_object() || !f.contains("properties") || !f["properties"].is_object()) reader.fail("missing properties");
    const json& props = f["properties"];
    if (!props.contains("region_id") || !props["region_id"].is_string()) reader.fail("missing region_id");
    Region r;
    r.region_id = props["region_id"].get<std::string>();
    if (r.region_id.empty() || r.region_id.find_first_of(" \t\r\n") != std::string::npos)
      reader.fail("region_id must be non-empty and contain no whitespace");
    if (!props.contains("level")) reader.fail("missing 'level'");
    r.level = reader.level(props["level"]);
    if (level && r.level != *level) continue;
    if (!set_level) set_level = r.level;
    if (r.level != *set_level) reader.fail("mixes levels within one collection; select one level");
    r.name = props.contains("name") && props["name"].is_string() ? props["name"].get<std::string>() : r.region_id;
    if (props.contains("parent_id") && props["parent_id"].is_string()) r.parent_id = props["parent_id"].get<std::string>();
    if (r.level == Level::L1 && !r.parent_id) reader.fail("L1 region '" + r.region_id + "' has no parent_id");
    if (!seen.insert(r.region_id).second) reader.fail("duplicate region_id '" + r.region_id + "'");
    r.geometry = reader.geometry(f.value("geometry", json()));
    regions.push_back(std::move(r));
  }
  return RegionSet(set_level.value_or(Level::L0), std::move(regions));
}

RegionSet load_geojson(const std::string& path, std::optional<Level> level, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open '" + path + "'");
  return parse_geojson(in, level, warnings);
}

std::string to_geojson(const RegionSet& regions) {
  auto ring_json = [](const Ring& r) {
    json a = json::array();
    for (const Point& p : r) a.push_back({p.x(), p.y()});
    return a;
  };
  json features = json::array();
  for (const Region& r : regions.regions()) {
    json coords = json::array();
    for (const Polygon& p : r.geometry) {
      json rings = json::array({ring_json(p.outer)});
      for (const Ring& h : p.holes) rings.push_back(ring_json(h));
      coords.push_back(std::move(rings));
    }
    json props = {{"region_id", r.region_id}, {"name", r.name}, {"level", std::string(to_string(r.level))}};
    if (r.parent_id) props["parent_id"] = *r.parent_id;
    features.push_back(
        {{"type", "Feature"}, {"properties", props}, {"geometry", {{"type", "MultiPolygon"}, {"coordinates", coords}}}});
  }
  return json{{"type", "FeatureCollection"}, {"features", features}}.dump();
}

}  // namespace zonalclim
