#include "synthetic_world.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "oracles.hpp"
#include "zonalclim/temporal.hpp"
#include "zonalclim/zonal.hpp"

namespace testsupport {

using namespace zonalclim;

GridSpec world_spec() { return {6, 6, 0.0, 6.0, 1.0, Registration::corner}; }

std::vector<WorldRegion> world_regions(Level level) {
  if (level == Level::L0) return {{"A", Level::L0, std::nullopt, 0, 3.5, 0, 6}, {"B", Level::L0, std::nullopt, 3.5, 6, 0, 6}};
  return {{"A.1", Level::L1, "A", 0, 3.5, 0, 6}, {"B.1", Level::L1, "B", 3.5, 6, 3, 6}, {"B.2", Level::L1, "B", 3.5, 6, 0, 3}};
}

std::string world_geojson() {
  nlohmann::ordered_json fc{{"type", "FeatureCollection"}, {"features", nlohmann::ordered_json::array()}};
  for (Level level : {Level::L0, Level::L1}) {
    for (const WorldRegion& r : world_regions(level)) {
      nlohmann::ordered_json props{{"region_id", r.id}, {"name", "Region " + r.id}, {"level", to_string(level)}};
      if (r.parent) props["parent_id"] = *r.parent;
      // B.2 is written clockwise on purpose.
      nlohmann::ordered_json ring = r.id == "B.2"
                                        ? nlohmann::ordered_json{{r.x0, r.y0}, {r.x0, r.y1}, {r.x1, r.y1}, {r.x1, r.y0}, {r.x0, r.y0}}
                                        : nlohmann::ordered_json{{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}, {r.x0, r.y0}};
      fc["features"].push_back({{"type", "Feature"},
                                {"properties", props},
                                {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
    }
  }
  return fc.dump(1);
}

RegionSet world_region_set(Level level) {
  std::istringstream in(world_geojson());
  return parse_geojson(in, level);
}

namespace {

PlaneXd density_plane() {
  PlaneXd d(6, 6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) d(r, c) = 50.0 + 10.0 * r + 5.0 * c;
  d(2, 2) = 0.0;
  d(0, 5) = std::numeric_limits<double>::quiet_NaN();
  return d;
}

PlaneXd lights_plane() {
  PlaneXd l(6, 6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) l(r, c) = 1.5 * ((r * 7 + c * 3) % 5);
  l(5, 0) = std::numeric_limits<double>::quiet_NaN();
  return l;
}

double monthly_value(int r, int c, int t) {
  return 12.0 + 0.7 * r - 0.3 * c + 8.0 * std::sin(2.0 * std::numbers::pi * t / 12.0) + 0.01 * r * c * t;
}

bool monthly_masked(int r, int c, int t) {
  if (r == 1 && c == 1 && t % 5 == 0) return true;
  if (r == 4 && c == 4 && t % 7 == 3) return true;
  if (r == 3 && c == 3 && t == 10) return true;
  return t == 6 && r <= 2 && c >= 3;
}

}  // namespace

Raster world_density() { return Raster(world_spec(), density_plane(), Variable::population_density, {kWorldBaseYear}); }

Raster world_lights() { return Raster(world_spec(), lights_plane(), Variable::nightlight, {kWorldBaseYear}); }

WeightGrid world_weights(WeightKind kind) {
  switch (kind) {
    case WeightKind::population: return population_weight(world_density(), world_spec(), kWorldBaseYear);
    case WeightKind::nightlight: return nightlight_weight(world_lights(), kWorldBaseYear);
    case WeightKind::unweighted: break;
  }
  return unweighted(world_spec());
}

RasterSeries world_monthly() {
  std::vector<Raster> frames;
  for (int t = 0; t < 24; ++t) {
    PlaneXd v(6, 6);
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c)
        v(r, c) = monthly_masked(r, c, t) ? std::numeric_limits<double>::quiet_NaN() : monthly_value(r, c, t);
    frames.emplace_back(world_spec(), v, Variable::temperature, Timestamp{2001 + t / 12, t % 12 + 1, 0});
  }
  return RasterSeries(world_spec(), Frequency::monthly, std::move(frames));
}

RasterSeries world_daily() {
  std::vector<Raster> frames;
  int d = 0;
  for (int y = 2001; y <= 2002; ++y)
    for (int m = 1; m <= 12; ++m)
      for (int day = 1; day <= days_in_month(y, m); ++day, ++d) {
        PlaneXd v(6, 6);
        for (int r = 0; r < 6; ++r)
          for (int c = 0; c < 6; ++c) {
            const double noise = std::sin(12.9898 * (d + 1) + 78.233 * (r * 6 + c + 1)) * 3.0;
            v(r, c) = 14.0 + 10.0 * std::sin(2.0 * std::numbers::pi * (d - 100) / 365.0) + 0.3 * r - 0.2 * c + noise;
          }
        if (d % 11 == 0) v(2, 4) = std::numeric_limits<double>::quiet_NaN();
        frames.emplace_back(world_spec(), v, Variable::temperature, Timestamp{y, m, day});
      }
  return RasterSeries(world_spec(), Frequency::daily, std::move(frames));
}

namespace {

std::vector<oracle::DenseCell> world_cells(const WorldRegion& region, const Raster& x, WeightKind kind) {
  const PlaneXd dens = density_plane();
  const PlaneXd lights = lights_plane();
  std::vector<oracle::DenseCell> cells;
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) {
      const double lon0 = c, lon1 = c + 1.0, lat0 = 5.0 - r, lat1 = 6.0 - r;
      const double ox = std::max(0.0, std::min(lon1, region.x1) - std::max(lon0, region.x0));
      const double oy = std::max(0.0, std::min(lat1, region.y1) - std::max(lat0, region.y0));
      const double area = oracle::quadrature_cell_area(lat0, lat1, 1.0);
      double w = 1.0;
      if (kind == WeightKind::population) w = std::isnan(dens(r, c)) ? 0.0 : dens(r, c) * area;
      if (kind == WeightKind::nightlight) w = std::isnan(lights(r, c)) ? 0.0 : lights(r, c);
      cells.push_back({area, ox * oy, w, x.values()(r, c), static_cast<bool>(x.missing()(r, c))});
    }
  return cells;
}

}  // namespace

std::optional<double> world_oracle(const WorldRegion& region, const Raster& x, WeightKind kind) {
  return oracle::weighted_mean(world_cells(region, x, kind));
}

double world_mass(const WorldRegion& region, const Raster& x, WeightKind kind) {
  long double m = 0.0L;
  for (const oracle::DenseCell& c : world_cells(region, x, kind))
    if (!c.missing) m += static_cast<long double>(c.area) * c.frac * c.weight;
  return static_cast<double>(m);
}

std::vector<DatasetKey> world_keys() {
  std::vector<DatasetKey> keys;
  for (Level level : {Level::L0, Level::L1})
    for (WeightKind kind : {WeightKind::unweighted, WeightKind::population, WeightKind::nightlight})
      for (Frequency f : {Frequency::monthly, Frequency::annual}) {
        std::optional<int> year;
        if (kind != WeightKind::unweighted) year = kWorldBaseYear;
        keys.push_back({Source::CRU, Variable::temperature, level, kind, year, f});
      }
  keys.push_back({Source::ERA5, Variable::temperature, Level::L0, WeightKind::population, kWorldBaseYear, Frequency::daily});
  keys.push_back({Source::ERA5, Variable::temperature, Level::L1, WeightKind::unweighted, std::nullopt, Frequency::daily});
  return keys;
}

void build_world_store(const std::filesystem::path& root) {
  DatasetStore store(root);
  const RasterSeries monthly = world_monthly();
  const RasterSeries daily = world_daily();
  for (Level level : {Level::L0, Level::L1}) {
    const RegionSet regions = world_region_set(level);
    const CoverageMatrix cov = build_coverage(world_spec(), regions);
    std::filesystem::create_directories(root / "boundaries");
    std::ofstream(root / "boundaries" / (std::string(to_string(level)) + ".geojson")) << to_geojson(regions);
    for (const DatasetKey& key : world_keys()) {
      if (key.level != level) continue;
      const WeightGrid w = world_weights(key.weighting);
      SeriesTable t;
      if (key.frequency == Frequency::daily) {
        t = aggregate_series(daily, cov, w);
      } else {
        t = aggregate_series(monthly, cov, w);
        if (key.frequency == Frequency::annual) t = upscale(t, Frequency::annual, UpscaleStat::mean);
      }
      store.store(t, {key, kWorldVersion, {}, {}, kWorldBuiltAt, {}});
    }
  }
}

}  // namespace testsupport
