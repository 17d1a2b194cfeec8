#pragma once

// A 6x6 one-degree world (lon 0..6, lat 0..6, corner registered) with two
// countries. A spans lon [0, 3.5] and has a single province A.1 equal to
// itself; B spans lon [3.5, 6] and splits at lat 3 into B.1 (north) and
// B.2 (south). Column 3 is shared half and half.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "zonalclim/catalog.hpp"
#include "zonalclim/geom.hpp"
#include "zonalclim/grid.hpp"
#include "zonalclim/weights.hpp"

namespace testsupport {

struct WorldRegion {
  std::string id;
  zonalclim::Level level;
  std::optional<std::string> parent;
  double x0, x1, y0, y1;
};

inline constexpr int kWorldBaseYear = 2015;
inline constexpr const char* kWorldBuiltAt = "2026-01-01T00:00:00Z";
inline constexpr const char* kWorldVersion = "synthetic-1";

zonalclim::GridSpec world_spec();
std::vector<WorldRegion> world_regions(zonalclim::Level level);
/// FeatureCollection holding both levels.
std::string world_geojson();
zonalclim::RegionSet world_region_set(zonalclim::Level level);

/// persons/km^2 with one masked cell.
zonalclim::Raster world_density();
/// Radiance with zeros and one masked cell.
zonalclim::Raster world_lights();
zonalclim::WeightGrid world_weights(zonalclim::WeightKind kind);

/// 24 monthly temperature frames, 2001-01 .. 2002-12, with masked cells.
/// In 2001-07 every cell of B.1 is masked.
zonalclim::RasterSeries world_monthly();
/// Daily temperature 2001-01-01 .. 2002-12-31.
zonalclim::RasterSeries world_daily();

/// Hand evaluation of the weighted mean from rectangle overlaps, quadrature
/// cell areas and weights rebuilt from the raw density/radiance planes.
std::optional<double> world_oracle(const WorldRegion& region, const zonalclim::Raster& x, zonalclim::WeightKind kind);
/// Present weight mass sum a_j f_ij w_j of a region under the same oracle.
double world_mass(const WorldRegion& region, const zonalclim::Raster& x, zonalclim::WeightKind kind);

/// Keys stored by build_world_store.
std::vector<zonalclim::DatasetKey> world_keys();

/// Store every world dataset plus both boundary levels under root.
void build_world_store(const std::filesystem::path& root);

}  // namespace testsupport
