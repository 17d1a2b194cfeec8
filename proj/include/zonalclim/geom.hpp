#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zonalclim/grid.hpp"

namespace zonalclim {

/// (lon, lat) in degrees.
using Point = Eigen::Vector2d;

/// Closed ring: front() == back().
using Ring = std::vector<Point>;

/// Outer ring counter-clockwise, holes clockwise.
struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
};

using MultiPolygon = std::vector<Polygon>;

enum class Level { L0, L1 };

std::string_view to_string(Level l);
Level parse_level(std::string_view s);

struct Region {
  std::string region_id;
  std::string name;
  Level level = Level::L0;
  std::optional<std::string> parent_id;
  MultiPolygon geometry;
};

class RegionSet {
 public:
  RegionSet() = default;
  /// Throws ValidationError on duplicate ids, mixed levels or L1 regions
  /// without a parent.
  RegionSet(Level level, std::vector<Region> regions);

  Level level() const noexcept { return level_; }
  const std::vector<Region>& regions() const noexcept { return regions_; }
  std::size_t size() const noexcept { return regions_.size(); }
  const Region* find(std::string_view id) const;

 private:
  Level level_ = Level::L0;
  std::vector<Region> regions_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Shoelace signed area of a closed ring (positive when counter-clockwise).
double signed_area(const Ring& ring);

/// Planar area in degrees^2: outer minus holes.
double planar_area(const Polygon& polygon);
double planar_area(const MultiPolygon& geometry);

/// Reorient rings to the outer-CCW / holes-CW convention.
void normalize_orientation(Polygon& polygon);

/// Even-odd point-in-polygon over every ring. Points exactly on an edge
/// may fall either way.
bool contains(const Polygon& polygon, const Point& p);

/// Area of polygon ∩ cell via four half-plane clips and the shoelace
/// formula; holes are clipped separately and subtracted. Result is clamped
/// to [0, cell planar area].
double clip_area(const Polygon& polygon, const CellBounds& cell);

/// Share of cell (row, col) covered by the region, in [0, 1].
double coverage_fraction(const Region& region, const GridSpec& spec, int row, int col);

struct CoverageEntry {
  int row;
  int col;
  double fraction;
  double area_km2;

  bool operator==(const CoverageEntry&) const = default;
};

struct RegionCoverage {
  std::string region_id;
  std::vector<CoverageEntry> cells;  // row-major order

  bool operator==(const RegionCoverage&) const = default;
};

/// Sparse region -> cell map. Regions are sorted by id; cells with zero
/// coverage are absent.
class CoverageMatrix {
 public:
  CoverageMatrix(GridSpec spec, Level level, std::vector<RegionCoverage> regions);

  const GridSpec& spec() const noexcept { return spec_; }
  Level level() const noexcept { return level_; }
  const std::vector<RegionCoverage>& regions() const noexcept { return regions_; }
  std::size_t size() const noexcept { return regions_.size(); }
  const RegionCoverage* find(std::string_view id) const;

  /// Ids of regions that cover no cell at all.
  std::vector<std::string> empty_regions() const;

  bool operator==(const CoverageMatrix&) const = default;

 private:
  GridSpec spec_;
  Level level_;
  std::vector<RegionCoverage> regions_;
};

struct CoverageOptions {
  /// Worker threads; 0 means hardware concurrency.
  unsigned jobs = 0;
};

/// Coverage of every region over the grid. Output is independent of the
/// worker count.
CoverageMatrix build_coverage(const GridSpec& spec, const RegionSet& regions, const CoverageOptions& options = {});

/// GeoJSON FeatureCollection of Polygon/MultiPolygon features with
/// properties region_id, name, level and optional parent_id. When `level`
/// is set, features of other levels are skipped. Degenerate rings are
/// dropped and reported through `warnings`.
RegionSet parse_geojson(std::istream& in, std::optional<Level> level = std::nullopt,
                        std::vector<std::string>* warnings = nullptr);
RegionSet load_geojson(const std::string& path, std::optional<Level> level = std::nullopt,
                       std::vector<std::string>* warnings = nullptr);
std::string to_geojson(const RegionSet& regions);

/// Coverage cache: header with the grid spec, level and region count, one
/// `empty=<id>` line per region without cells, then `region_id row col f a`
/// lines sorted by (region_id, row, col).
void write_coverage(std::ostream& out, const CoverageMatrix& coverage);
std::string write_coverage(const CoverageMatrix& coverage);
CoverageMatrix read_coverage(std::istream& in);
CoverageMatrix load_coverage(const std::string& path);

}  // namespace zonalclim
