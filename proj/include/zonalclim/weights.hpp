#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "zonalclim/grid.hpp"
#include "zonalclim/grid_archive.hpp"

namespace zonalclim {

enum class WeightKind { unweighted, population, nightlight };

std::string_view to_string(WeightKind k);
WeightKind parse_weight_kind(std::string_view s);

/// Non-negative per-cell weights tagged with the base year they were
/// measured in. base_year is present iff kind != unweighted.
class WeightGrid {
 public:
  WeightGrid(GridSpec spec, PlaneXd values, WeightKind kind, std::optional<int> base_year);

  const GridSpec& spec() const noexcept { return spec_; }
  const PlaneXd& values() const noexcept { return values_; }
  WeightKind kind() const noexcept { return kind_; }
  const std::optional<int>& base_year() const noexcept { return base_year_; }
  double operator()(int row, int col) const { return values_(row, col); }

 private:
  GridSpec spec_;
  PlaneXd values_;
  WeightKind kind_;
  std::optional<int> base_year_;
};

/// Population count proxy: density (persons/km^2) times spherical cell
/// area. Masked density cells weigh 0.
WeightGrid population_weight(const Raster& density, const GridSpec& spec, int base_year);

/// Night-light radiance used directly as the weight; masked cells weigh 0.
WeightGrid nightlight_weight(const Raster& radiance, int base_year);

WeightGrid unweighted(const GridSpec& spec);

/// Mean of each factor x factor block, anchored at the upper-left cell.
/// Masked fine cells are skipped; an all-masked block is masked.
Raster downsample_block_mean(const Raster& fine, int factor);

/// Zero the cells whose centre lies strictly poleward of +/-lat_cut and
/// whose value is exactly 0 in every reference grid. Everything else is
/// returned unchanged.
Raster aurora_correct(const Raster& target, const std::array<Raster, 3>& refs, double lat_cut = 45.0);

/// Resample a corner-registered n x m weight grid onto the center-registered
/// (n+1) x m grid offset by half a cell: each target cell is the plain mean
/// of the source cells its footprint intersects. Longitude wraps when the
/// source spans 360 degrees.
WeightGrid resample_half_offset(const WeightGrid& weights, const GridSpec& target);

/// Grid Archive form (variable=weight, extra keys kind= and base_year=).
/// The single frame is stamped with the base year, or 0000 when unweighted.
RasterSeries to_series(const WeightGrid& weights);
ArchiveOptions weight_archive_options(const WeightGrid& weights, Encoding encoding = Encoding::text);
WeightGrid weight_grid_from_archive(const ParsedArchive& archive);
WeightGrid load_weight_grid(const std::string& path);

}  // namespace zonalclim
