#include "zonalclim/weights.hpp"

#include <cmath>
#include <limits>

#include "zonalclim/error.hpp"
#include "zonalclim/numeric_text.hpp"

namespace zonalclim {

std::string_view to_string(WeightKind k) {
  switch (k) {
    case WeightKind::unweighted:
      return "unweighted";
    case WeightKind::population:
      return "population";
    case WeightKind::nightlight:
      return "nightlight";
  }
  return "unweighted";
}

WeightKind parse_weight_kind(std::string_view s) {
  if (s == "unweighted") return WeightKind::unweighted;
  if (s == "population") return WeightKind::population;
  if (s == "nightlight") return WeightKind::nightlight;
  throw ValidationError("unknown weighting '" + std::string(s) + "'");
}

WeightGrid::WeightGrid(GridSpec spec, PlaneXd values, WeightKind kind, std::optional<int> base_year)
    : spec_(spec), values_(std::move(values)), kind_(kind), base_year_(base_year) {
  spec_.validate();
  if (values_.rows() != spec_.rows || values_.cols() != spec_.cols) throw ShapeError("weight plane does not match grid");
  if (!values_.allFinite() || (values_ < 0.0).any()) throw ValidationError("weights must be finite and non-negative");
  if ((kind_ == WeightKind::unweighted) == base_year_.has_value())
    throw ValidationError("base_year must be present exactly when the grid is weighted");
}

WeightGrid population_weight(const Raster& density, const GridSpec& spec, int base_year) {
  if (!(density.spec() == spec)) throw ShapeError("population density grid does not match target spec");
  const PlaneXd d = density.missing().select(0.0, density.values());
  if ((d < 0.0).any()) throw ValidationError("negative population density");
  const Eigen::VectorXd areas = row_areas(spec);
  PlaneXd w = d.colwise() * areas.array();
  return WeightGrid(spec, std::move(w), WeightKind::population, base_year);
}

WeightGrid nightlight_weight(const Raster& radiance, int base_year) {
  PlaneXd w = radiance.missing().select(0.0, radiance.values());
  if ((w < 0.0).any()) throw ValidationError("negative night-light radiance");
  return WeightGrid(radiance.spec(), std::move(w), WeightKind::nightlight, base_year);
}

WeightGrid unweighted(const GridSpec& spec) {
  return WeightGrid(spec, PlaneXd::Ones(spec.rows, spec.cols), WeightKind::unweighted, std::nullopt);
}

Raster downsample_block_mean(const Raster& fine, int factor) {
  const GridSpec& in = fine.spec();
  if (factor <= 0) throw ValidationError("downsampling factor must be positive");
  if (in.rows % factor != 0 || in.cols % factor != 0)
    throw ShapeError(std::to_string(in.rows) + "x" + std::to_string(in.cols) + " grid is not divisible by " +
                     std::to_string(factor));

  GridSpec out = in;
  out.rows = in.rows / factor;
  out.cols = in.cols / factor;
  out.cell_size = in.cell_size * factor;
  if (in.registration == Registration::center) {
    // Keep the outer corner fixed and move the origin to the new centre.
    out.lon_west = in.lon_west - 0.5 * in.cell_size + 0.5 * out.cell_size;
    out.lat_north = in.lat_north + 0.5 * in.cell_size - 0.5 * out.cell_size;
  }

  const PlaneXd present = (!fine.missing()).cast<double>();
  const PlaneXd filled = fine.missing().select(0.0, fine.values());
  PlaneXd mean(out.rows, out.cols);
  Mask missing(out.rows, out.cols);
  for (int r = 0; r < out.rows; ++r) {
    for (int c = 0; c < out.cols; ++c) {
      const double n = present.block(r * factor, c * factor, factor, factor).sum();
      missing(r, c) = n == 0.0;
      mean(r, c) = n == 0.0 ? 0.0 : filled.block(r * factor, c * factor, factor, factor).sum() / n;
    }
  }
  return Raster(out, std::move(mean), std::move(missing), fine.variable(), fine.timestamp());
}

Raster aurora_correct(const Raster& target, const std::array<Raster, 3>& refs, double lat_cut) {
  const GridSpec& spec = target.spec();
  for (const Raster& ref : refs)
    if (!(ref.spec() == spec)) throw ShapeError("aurora reference grid does not match target");

  PlaneXd values = target.values();
  Mask missing = target.missing();
  for (int r = 0; r < spec.rows; ++r) {
    if (!(std::abs(row_center_lat(spec, r)) > lat_cut)) continue;
    for (int c = 0; c < spec.cols; ++c) {
      bool dark = true;
      for (const Raster& ref : refs) dark = dark && !ref.is_missing(r, c) && ref(r, c) == 0.0;
      if (dark) {
        values(r, c) = 0.0;
        missing(r, c) = false;
      }
    }
  }
  return Raster(spec, std::move(values), std::move(missing), target.variable(), target.timestamp());
}

WeightGrid resample_half_offset(const WeightGrid& weights, const GridSpec& target) {
  const GridSpec& src = weights.spec();
  target.validate();
  if (src.registration != Registration::corner || target.registration != Registration::center)
    throw AlignmentError("half-offset resampling maps a corner-registered grid onto a center-registered one");
  const double cs = src.cell_size;
  if (std::abs(target.cell_size - cs) > 1e-12 * cs) throw AlignmentError("source and target cell sizes differ");
  if (target.rows != src.rows + 1 || target.cols != src.cols)
    throw AlignmentError("target must have one more row and the same columns as the source");
  // Outer corner of the target footprint sits half a cell west and north of
  // the source corner.
  const double lon_offset = src.lon_west - (target.lon_west - 0.5 * cs);
  const double lat_offset = (target.lat_north + 0.5 * cs) - src.lat_north;
  if (std::abs(lon_offset - 0.5 * cs) > 1e-9 * cs || std::abs(lat_offset - 0.5 * cs) > 1e-9 * cs)
    throw AlignmentError("target grid is not offset by exactly half a cell");

  const bool periodic = std::abs(src.cols * cs - 360.0) <= 1e-9 * cs;
  const PlaneXd& w = weights.values();
  PlaneXd out(target.rows, target.cols);
  for (int r = 0; r < target.rows; ++r) {
    const int r0 = std::max(r - 1, 0);
    const int r1 = std::min(r, src.rows - 1);
    for (int c = 0; c < target.cols; ++c) {
      int c0 = c - 1;
      const int c1 = c;
      if (c0 < 0) c0 = periodic ? src.cols - 1 : c1;
      double sum = 0.0;
      int n = 0;
      for (int sr = r0; sr <= r1; ++sr) {
        sum += w(sr, c1);
        ++n;
        if (c0 != c1) {
          sum += w(sr, c0);
          ++n;
        }
      }
      out(r, c) = sum / n;
    }
  }
  return WeightGrid(target, std::move(out), weights.kind(), weights.base_year());
}

RasterSeries to_series(const WeightGrid& weights) {
  const Timestamp ts{weights.base_year().value_or(0), 0, 0};
  Raster frame(weights.spec(), weights.values(), Variable::weight, ts);
  return RasterSeries(weights.spec(), Frequency::annual, {std::move(frame)});
}

ArchiveOptions weight_archive_options(const WeightGrid& weights, Encoding encoding) {
  ArchiveOptions options;
  options.encoding = encoding;
  options.extra["kind"] = std::string(to_string(weights.kind()));
  options.extra["base_year"] = weights.base_year() ? std::to_string(*weights.base_year()) : "none";
  return options;
}

WeightGrid weight_grid_from_archive(const ParsedArchive& archive) {
  const RasterSeries& s = archive.series;
  if (s.size() != 1) throw ValidationError("weight archive must hold exactly one frame");
  const auto kind_it = archive.options.extra.find("kind");
  const auto year_it = archive.options.extra.find("base_year");
  if (kind_it == archive.options.extra.end()) throw ValidationError("weight archive lacks 'kind'");
  const WeightKind kind = parse_weight_kind(kind_it->second);
  std::optional<int> base_year;
  if (year_it != archive.options.extra.end() && year_it->second != "none") {
    const auto y = parse_int(year_it->second);
    if (!y) throw ValidationError("malformed base_year '" + year_it->second + "'");
    base_year = static_cast<int>(*y);
  }
  const Raster& frame = s[0];
  return WeightGrid(s.spec(), frame.missing().select(0.0, frame.values()), kind, base_year);
}

WeightGrid load_weight_grid(const std::string& path) { return weight_grid_from_archive(load_grid_archive_full(path)); }

}  // namespace zonalclim
