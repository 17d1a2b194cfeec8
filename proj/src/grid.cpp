#include "zonalclim/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "zonalclim/error.hpp"

namespace zonalclim {

std::string_view to_string(Registration r) { return r == Registration::corner ? "corner" : "center"; }

Registration parse_registration(std::string_view s) {
  if (s == "corner") return Registration::corner;
  if (s == "center") return Registration::center;
  throw ValidationError("unknown registration '" + std::string(s) + "'");
}

void GridSpec::validate() const {
  if (rows <= 0 || cols <= 0) throw ValidationError("grid dimensions must be positive");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw ValidationError("cell_size must be positive");
  if (!std::isfinite(lon_west) || !std::isfinite(lat_north)) throw ValidationError("grid origin must be finite");
  if (lon_west < -180.0 || lon_west >= 180.0) throw ValidationError("lon_west must lie in [-180, 180)");
  if (lat_north > 90.0 || lat_north < -90.0) throw ValidationError("lat_north must lie in [-90, 90]");
  const double tol = 1e-9 * cell_size;
  if (rows * cell_size > 180.0 + cell_size + tol)
    throw ValidationError("grid spans more than 180 degrees of latitude");
  if (cols * cell_size > 360.0 + tol) throw ValidationError("grid spans more than 360 degrees of longitude");
}

CellBounds cell_bounds(const GridSpec& spec, int row, int col) {
  if (row < 0 || row >= spec.rows || col < 0 || col >= spec.cols)
    throw IndexError("cell (" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                     std::to_string(spec.rows) + "x" + std::to_string(spec.cols) + " grid");
  const double half = spec.registration == Registration::center ? 0.5 * spec.cell_size : 0.0;
  const double lon0 = spec.lon_west - half;
  const double lat0 = spec.lat_north + half;
  CellBounds b;
  b.lon_w = lon0 + col * spec.cell_size;
  b.lon_e = lon0 + (col + 1) * spec.cell_size;
  b.lat_n = std::clamp(lat0 - row * spec.cell_size, -90.0, 90.0);
  b.lat_s = std::clamp(lat0 - (row + 1) * spec.cell_size, -90.0, 90.0);
  return b;
}

double row_center_lat(const GridSpec& spec, int row) {
  const double half = spec.registration == Registration::center ? 0.0 : 0.5 * spec.cell_size;
  return spec.lat_north - half - row * spec.cell_size;
}

double cell_area(const GridSpec& spec, int row) {
  const CellBounds b = cell_bounds(spec, row, 0);
  constexpr double deg = std::numbers::pi / 180.0;
  const double dlon = spec.cell_size * deg;
  return kEarthRadiusKm * kEarthRadiusKm * dlon * (std::sin(b.lat_n * deg) - std::sin(b.lat_s * deg));
}

Eigen::VectorXd row_areas(const GridSpec& spec) {
  Eigen::VectorXd a(spec.rows);
  for (int r = 0; r < spec.rows; ++r) a(r) = cell_area(spec, r);
  return a;
}

std::string_view to_string(Variable v) {
  switch (v) {
    case Variable::temperature:
      return "temperature";
    case Variable::precipitation:
      return "precipitation";
    case Variable::spei:
      return "spei";
    case Variable::population_density:
      return "population_density";
    case Variable::nightlight:
      return "nightlight";
    case Variable::weight:
      return "weight";
    case Variable::generic:
      return "generic";
  }
  return "generic";
}

Variable parse_variable(std::string_view s) {
  for (Variable v : {Variable::temperature, Variable::precipitation, Variable::spei, Variable::population_density,
                     Variable::nightlight, Variable::weight, Variable::generic})
    if (to_string(v) == s) return v;
  throw ValidationError("unknown variable '" + std::string(s) + "'");
}

std::string_view units_of(Variable v) {
  switch (v) {
    case Variable::temperature:
      return "degC";
    case Variable::precipitation:
      return "mm";
    case Variable::spei:
      return "1";
    case Variable::population_density:
      return "persons/km2";
    case Variable::nightlight:
      return "radiance";
    case Variable::weight:
    case Variable::generic:
      return "";
  }
  return "";
}

Raster::Raster(GridSpec spec, PlaneXd values, Mask missing, Variable variable, Timestamp timestamp)
    : spec_(spec), values_(std::move(values)), missing_(std::move(missing)), variable_(variable), timestamp_(timestamp) {
  spec_.validate();
  if (values_.rows() != spec_.rows || values_.cols() != spec_.cols || missing_.rows() != spec_.rows ||
      missing_.cols() != spec_.cols)
    throw ShapeError("raster plane is " + std::to_string(values_.rows()) + "x" + std::to_string(values_.cols()) +
                     ", grid is " + std::to_string(spec_.rows) + "x" + std::to_string(spec_.cols));
  missing_ = missing_ || values_.isNaN();
  values_ = missing_.select(std::numeric_limits<double>::quiet_NaN(), values_);
}

Raster::Raster(GridSpec spec, PlaneXd values, Variable variable, Timestamp timestamp)
    : Raster(spec, values, Mask::Constant(values.rows(), values.cols(), false), variable, timestamp) {}

RasterSeries::RasterSeries(GridSpec spec, Frequency frequency, std::vector<Raster> frames)
    : spec_(spec), frequency_(frequency), frames_(std::move(frames)) {
  spec_.validate();
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const Raster& f = frames_[i];
    if (!(f.spec() == spec_)) throw ShapeError("frame " + std::to_string(i) + " does not share the series grid");
    if (f.timestamp().precision() != frequency_)
      throw FrequencyError("frame timestamp " + f.timestamp().str() + " inconsistent with " +
                           std::string(to_string(frequency_)) + " frequency");
    if (i > 0 && !(frames_[i - 1].timestamp() < f.timestamp()))
      throw ValidationError("timestamps not strictly increasing at frame " + std::to_string(i));
    if (i > 0 && f.variable() != frames_[0].variable())
      throw ValidationError("frame " + std::to_string(i) + " changes variable");
  }
}

Variable RasterSeries::variable() const { return frames_.empty() ? Variable::generic : frames_.front().variable(); }

}  // namespace zonalclim
