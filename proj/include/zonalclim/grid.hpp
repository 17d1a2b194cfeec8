#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

#include "zonalclim/timestamp.hpp"

namespace zonalclim {

/// Row-major value plane; row 0 is the northernmost row.
template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PlaneXd = Plane<double>;
using Mask = Plane<bool>;

/// IUGG mean Earth radius.
inline constexpr double kEarthRadiusKm = 6371.0088;

enum class Registration { corner, center };

std::string_view to_string(Registration r);
Registration parse_registration(std::string_view s);

/// Regular lon/lat grid. (lon_west, lat_north) is the outer corner of cell
/// (0, 0) under corner registration and its center under center
/// registration.
struct GridSpec {
  int rows = 0;
  int cols = 0;
  double lon_west = -180.0;
  double lat_north = 90.0;
  double cell_size = 1.0;
  Registration registration = Registration::corner;

  /// Throws ValidationError when the geometry is not a legal grid.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

struct CellBounds {
  double lon_w;
  double lon_e;
  double lat_s;
  double lat_n;

  double planar_area() const noexcept { return (lon_e - lon_w) * (lat_n - lat_s); }
  double center_lon() const noexcept { return 0.5 * (lon_w + lon_e); }
  double center_lat() const noexcept { return 0.5 * (lat_s + lat_n); }
};

/// Bounds of cell (row, col) in degrees with latitudes clamped to [-90, 90].
/// Edges are evaluated as origin + k * cell_size so neighbours share edges
/// bit for bit.
CellBounds cell_bounds(const GridSpec& spec, int row, int col);

/// Unclamped nominal latitude of the centre of a row.
double row_center_lat(const GridSpec& spec, int row);

/// Spherical area (km^2) of any cell in `row`.
double cell_area(const GridSpec& spec, int row);

/// cell_area for every row.
Eigen::VectorXd row_areas(const GridSpec& spec);

enum class Variable { temperature, precipitation, spei, population_density, nightlight, weight, generic };

std::string_view to_string(Variable v);
Variable parse_variable(std::string_view s);
std::string_view units_of(Variable v);

/// One time-stamped value plane. Masked cells always hold NaN; a NaN in the
/// input values is treated as masked.
class Raster {
 public:
  Raster(GridSpec spec, PlaneXd values, Mask missing, Variable variable, Timestamp timestamp);
  Raster(GridSpec spec, PlaneXd values, Variable variable, Timestamp timestamp);

  const GridSpec& spec() const noexcept { return spec_; }
  const PlaneXd& values() const noexcept { return values_; }
  const Mask& missing() const noexcept { return missing_; }
  Variable variable() const noexcept { return variable_; }
  std::string_view units() const noexcept { return units_of(variable_); }
  const Timestamp& timestamp() const noexcept { return timestamp_; }

  bool is_missing(int row, int col) const { return missing_(row, col); }
  double operator()(int row, int col) const { return values_(row, col); }

 private:
  GridSpec spec_;
  PlaneXd values_;
  Mask missing_;
  Variable variable_;
  Timestamp timestamp_;
};

/// Time-ordered frames on one shared grid.
class RasterSeries {
 public:
  RasterSeries(GridSpec spec, Frequency frequency, std::vector<Raster> frames);

  const GridSpec& spec() const noexcept { return spec_; }
  Frequency frequency() const noexcept { return frequency_; }
  const std::vector<Raster>& frames() const noexcept { return frames_; }
  std::size_t size() const noexcept { return frames_.size(); }
  const Raster& operator[](std::size_t i) const { return frames_[i]; }
  Variable variable() const;

 private:
  GridSpec spec_;
  Frequency frequency_;
  std::vector<Raster> frames_;
};

}  // namespace zonalclim
