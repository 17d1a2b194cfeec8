#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "zonalclim/geom.hpp"
#include "zonalclim/grid.hpp"
#include "zonalclim/weights.hpp"

namespace zonalclim {

/// Descriptive fields shared by every table built from one dataset.
struct TableInfo {
  Level level = Level::L0;
  Variable variable = Variable::generic;
  std::string units;
  WeightKind weighting = WeightKind::unweighted;
  std::optional<int> base_year;
  Frequency frequency = Frequency::monthly;

  bool operator==(const TableInfo&) const = default;
};

/// Region x time values. Rows follow `regions` (sorted ids), columns follow
/// `times` (strictly increasing); NaN marks a missing value.
struct SeriesTable {
  TableInfo info;
  std::vector<std::string> regions;
  std::vector<Timestamp> times;
  Eigen::MatrixXd values;

  /// Throws ValidationError if ordering, uniqueness or dimensions are off.
  void validate() const;

  std::optional<double> at(Eigen::Index region, Eigen::Index time) const {
    const double v = values(region, time);
    return std::isnan(v) ? std::nullopt : std::optional<double>(v);
  }

  std::optional<Eigen::Index> region_index(const std::string& id) const;

  /// Equality that treats two missing cells as equal and compares values
  /// bit for bit otherwise.
  bool identical(const SeriesTable& other) const;
};

/// Area-, fraction- and weight-weighted mean of `x` over each region of the
/// coverage matrix, in coverage order:
///
///   y_i = sum_j a_j f_ij w_j x_j / sum_j a_j f_ij w_j
///
/// Masked x cells are left out of both sums. A region whose remaining
/// weight mass is zero yields nullopt. Sums run in row-major cell order
/// with compensated accumulation.
std::vector<std::optional<double>> aggregate(const Raster& x, const CoverageMatrix& coverage, const WeightGrid& weights);

struct AggregateOptions {
  unsigned jobs = 0;
};

/// aggregate() applied to every frame.
SeriesTable aggregate_series(const RasterSeries& xs, const CoverageMatrix& coverage, const WeightGrid& weights,
                             const AggregateOptions& options = {});

}  // namespace zonalclim
