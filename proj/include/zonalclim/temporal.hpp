#pragma once

#include <span>
#include <string_view>

#include "zonalclim/zonal.hpp"

namespace zonalclim {

enum class UpscaleStat { mean, sum };

std::string_view to_string(UpscaleStat s);
UpscaleStat parse_upscale_stat(std::string_view s);

/// The natural statistic for a variable: sums for precipitation, means for
/// everything else.
UpscaleStat default_stat(Variable v);

/// Calendar-month or calendar-year regrouping of a finer table. A group is
/// missing unless every sub-period of the calendar group is present and
/// non-missing. SPEI tables cannot change frequency.
SeriesTable upscale(const SeriesTable& table, Frequency target, UpscaleStat stat);

/// Linear interpolation between order statistics at h = q (n - 1).
double empirical_quantile(std::span<const double> values, double q);

enum class ThresholdMode { absolute, quantile };
enum class ThresholdPeriod { month, year };

std::string_view to_string(ThresholdMode m);
std::string_view to_string(ThresholdPeriod p);
ThresholdMode parse_threshold_mode(std::string_view s);
ThresholdPeriod parse_threshold_period(std::string_view s);

struct ThresholdSpec {
  ThresholdMode mode = ThresholdMode::absolute;
  /// Variable units for absolute mode; q in [0, 1] for quantile mode.
  double value = 0.0;
  ThresholdPeriod period = ThresholdPeriod::year;

  void validate() const;
};

/// Days per region and period whose value is strictly above the threshold.
/// In quantile mode the threshold is the region's empirical quantile over
/// its whole daily record. Missing days never count; a region with no
/// present day in quantile mode has no threshold and reports missing.
SeriesTable count_exceedance_days(const SeriesTable& daily, const ThresholdSpec& spec);

}  // namespace zonalclim
