#include "zonalclim/zonal.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "zonalclim/compensated_sum.hpp"
#include "zonalclim/error.hpp"

namespace zonalclim {

void SeriesTable::validate() const {
  if (values.rows() != static_cast<Eigen::Index>(regions.size()) ||
      values.cols() != static_cast<Eigen::Index>(times.size()))
    throw ValidationError("table values are " + std::to_string(values.rows()) + "x" + std::to_string(values.cols()) +
                          " for " + std::to_string(regions.size()) + " regions and " + std::to_string(times.size()) +
                          " timestamps");
  for (std::size_t i = 1; i < regions.size(); ++i)
    if (!(regions[i - 1] < regions[i])) throw ValidationError("table regions not strictly sorted at '" + regions[i] + "'");
  for (std::size_t t = 1; t < times.size(); ++t)
    if (!(times[t - 1] < times[t])) throw ValidationError("table timestamps not strictly increasing at " + times[t].str());
}

std::optional<Eigen::Index> SeriesTable::region_index(const std::string& id) const {
  auto it = std::lower_bound(regions.begin(), regions.end(), id);
  if (it == regions.end() || *it != id) return std::nullopt;
  return static_cast<Eigen::Index>(it - regions.begin());
}

bool SeriesTable::identical(const SeriesTable& other) const {
  if (!(info == other.info) || regions != other.regions || times != other.times ||
      values.rows() != other.values.rows() || values.cols() != other.values.cols())
    return false;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double a = values.data()[i];
    const double b = other.values.data()[i];
    if (std::isnan(a) != std::isnan(b)) return false;
    if (!std::isnan(a) && std::bit_cast<std::uint64_t>(a) != std::bit_cast<std::uint64_t>(b)) return false;
  }
  return true;
}

std::vector<std::optional<double>> aggregate(const Raster& x, const CoverageMatrix& coverage, const WeightGrid& weights) {
  if (!(x.spec() == coverage.spec()) || !(weights.spec() == coverage.spec()))
    throw ShapeError("climate, coverage and weight grids must share one grid spec");

  std::vector<std::optional<double>> out;
  out.reserve(coverage.size());
  for (const RegionCoverage& rc : coverage.regions()) {
    CompensatedSum<double> numerator;
    CompensatedSum<double> denominator;
    for (const CoverageEntry& e : rc.cells) {
      if (x.is_missing(e.row, e.col)) continue;
      const double mass = e.area_km2 * e.fraction * weights(e.row, e.col);
      numerator.add(mass * x(e.row, e.col));
      denominator.add(mass);
    }
    const double den = denominator.value();
    out.push_back(den > 0.0 ? std::optional<double>(numerator.value() / den) : std::nullopt);
  }
  return out;
}

SeriesTable aggregate_series(const RasterSeries& xs, const CoverageMatrix& coverage, const WeightGrid& weights,
                             const AggregateOptions& options) {
  SeriesTable table;
  table.info = {coverage.level(), xs.variable(), std::string(units_of(xs.variable())), weights.kind(),
                weights.base_year(), xs.frequency()};
  for (const RegionCoverage& rc : coverage.regions()) table.regions.push_back(rc.region_id);
  for (const Raster& f : xs.frames()) table.times.push_back(f.timestamp());
  table.values.setConstant(static_cast<Eigen::Index>(table.regions.size()),
                           static_cast<Eigen::Index>(table.times.size()), std::numeric_limits<double>::quiet_NaN());

  const std::size_t frames = xs.size();
  unsigned jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(frames, 1)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t t = next++; t < frames; t = next++) {
        const auto column = aggregate(xs[t], coverage, weights);
        for (std::size_t i = 0; i < column.size(); ++i)
          if (column[i]) table.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = *column[i];
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = frames;
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return table;
}

}  // namespace zonalclim
