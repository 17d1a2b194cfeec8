#include "zonalclim/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "zonalclim/compensated_sum.hpp"
#include "zonalclim/error.hpp"

namespace zonalclim {

std::string_view to_string(UpscaleStat s) { return s == UpscaleStat::mean ? "mean" : "sum"; }

UpscaleStat parse_upscale_stat(std::string_view s) {
  if (s == "mean") return UpscaleStat::mean;
  if (s == "sum") return UpscaleStat::sum;
  throw ValidationError("unknown statistic '" + std::string(s) + "'");
}

UpscaleStat default_stat(Variable v) { return v == Variable::precipitation ? UpscaleStat::sum : UpscaleStat::mean; }

namespace {

int rank(Frequency f) { return static_cast<int>(f); }

/// Number of `fine` sub-periods that make up the group `group`.
int expected_members(const Timestamp& group, Frequency fine) {
  if (fine == Frequency::monthly) return 12;
  if (group.month != 0) return days_in_month(group.year, group.month);
  int days = 0;
  for (int m = 1; m <= 12; ++m) days += days_in_month(group.year, m);
  return days;
}

struct Group {
  Timestamp key;
  std::vector<Eigen::Index> members;
};

std::vector<Group> group_times(const std::vector<Timestamp>& times, Frequency target) {
  std::vector<Group> groups;
  for (std::size_t t = 0; t < times.size(); ++t) {
    const Timestamp key = times[t].truncate(target);
    if (groups.empty() || !(groups.back().key == key)) groups.push_back({key, {}});
    groups.back().members.push_back(static_cast<Eigen::Index>(t));
  }
  return groups;
}

}  // namespace

SeriesTable upscale(const SeriesTable& table, Frequency target, UpscaleStat stat) {
  table.validate();
  if (table.info.variable == Variable::spei)
    throw UnsupportedVariableError("SPEI cannot be linearly aggregated across time; it is offered monthly only");
  if (target == Frequency::daily || rank(table.info.frequency) >= rank(target))
    throw FrequencyError("cannot upscale " + std::string(to_string(table.info.frequency)) + " data to " +
                         std::string(to_string(target)));

  const auto groups = group_times(table.times, target);
  SeriesTable out;
  out.info = table.info;
  out.info.frequency = target;
  out.regions = table.regions;
  for (const Group& g : groups) out.times.push_back(g.key);
  out.values.setConstant(table.values.rows(), static_cast<Eigen::Index>(groups.size()),
                         std::numeric_limits<double>::quiet_NaN());

  for (std::size_t k = 0; k < groups.size(); ++k) {
    const Group& g = groups[k];
    if (static_cast<int>(g.members.size()) != expected_members(g.key, table.info.frequency)) continue;
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
      CompensatedSum<double> sum;
      bool complete = true;
      for (Eigen::Index t : g.members) {
        const double v = table.values(i, t);
        if (std::isnan(v)) {
          complete = false;
          break;
        }
        sum.add(v);
      }
      if (!complete) continue;
      const double total = sum.value();
      out.values(i, static_cast<Eigen::Index>(k)) =
          stat == UpscaleStat::sum ? total : total / static_cast<double>(g.members.size());
    }
  }
  return out;
}

double empirical_quantile(std::span<const double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

std::string_view to_string(ThresholdMode m) { return m == ThresholdMode::absolute ? "absolute" : "quantile"; }
std::string_view to_string(ThresholdPeriod p) { return p == ThresholdPeriod::month ? "month" : "year"; }

ThresholdMode parse_threshold_mode(std::string_view s) {
  if (s == "absolute") return ThresholdMode::absolute;
  if (s == "quantile") return ThresholdMode::quantile;
  throw ValidationError("unknown threshold mode '" + std::string(s) + "'");
}

ThresholdPeriod parse_threshold_period(std::string_view s) {
  if (s == "month") return ThresholdPeriod::month;
  if (s == "year") return ThresholdPeriod::year;
  throw ValidationError("unknown threshold period '" + std::string(s) + "'");
}

void ThresholdSpec::validate() const {
  if (!std::isfinite(value)) throw ValidationError("threshold value must be finite");
  if (mode == ThresholdMode::quantile && !(value >= 0.0 && value <= 1.0))
    throw ValidationError("quantile threshold must lie in [0, 1]");
}

SeriesTable count_exceedance_days(const SeriesTable& daily, const ThresholdSpec& spec) {
  daily.validate();
  spec.validate();
  if (daily.info.frequency != Frequency::daily)
    throw FrequencyError("exceedance days need a daily table, got " + std::string(to_string(daily.info.frequency)));

  const Frequency target = spec.period == ThresholdPeriod::month ? Frequency::monthly : Frequency::annual;
  const auto groups = group_times(daily.times, target);
  SeriesTable out;
  out.info = daily.info;
  out.info.frequency = target;
  out.info.units = "days";
  out.regions = daily.regions;
  for (const Group& g : groups) out.times.push_back(g.key);
  out.values.setZero(daily.values.rows(), static_cast<Eigen::Index>(groups.size()));

  std::vector<double> history;
  for (Eigen::Index i = 0; i < daily.values.rows(); ++i) {
    double threshold = spec.value;
    if (spec.mode == ThresholdMode::quantile) {
      history.clear();
      for (Eigen::Index t = 0; t < daily.values.cols(); ++t)
        if (!std::isnan(daily.values(i, t))) history.push_back(daily.values(i, t));
      if (history.empty()) {
        out.values.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      threshold = empirical_quantile(history, spec.value);
    }
    for (std::size_t k = 0; k < groups.size(); ++k) {
      int count = 0;
      for (Eigen::Index t : groups[k].members) {
        const double v = daily.values(i, t);
        if (!std::isnan(v) && v > threshold) ++count;
      }
      out.values(i, static_cast<Eigen::Index>(k)) = count;
    }
  }
  return out;
}

}  // namespace zonalclim
