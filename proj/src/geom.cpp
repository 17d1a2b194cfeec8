#include "zonalclim/geom.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "zonalclim/error.hpp"

namespace zonalclim {

std::string_view to_string(Level l) { return l == Level::L0 ? "L0" : "L1"; }

Level parse_level(std::string_view s) {
  if (s == "L0" || s == "0" || s == "GADM0") return Level::L0;
  if (s == "L1" || s == "1" || s == "GADM1") return Level::L1;
  throw ValidationError("unknown level '" + std::string(s) + "'");
}

RegionSet::RegionSet(Level level, std::vector<Region> regions) : level_(level), regions_(std::move(regions)) {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const Region& r = regions_[i];
    if (r.level != level_)
      throw ValidationError("region '" + r.region_id + "' is " + std::string(to_string(r.level)) + ", set is " +
                            std::string(to_string(level_)));
    if (r.level == Level::L1 && !r.parent_id) throw ValidationError("L1 region '" + r.region_id + "' has no parent_id");
    if (!index_.emplace(r.region_id, i).second) throw ValidationError("duplicate region_id '" + r.region_id + "'");
  }
}

const Region* RegionSet::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &regions_[it->second];
}

namespace {

/// Shoelace over an open vertex list, relative to `ref` to limit
/// cancellation.
double open_signed_area(const std::vector<Point>& pts, const Point& ref) {
  const std::size_t n = pts.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = pts[i] - ref;
    const Point b = pts[(i + 1) % n] - ref;
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * twice;
}

std::vector<Point> open_ring(const Ring& ring) {
  if (ring.size() < 2) return {};
  return {ring.begin(), ring.end() - 1};
}

enum class Side { west, east, south, north };

/// One Sutherland-Hodgman pass keeping the half-plane on the inner side of
/// the given edge.
std::vector<Point> clip(const std::vector<Point>& poly, Side side, double v) {
  std::vector<Point> out;
  if (poly.empty()) return out;
  out.reserve(poly.size() + 4);
  auto inside = [&](const Point& p) {
    switch (side) {
      case Side::west:
        return p.x() >= v;
      case Side::east:
        return p.x() <= v;
      case Side::south:
        return p.y() >= v;
      case Side::north:
        return p.y() <= v;
    }
    return false;
  };
  auto cross = [&](const Point& a, const Point& b) -> Point {
    if (side == Side::west || side == Side::east) {
      const double t = (v - a.x()) / (b.x() - a.x());
      return {v, a.y() + t * (b.y() - a.y())};
    }
    const double t = (v - a.y()) / (b.y() - a.y());
    return {a.x() + t * (b.x() - a.x()), v};
  };
  Point prev = poly.back();
  bool prev_in = inside(prev);
  for (const Point& cur : poly) {
    const bool cur_in = inside(cur);
    if (cur_in) {
      if (!prev_in) out.push_back(cross(prev, cur));
      out.push_back(cur);
    } else if (prev_in) {
      out.push_back(cross(prev, cur));
    }
    prev = cur;
    prev_in = cur_in;
  }
  return out;
}

struct Box {
  double lon_min, lat_min, lon_max, lat_max;
};

Box bounding_box(const Ring& ring) {
  Box b{INFINITY, INFINITY, -INFINITY, -INFINITY};
  for (const Point& p : ring) {
    b.lon_min = std::min(b.lon_min, p.x());
    b.lon_max = std::max(b.lon_max, p.x());
    b.lat_min = std::min(b.lat_min, p.y());
    b.lat_max = std::max(b.lat_max, p.y());
  }
  return b;
}

bool disjoint(const Box& b, const CellBounds& c) {
  return b.lon_max <= c.lon_w || b.lon_min >= c.lon_e || b.lat_max <= c.lat_s || b.lat_min >= c.lat_n;
}

}  // namespace

double signed_area(const Ring& ring) {
  if (ring.size() < 4) return 0.0;
  return open_signed_area(open_ring(ring), ring.front());
}

double planar_area(const Polygon& polygon) {
  double a = std::abs(signed_area(polygon.outer));
  for (const Ring& h : polygon.holes) a -= std::abs(signed_area(h));
  return a;
}

double planar_area(const MultiPolygon& geometry) {
  double a = 0.0;
  for (const Polygon& p : geometry) a += planar_area(p);
  return a;
}

void normalize_orientation(Polygon& polygon) {
  if (signed_area(polygon.outer) < 0) std::reverse(polygon.outer.begin(), polygon.outer.end());
  for (Ring& h : polygon.holes)
    if (signed_area(h) > 0) std::reverse(h.begin(), h.end());
}

bool contains(const Polygon& polygon, const Point& p) {
  bool inside = false;
  auto scan = [&](const Ring& ring) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const Point& a = ring[i];
      const Point& b = ring[i + 1];
      if ((a.y() > p.y()) != (b.y() > p.y())) {
        const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
        if (p.x() < x) inside = !inside;
      }
    }
  };
  scan(polygon.outer);
  for (const Ring& h : polygon.holes) scan(h);
  return inside;
}

double clip_area(const Polygon& polygon, const CellBounds& cell) {
  if (polygon.outer.size() < 4 || disjoint(bounding_box(polygon.outer), cell)) return 0.0;
  const Point ref(cell.lon_w, cell.lat_s);
  auto ring_area = [&](const Ring& ring) {
    auto pts = clip(open_ring(ring), Side::west, cell.lon_w);
    pts = clip(pts, Side::east, cell.lon_e);
    pts = clip(pts, Side::south, cell.lat_s);
    pts = clip(pts, Side::north, cell.lat_n);
    return open_signed_area(pts, ref);
  };
  double area = ring_area(polygon.outer);
  for (const Ring& h : polygon.holes) area += ring_area(h);
  return std::clamp(area, 0.0, cell.planar_area());
}

double coverage_fraction(const Region& region, const GridSpec& spec, int row, int col) {
  const CellBounds cell = cell_bounds(spec, row, col);
  const double cell_area = cell.planar_area();
  if (cell_area <= 0.0) return 0.0;
  double covered = 0.0;
  for (const Polygon& p : region.geometry) covered += clip_area(p, cell);
  return std::clamp(covered / cell_area, 0.0, 1.0);
}

CoverageMatrix::CoverageMatrix(GridSpec spec, Level level, std::vector<RegionCoverage> regions)
    : spec_(spec), level_(level), regions_(std::move(regions)) {
  spec_.validate();
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    const RegionCoverage& rc = regions_[i];
    if (i > 0 && !(regions_[i - 1].region_id < rc.region_id))
      throw ValidationError("coverage regions not strictly sorted at '" + rc.region_id + "'");
    for (std::size_t k = 0; k < rc.cells.size(); ++k) {
      const CoverageEntry& e = rc.cells[k];
      if (e.row < 0 || e.row >= spec_.rows || e.col < 0 || e.col >= spec_.cols)
        throw IndexError("coverage cell outside grid for region '" + rc.region_id + "'");
      if (!(e.fraction > 0.0 && e.fraction <= 1.0))
        throw ValidationError("coverage fraction outside (0, 1] for region '" + rc.region_id + "'");
      if (k > 0) {
        const CoverageEntry& p = rc.cells[k - 1];
        if (!(p.row < e.row || (p.row == e.row && p.col < e.col)))
          throw ValidationError("coverage cells not in row-major order for region '" + rc.region_id + "'");
      }
    }
  }
}

const RegionCoverage* CoverageMatrix::find(std::string_view id) const {
  auto it = std::lower_bound(regions_.begin(), regions_.end(), id,
                             [](const RegionCoverage& rc, std::string_view key) { return rc.region_id < key; });
  return it != regions_.end() && it->region_id == id ? &*it : nullptr;
}

std::vector<std::string> CoverageMatrix::empty_regions() const {
  std::vector<std::string> ids;
  for (const RegionCoverage& rc : regions_)
    if (rc.cells.empty()) ids.push_back(rc.region_id);
  return ids;
}

namespace {

constexpr double kMinFraction = 1e-12;

struct Contribution {
  long cell;
  double area;
};

/// Row-strip sweep for one polygon. Cells touched by no edge are decided by
/// crossing parity at the row's centre line; every other cell inside the
/// polygon's bounding box is clipped exactly.
void sweep_polygon(const GridSpec& spec, const Polygon& polygon, std::vector<Contribution>& out) {
  const Box box = bounding_box(polygon.outer);
  const double half = spec.registration == Registration::center ? 0.5 * spec.cell_size : 0.0;
  const double lon0 = spec.lon_west - half;
  const double lat0 = spec.lat_north + half;
  const double cs = spec.cell_size;

  auto clamp_row = [&](double v) { return static_cast<int>(std::clamp(std::floor(v), 0.0, spec.rows - 1.0)); };
  auto clamp_col = [&](double v) { return static_cast<int>(std::clamp(std::floor(v), 0.0, spec.cols - 1.0)); };
  if (box.lon_max <= lon0 || box.lon_min >= lon0 + spec.cols * cs) return;
  const int row_lo = clamp_row((lat0 - box.lat_max) / cs);
  const int row_hi = clamp_row((lat0 - box.lat_min) / cs);
  const int col_lo = clamp_col((box.lon_min - lon0) / cs);
  const int col_hi = clamp_col((box.lon_max - lon0) / cs);
  const int width = col_hi - col_lo + 1;

  std::vector<std::vector<Point>> rings;
  rings.push_back(open_ring(polygon.outer));
  for (const Ring& h : polygon.holes) rings.push_back(open_ring(h));

  std::vector<char> boundary(width);
  std::vector<double> crossings;
  std::vector<std::vector<Point>> strips(rings.size());

  for (int r = row_lo; r <= row_hi; ++r) {
    const CellBounds row_bounds = cell_bounds(spec, r, 0);
    const double lat_s = row_bounds.lat_s;
    const double lat_n = row_bounds.lat_n;
    if (!(lat_n > lat_s) || box.lat_max <= lat_s || box.lat_min >= lat_n) continue;

    for (std::size_t k = 0; k < rings.size(); ++k)
      strips[k] = clip(clip(rings[k], Side::south, lat_s), Side::north, lat_n);
    if (strips[0].empty()) continue;

    std::fill(boundary.begin(), boundary.end(), 0);
    crossings.clear();
    const double yc = 0.5 * (lat_s + lat_n);
    for (const auto& ring : rings) {
      for (std::size_t i = 0; i < ring.size(); ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % ring.size()];
        if (std::max(a.y(), b.y()) < lat_s || std::min(a.y(), b.y()) > lat_n) continue;
        double x_lo = std::min(a.x(), b.x());
        double x_hi = std::max(a.x(), b.x());
        if (a.y() != b.y()) {
          const double t_s = (lat_s - a.y()) / (b.y() - a.y());
          const double t_n = (lat_n - a.y()) / (b.y() - a.y());
          const double t0 = std::clamp(std::min(t_s, t_n), 0.0, 1.0);
          const double t1 = std::clamp(std::max(t_s, t_n), 0.0, 1.0);
          const double xa = a.x() + t0 * (b.x() - a.x());
          const double xb = a.x() + t1 * (b.x() - a.x());
          x_lo = std::min(xa, xb);
          x_hi = std::max(xa, xb);
        }
        // One extra column either side keeps edges lying on a cell
        // boundary on the exact path.
        const int c0 = static_cast<int>(std::floor((x_lo - lon0) / cs)) - 1;
        const int c1 = static_cast<int>(std::floor((x_hi - lon0) / cs)) + 1;
        for (int c = std::max(c0, col_lo); c <= std::min(c1, col_hi); ++c) boundary[c - col_lo] = 1;
        if ((a.y() > yc) != (b.y() > yc)) crossings.push_back(a.x() + (yc - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
      }
    }
    std::sort(crossings.begin(), crossings.end());

    for (int c = col_lo; c <= col_hi; ++c) {
      const CellBounds cell = cell_bounds(spec, r, c);
      double area = 0.0;
      if (boundary[c - col_lo]) {
        const Point ref(cell.lon_w, cell.lat_s);
        for (const auto& strip : strips)
          area += open_signed_area(clip(clip(strip, Side::west, cell.lon_w), Side::east, cell.lon_e), ref);
      } else {
        const auto left = std::lower_bound(crossings.begin(), crossings.end(), cell.center_lon()) - crossings.begin();
        if (left % 2 == 1) area = cell.planar_area();
      }
      if (area != 0.0) out.push_back({static_cast<long>(r) * spec.cols + c, area});
    }
  }
}

Polygon shifted(const Polygon& p, double dlon) {
  Polygon q = p;
  const Point d(dlon, 0.0);
  for (Point& v : q.outer) v += d;
  for (Ring& h : q.holes)
    for (Point& v : h) v += d;
  return q;
}

RegionCoverage cover_region(const GridSpec& spec, const Region& region) {
  std::vector<Contribution> contributions;
  const bool periodic = std::abs(spec.cols * spec.cell_size - 360.0) <= 1e-9 * spec.cell_size;
  for (const Polygon& p : region.geometry) {
    sweep_polygon(spec, p, contributions);
    if (periodic) {
      sweep_polygon(spec, shifted(p, -360.0), contributions);
      sweep_polygon(spec, shifted(p, 360.0), contributions);
    }
  }
  std::stable_sort(contributions.begin(), contributions.end(),
                   [](const Contribution& a, const Contribution& b) { return a.cell < b.cell; });

  RegionCoverage rc{region.region_id, {}};
  const Eigen::VectorXd areas = row_areas(spec);
  for (std::size_t i = 0; i < contributions.size();) {
    const long cell = contributions[i].cell;
    double covered = 0.0;
    for (; i < contributions.size() && contributions[i].cell == cell; ++i) covered += contributions[i].area;
    const int row = static_cast<int>(cell / spec.cols);
    const int col = static_cast<int>(cell % spec.cols);
    const double f = std::min(1.0, covered / cell_bounds(spec, row, col).planar_area());
    if (f > kMinFraction) rc.cells.push_back({row, col, f, areas(row)});
  }
  return rc;
}

}  // namespace

CoverageMatrix build_coverage(const GridSpec& spec, const RegionSet& regions, const CoverageOptions& options) {
  spec.validate();
  const auto& list = regions.regions();
  std::vector<RegionCoverage> out(list.size());
  unsigned jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(1, list.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < list.size(); i = next++) out[i] = cover_region(spec, list[i]);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = list.size();
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  std::sort(out.begin(), out.end(),
            [](const RegionCoverage& a, const RegionCoverage& b) { return a.region_id < b.region_id; });
  return CoverageMatrix(spec, regions.level(), std::move(out));
}

}  // namespace zonalclim
