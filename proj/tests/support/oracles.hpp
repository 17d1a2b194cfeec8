#pragma once

// Reference implementations used only by tests. They share no code with the
// library: plain loops, no compensated sums, no sparsity.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using XY = std::array<double, 2>;
using Path = std::vector<XY>;  // open: last vertex != first

struct Shape {
  Path outer;
  std::vector<Path> holes;
};

inline constexpr double kR = 6371.0088;

/// Shoelace about the first vertex, accumulated in long double.
inline double path_area(const Path& p) {
  if (p.size() < 3) return 0.0;
  const long double ox = p[0][0], oy = p[0][1];
  long double s = 0.0L;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const long double ax = p[i][0] - ox, ay = p[i][1] - oy;
    const long double bx = p[i + 1][0] - ox, by = p[i + 1][1] - oy;
    s += ax * by - bx * ay;
  }
  return static_cast<double>(0.5L * s);
}

inline double shape_area(const Shape& s) {
  double a = std::abs(path_area(s.outer));
  for (const Path& h : s.holes) a -= std::abs(path_area(h));
  return a;
}

inline double shapes_area(const std::vector<Shape>& ss) {
  double a = 0.0;
  for (const Shape& s : ss) a += shape_area(s);
  return a;
}

/// Sutherland-Hodgman against one axis-aligned half plane.
inline Path clip_half(const Path& in, int axis, double bound, bool keep_greater) {
  Path out;
  if (in.empty()) return out;
  auto inside = [&](const XY& p) { return keep_greater ? p[axis] >= bound : p[axis] <= bound; };
  for (std::size_t i = 0; i < in.size(); ++i) {
    const XY& cur = in[i];
    const XY& prev = in[(i + in.size() - 1) % in.size()];
    const bool ci = inside(cur);
    const bool pi = inside(prev);
    if (ci != pi) {
      const double t = (bound - prev[axis]) / (cur[axis] - prev[axis]);
      XY x;
      x[axis] = bound;
      x[1 - axis] = prev[1 - axis] + t * (cur[1 - axis] - prev[1 - axis]);
      out.push_back(x);
    }
    if (ci) out.push_back(cur);
  }
  return out;
}

inline double clip_rect_area(const Path& p, double x0, double x1, double y0, double y1) {
  Path c = clip_half(p, 0, x0, true);
  c = clip_half(c, 0, x1, false);
  c = clip_half(c, 1, y0, true);
  c = clip_half(c, 1, y1, false);
  return c.size() < 3 ? 0.0 : std::abs(path_area(c));
}

inline double overlap_area(const std::vector<Shape>& ss, double x0, double x1, double y0, double y1) {
  double a = 0.0;
  for (const Shape& s : ss) {
    a += clip_rect_area(s.outer, x0, x1, y0, y1);
    for (const Path& h : s.holes) a -= clip_rect_area(h, x0, x1, y0, y1);
  }
  return a;
}

/// Ray casting, even-odd over every ring.
inline bool inside(const std::vector<Shape>& ss, double x, double y) {
  bool in = false;
  auto ring = [&](const Path& p) {
    for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
      const XY& a = p[i];
      const XY& b = p[j];
      if ((a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0]) in = !in;
    }
  };
  for (const Shape& s : ss) {
    ring(s.outer);
    for (const Path& h : s.holes) ring(h);
  }
  return in;
}

/// Fraction of [x0,x1]x[y0,y1] inside the shapes from n jittered samples
/// (one uniform point per stratum of a k x k lattice, k = sqrt(n)).
inline double monte_carlo_fraction(const std::vector<Shape>& ss, double x0, double x1, double y0, double y1, int n,
                                   std::mt19937_64& rng) {
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long hits = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double x = x0 + (x1 - x0) * (i + u(rng)) / k;
      const double y = y0 + (y1 - y0) * (j + u(rng)) / k;
      hits += inside(ss, x, y);
    }
  return static_cast<double>(hits) / (static_cast<double>(k) * k);
}

/// Composite 8-point Gauss-Legendre quadrature of R^2 cos(phi) over a
/// lat band of width dlon degrees.
inline double quadrature_cell_area(double lat_s, double lat_n, double dlon_deg, int panels = 16) {
  static constexpr std::array<double, 4> x{0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                           0.9602898564975363};
  static constexpr std::array<double, 4> w{0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                           0.1012285362903763};
  const double d2r = std::numbers::pi / 180.0;
  const double a = lat_s * d2r;
  const double b = lat_n * d2r;
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < 4; ++i) s += w[i] * (std::cos(mid - 0.5 * h * x[i]) + std::cos(mid + 0.5 * h * x[i]));
  }
  return kR * kR * dlon_deg * d2r * 0.5 * h * s;
}

struct DenseCell {
  double area;    // spherical, km^2
  double frac;    // covered share of the cell
  double weight;
  double value;
  bool missing;
};

/// y = sum a f w x / sum a f w over every cell, nothing skipped except
/// missing x.
inline std::optional<double> weighted_mean(const std::vector<DenseCell>& cells) {
  long double num = 0.0L;
  long double den = 0.0L;
  for (const DenseCell& c : cells) {
    if (c.missing) continue;
    const long double m = static_cast<long double>(c.area) * c.frac * c.weight;
    num += m * c.value;
    den += m;
  }
  if (den == 0.0L) return std::nullopt;
  return static_cast<double>(num / den);
}

inline int count_above(const std::vector<double>& v, double threshold) {
  int n = 0;
  for (double x : v)
    if (!std::isnan(x) && x > threshold) ++n;
  return n;
}

}  // namespace oracle
