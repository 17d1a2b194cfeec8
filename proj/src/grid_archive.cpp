#include "zonalclim/grid_archive.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "zonalclim/error.hpp"
#include "zonalclim/numeric_text.hpp"

namespace zonalclim {

std::string_view to_string(Encoding e) { return e == Encoding::text ? "text" : "le_float64"; }

namespace {

constexpr std::string_view kTimestampKey = "timestamp=";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

class ArchiveReader {
 public:
  explicit ArchiveReader(std::istream& in) : in_(in) {}

  bool next_line(std::string& s) {
    if (pending_) {
      s = std::move(*pending_);
      pending_.reset();
      return true;
    }
    if (!std::getline(in_, s)) return false;
    ++line_;
    offset_ += static_cast<std::int64_t>(s.size()) + 1;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return true;
  }

  void push_back(std::string s) { pending_ = std::move(s); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("line " + std::to_string(line_) + ": " + msg);
  }

  [[noreturn]] void fail_at_offset(const std::string& msg) const {
    throw ParseError("byte offset " + std::to_string(offset_) + ": " + msg);
  }

  /// Header keys up to (not including) the first timestamp line.
  std::map<std::string, std::string> read_header() {
    std::map<std::string, std::string> kv;
    std::string s;
    while (next_line(s)) {
      if (s.starts_with(kTimestampKey)) {
        push_back(std::move(s));
        break;
      }
      if (s.empty() || s.front() == '#') continue;
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) fail("malformed header line '" + s + "'");
      auto [it, inserted] = kv.emplace(s.substr(0, eq), s.substr(eq + 1));
      if (!inserted) fail("duplicate header key '" + it->first + "'");
    }
    return kv;
  }

  std::string take(std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) fail("missing header key '" + key + "'");
    std::string v = std::move(it->second);
    kv.erase(it);
    return v;
  }

  double take_double(std::map<std::string, std::string>& kv, const std::string& key) {
    const std::string v = take(kv, key);
    auto d = parse_double(v);
    if (!d) fail("header key '" + key + "' is not a number: '" + v + "'");
    return *d;
  }

  int take_int(std::map<std::string, std::string>& kv, const std::string& key) {
    const std::string v = take(kv, key);
    auto d = parse_int(v);
    if (!d || *d < 0 || *d > 1'000'000'000) fail("header key '" + key + "' is not a valid count: '" + v + "'");
    return static_cast<int>(*d);
  }

  GridSpec take_spec(std::map<std::string, std::string>& kv) {
    GridSpec spec;
    spec.rows = take_int(kv, "rows");
    spec.cols = take_int(kv, "cols");
    spec.lon_west = take_double(kv, "lon_west");
    spec.lat_north = take_double(kv, "lat_north");
    spec.cell_size = take_double(kv, "cell_size");
    try {
      spec.registration = parse_registration(take(kv, "registration"));
      spec.validate();
    } catch (const ValidationError& e) {
      fail(e.what());
    }
    return spec;
  }

  Timestamp read_timestamp() {
    std::string s;
    if (!next_line(s)) fail("shape mismatch: expected another frame, reached end of stream");
    if (!s.starts_with(kTimestampKey)) fail("expected 'timestamp=' line, got '" + s + "'");
    try {
      return Timestamp::parse(std::string_view(s).substr(kTimestampKey.size()));
    } catch (const ValidationError& e) {
      fail(e.what());
    }
  }

  PlaneXd read_text_plane(int rows, int cols) {
    PlaneXd plane(rows, cols);
    const Eigen::Index n = plane.size();
    Eigen::Index k = 0;
    std::string s;
    while (k < n) {
      if (!next_line(s)) fail("shape mismatch: expected " + std::to_string(n) + " values, got " + std::to_string(k));
      if (s.starts_with(kTimestampKey))
        fail("shape mismatch: expected " + std::to_string(n) + " values, got " + std::to_string(k));
      std::istringstream tokens(s);
      std::string tok;
      while (tokens >> tok) {
        if (k == n) fail("shape mismatch: more than " + std::to_string(n) + " values in frame");
        auto v = parse_double(tok);
        if (!v || std::isinf(*v)) fail("bad value '" + tok + "'");
        plane.data()[k++] = *v;
      }
    }
    return plane;
  }

  PlaneXd read_binary_plane(int rows, int cols) {
    PlaneXd plane(rows, cols);
    const std::size_t bytes = static_cast<std::size_t>(plane.size()) * 8;
    std::vector<char> buf(bytes);
    in_.read(buf.data(), static_cast<std::streamsize>(bytes));
    const auto got = static_cast<std::size_t>(in_.gcount());
    if (got != bytes)
      fail_at_offset("shape mismatch: truncated payload, expected " + std::to_string(bytes) + " bytes, got " +
                     std::to_string(got));
    offset_ += static_cast<std::int64_t>(bytes);
    for (Eigen::Index i = 0; i < plane.size(); ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, buf.data() + 8 * i, 8);
      const double v = std::bit_cast<double>(to_little_endian(bits));
      if (std::isinf(v)) fail_at_offset("infinite value in payload");
      plane.data()[i] = v;
    }
    return plane;
  }

  void expect_end() {
    std::string s;
    while (next_line(s)) {
      if (s.find_first_not_of(" \t") != std::string::npos) fail("shape mismatch: trailing data after last frame");
    }
  }

 private:
  std::istream& in_;
  std::int64_t line_ = 0;
  std::int64_t offset_ = 0;
  std::optional<std::string> pending_;
};

Mask sentinel_mask(const PlaneXd& plane, const std::optional<double>& sentinel) {
  Mask m = plane.isNaN();
  if (sentinel) m = m || (plane == *sentinel);
  return m;
}

}  // namespace

ParsedArchive read_grid_archive(std::istream& in) {
  ArchiveReader reader(in);
  auto kv = reader.read_header();
  const GridSpec spec = reader.take_spec(kv);

  Variable variable;
  Frequency frequency;
  ArchiveOptions options;
  try {
    variable = parse_variable(reader.take(kv, "variable"));
    frequency = parse_frequency(reader.take(kv, "frequency"));
  } catch (const ValidationError& e) {
    reader.fail(e.what());
  }
  const std::string sentinel = reader.take(kv, "sentinel");
  if (sentinel != "none") {
    auto v = parse_double(sentinel);
    if (!v || !std::isfinite(*v)) reader.fail("sentinel must be a finite number or 'none'");
    options.sentinel = *v;
  }
  const int frames = reader.take_int(kv, "frames");
  if (frames < 1) reader.fail("archive must hold at least one frame");
  const std::string encoding = reader.take(kv, "encoding");
  if (encoding == "text")
    options.encoding = Encoding::text;
  else if (encoding == "le_float64")
    options.encoding = Encoding::le_float64;
  else
    reader.fail("unknown encoding '" + encoding + "'");
  options.extra = std::move(kv);

  std::vector<Raster> rasters;
  rasters.reserve(frames);
  for (int f = 0; f < frames; ++f) {
    const Timestamp ts = reader.read_timestamp();
    if (ts.precision() != frequency)
      reader.fail("timestamp " + ts.str() + " inconsistent with " + std::string(to_string(frequency)) + " frequency");
    if (!rasters.empty() && !(rasters.back().timestamp() < ts))
      reader.fail("timestamps not strictly increasing at " + ts.str());
    PlaneXd plane = options.encoding == Encoding::text ? reader.read_text_plane(spec.rows, spec.cols)
                                                       : reader.read_binary_plane(spec.rows, spec.cols);
    Mask mask = sentinel_mask(plane, options.sentinel);
    rasters.emplace_back(spec, std::move(plane), std::move(mask), variable, ts);
  }
  reader.expect_end();
  return {RasterSeries(spec, frequency, std::move(rasters)), std::move(options)};
}

RasterSeries parse_grid_archive(std::istream& in) { return read_grid_archive(in).series; }

GridSpec read_grid_spec(std::istream& in) {
  ArchiveReader reader(in);
  auto kv = reader.read_header();
  return reader.take_spec(kv);
}

void write_grid_archive(std::ostream& out, const RasterSeries& series, const ArchiveOptions& options) {
  const GridSpec& spec = series.spec();
  out << "rows=" << spec.rows << '\n'
      << "cols=" << spec.cols << '\n'
      << "lon_west=" << format_double(spec.lon_west) << '\n'
      << "lat_north=" << format_double(spec.lat_north) << '\n'
      << "cell_size=" << format_double(spec.cell_size) << '\n'
      << "registration=" << to_string(spec.registration) << '\n'
      << "variable=" << to_string(series.variable()) << '\n'
      << "frequency=" << to_string(series.frequency()) << '\n'
      << "sentinel=" << (options.sentinel ? format_double(*options.sentinel) : std::string("none")) << '\n'
      << "frames=" << series.size() << '\n'
      << "encoding=" << to_string(options.encoding) << '\n';
  for (const auto& [k, v] : options.extra) out << k << '=' << v << '\n';

  const double missing_value = options.sentinel.value_or(std::numeric_limits<double>::quiet_NaN());
  for (const Raster& frame : series.frames()) {
    out << kTimestampKey << frame.timestamp().str() << '\n';
    const PlaneXd plane = frame.missing().select(missing_value, frame.values());
    if (options.encoding == Encoding::text) {
      for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
          if (c) out << ' ';
          out << format_double(plane(r, c));
        }
        out << '\n';
      }
    } else {
      std::vector<char> buf(static_cast<std::size_t>(plane.size()) * 8);
      for (Eigen::Index i = 0; i < plane.size(); ++i) {
        const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(plane.data()[i]));
        std::memcpy(buf.data() + 8 * i, &bits, 8);
      }
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
  }
}

std::string write_grid_archive(const RasterSeries& series, const ArchiveOptions& options) {
  std::ostringstream out(std::ios::binary);
  write_grid_archive(out, series, options);
  return out.str();
}

ParsedArchive load_grid_archive_full(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path + "'");
  return read_grid_archive(in);
}

RasterSeries load_grid_archive(const std::string& path) { return load_grid_archive_full(path).series; }

}  // namespace zonalclim
