#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "zonalclim/grid.hpp"

namespace zonalclim {

// Grid Archive: a line-oriented header
//
//   rows= cols= lon_west= lat_north= cell_size= registration=corner|center
//   variable= frequency=daily|monthly|annual sentinel=<number|none>
//   frames=<k> encoding=text|le_float64  [any extra key=value lines]
//
// followed by k frames, each a `timestamp=YYYY[-MM[-DD]]` line and then
// rows*cols row-major values: whitespace separated text, or raw
// little-endian IEEE-754 doubles immediately after the timestamp newline.
// Missing cells are written as the sentinel, or as `nan` when there is none.

enum class Encoding { text, le_float64 };

std::string_view to_string(Encoding e);

struct ArchiveOptions {
  Encoding encoding = Encoding::text;
  std::optional<double> sentinel;
  /// Extra header keys (e.g. kind=, base_year= for weight grids), written
  /// in key order after the mandatory ones.
  std::map<std::string, std::string> extra;
};

struct ParsedArchive {
  RasterSeries series;
  ArchiveOptions options;
};

/// Full parse; throws ParseError naming the line or byte offset.
ParsedArchive read_grid_archive(std::istream& in);

RasterSeries parse_grid_archive(std::istream& in);

/// Parse only the header block. Useful for taking a GridSpec from an
/// existing archive or a bare spec file.
GridSpec read_grid_spec(std::istream& in);

void write_grid_archive(std::ostream& out, const RasterSeries& series, const ArchiveOptions& options = {});

std::string write_grid_archive(const RasterSeries& series, const ArchiveOptions& options = {});

RasterSeries load_grid_archive(const std::string& path);
ParsedArchive load_grid_archive_full(const std::string& path);

}  // namespace zonalclim
