#include <fstream>
#include <map>
#include <sstream>

#include "zonalclim/error.hpp"
#include "zonalclim/geom.hpp"
#include "zonalclim/numeric_text.hpp"

namespace zonalclim {

void write_coverage(std::ostream& out, const CoverageMatrix& coverage) {
  const GridSpec& spec = coverage.spec();
  out << "# zonalclim coverage matrix\n"
      << "rows=" << spec.rows << '\n'
      << "cols=" << spec.cols << '\n'
      << "lon_west=" << format_double(spec.lon_west) << '\n'
      << "lat_north=" << format_double(spec.lat_north) << '\n'
      << "cell_size=" << format_double(spec.cell_size) << '\n'
      << "registration=" << to_string(spec.registration) << '\n'
      << "level=" << to_string(coverage.level()) << '\n'
      << "regions=" << coverage.size() << '\n';
  for (const std::string& id : coverage.empty_regions()) out << "empty=" << id << '\n';
  for (const RegionCoverage& rc : coverage.regions())
    for (const CoverageEntry& e : rc.cells)
      out << rc.region_id << ' ' << e.row << ' ' << e.col << ' ' << format_double(e.fraction) << ' '
          << format_double(e.area_km2) << '\n';
}

std::string write_coverage(const CoverageMatrix& coverage) {
  std::ostringstream out;
  write_coverage(out, coverage);
  return out.str();
}

CoverageMatrix read_coverage(std::istream& in) {
  std::map<std::string, std::string> header;
  std::map<std::string, std::vector<CoverageEntry>> cells;
  std::string line;
  long line_no = 0;
  auto fail = [&](const std::string& msg) -> void { throw ParseError("line " + std::to_string(line_no) + ": " + msg); };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    const auto sp = line.find(' ');
    if (eq != std::string::npos && (sp == std::string::npos || eq < sp)) {
      std::string key = line.substr(0, eq);
      std::string value = line.substr(eq + 1);
      if (key == "empty") {
        if (!cells.emplace(value, std::vector<CoverageEntry>{}).second) fail("duplicate region '" + value + "'");
      } else if (!header.emplace(key, value).second) {
        fail("duplicate header key '" + key + "'");
      }
      continue;
    }
    std::istringstream tokens(line);
    std::string id, row, col, f, a, extra;
    if (!(tokens >> id >> row >> col >> f >> a) || (tokens >> extra)) fail("expected 'region_id row col f a'");
    const auto r = parse_int(row);
    const auto c = parse_int(col);
    const auto fv = parse_double(f);
    const auto av = parse_double(a);
    if (!r || !c || !fv || !av) fail("malformed coverage entry");
    cells[id].push_back({static_cast<int>(*r), static_cast<int>(*c), *fv, *av});
  }

  auto need = [&](const std::string& key) {
    auto it = header.find(key);
    if (it == header.end()) throw ParseError("coverage cache missing header key '" + key + "'");
    return it->second;
  };
  auto need_int = [&](const std::string& key) {
    auto v = parse_int(need(key));
    if (!v) throw ParseError("coverage header key '" + key + "' is not an integer");
    return *v;
  };
  auto need_double = [&](const std::string& key) {
    auto v = parse_double(need(key));
    if (!v) throw ParseError("coverage header key '" + key + "' is not a number");
    return *v;
  };

  try {
    GridSpec spec;
    spec.rows = static_cast<int>(need_int("rows"));
    spec.cols = static_cast<int>(need_int("cols"));
    spec.lon_west = need_double("lon_west");
    spec.lat_north = need_double("lat_north");
    spec.cell_size = need_double("cell_size");
    spec.registration = parse_registration(need("registration"));
    const Level level = parse_level(need("level"));
    const auto count = need_int("regions");
    if (count != static_cast<long long>(cells.size()))
      throw ParseError("coverage header declares " + std::to_string(count) + " regions, found " +
                       std::to_string(cells.size()));
    std::vector<RegionCoverage> regions;
    regions.reserve(cells.size());
    for (auto& [id, list] : cells) regions.push_back({id, std::move(list)});
    return CoverageMatrix(spec, level, std::move(regions));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("invalid coverage cache: ") + e.what());
  }
}

CoverageMatrix load_coverage(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open '" + path + "'");
  return read_coverage(in);
}

}  // namespace zonalclim
