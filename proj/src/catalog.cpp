#include "zonalclim/catalog.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "zonalclim/error.hpp"
#include "zonalclim/numeric_text.hpp"

namespace zonalclim {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Source s) {
  switch (s) {
    case Source::CRU:
      return "CRU";
    case Source::CSIC:
      return "CSIC";
    case Source::ERA5:
      return "ERA5";
    case Source::UDEL:
      return "UDEL";
    case Source::custom:
      return "custom";
  }
  return "custom";
}

Source parse_source(std::string_view s) {
  for (Source v : {Source::CRU, Source::CSIC, Source::ERA5, Source::UDEL, Source::custom})
    if (to_string(v) == s) return v;
  throw ValidationError("unknown source '" + std::string(s) + "'");
}

void DatasetKey::validate() const {
  if (variable != Variable::temperature && variable != Variable::precipitation && variable != Variable::spei)
    throw ValidationError("datasets hold temperature, precipitation or spei, not " + std::string(to_string(variable)));
  if (variable == Variable::spei && (source != Source::CSIC || frequency != Frequency::monthly))
    throw ValidationError("spei is only available from CSIC at monthly frequency");
  if (source == Source::CSIC && variable != Variable::spei) throw ValidationError("CSIC only provides spei");
  if (frequency == Frequency::daily && source != Source::ERA5) throw ValidationError("daily data come only from ERA5");
  if ((weighting == WeightKind::unweighted) == base_year.has_value())
    throw ValidationError("base_year must be given exactly when the dataset is weighted");
  if (base_year && (*base_year < 1 || *base_year > 9999)) throw ValidationError("base_year out of range");
}

bool DatasetKey::valid() const noexcept {
  try {
    validate();
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::string DatasetKey::id() const {
  std::string s;
  s += to_string(source);
  s += '_';
  s += to_string(variable);
  s += '_';
  s += to_string(level);
  s += '_';
  s += to_string(weighting);
  s += '_';
  s += base_year ? std::to_string(*base_year) : "none";
  s += '_';
  s += to_string(frequency);
  return s;
}

DatasetKey DatasetKey::parse(std::string_view id) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t pos; (pos = id.find('_', start)) != std::string_view::npos; start = pos + 1)
    parts.push_back(id.substr(start, pos - start));
  parts.push_back(id.substr(start));
  if (parts.size() != 6) throw ValidationError("malformed dataset id '" + std::string(id) + "'");
  DatasetKey k;
  k.source = parse_source(parts[0]);
  k.variable = parse_variable(parts[1]);
  k.level = parse_level(parts[2]);
  k.weighting = parse_weight_kind(parts[3]);
  if (parts[4] != "none") {
    auto y = parse_int(parts[4]);
    if (!y) throw ValidationError("malformed base year in '" + std::string(id) + "'");
    k.base_year = static_cast<int>(*y);
  }
  k.frequency = parse_frequency(parts[5]);
  k.validate();
  return k;
}

std::vector<DatasetKey> enumerate_valid_keys() {
  std::vector<DatasetKey> keys;
  for (Source s : {Source::CRU, Source::CSIC, Source::ERA5, Source::UDEL})
    for (Variable v : {Variable::temperature, Variable::precipitation, Variable::spei})
      for (Level l : {Level::L0, Level::L1})
        for (WeightKind w : {WeightKind::unweighted, WeightKind::population, WeightKind::nightlight}) {
          std::vector<std::optional<int>> years;
          if (w == WeightKind::unweighted)
            years.push_back(std::nullopt);
          else
            years.assign(std::begin(kBaseYears), std::end(kBaseYears));
          for (const auto& y : years)
            for (Frequency f : {Frequency::daily, Frequency::monthly, Frequency::annual}) {
              DatasetKey k{s, v, l, w, y, f};
              if (k.valid()) keys.push_back(k);
            }
        }
  return keys;
}

namespace {

ordered_json key_to_json(const DatasetKey& k) {
  ordered_json j;
  j["id"] = k.id();
  j["source"] = to_string(k.source);
  j["variable"] = to_string(k.variable);
  j["level"] = to_string(k.level);
  j["weighting"] = to_string(k.weighting);
  j["base_year"] = k.base_year ? ordered_json(*k.base_year) : ordered_json(nullptr);
  j["frequency"] = to_string(k.frequency);
  return j;
}

ordered_json meta_json(const DatasetMeta& m) {
  ordered_json j;
  j["key"] = key_to_json(m.key);
  j["source_version"] = m.source_version;
  j["period"] = {{"start", m.period_start.str()}, {"end", m.period_end.str()}};
  j["built_at"] = m.built_at;
  j["checksum"] = m.checksum;
  return j;
}

DatasetMeta meta_from(const json& j) {
  try {
    DatasetMeta m;
    const json& k = j.at("key");
    m.key.source = parse_source(k.at("source").get<std::string>());
    m.key.variable = parse_variable(k.at("variable").get<std::string>());
    m.key.level = parse_level(k.at("level").get<std::string>());
    m.key.weighting = parse_weight_kind(k.at("weighting").get<std::string>());
    if (!k.at("base_year").is_null()) m.key.base_year = k.at("base_year").get<int>();
    m.key.frequency = parse_frequency(k.at("frequency").get<std::string>());
    m.source_version = j.at("source_version").get<std::string>();
    m.period_start = Timestamp::parse(j.at("period").at("start").get<std::string>());
    m.period_end = Timestamp::parse(j.at("period").at("end").get<std::string>());
    m.built_at = j.at("built_at").get<std::string>();
    m.checksum = j.at("checksum").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed dataset metadata: ") + e.what());
  }
}

}  // namespace

std::string meta_to_json(const DatasetMeta& meta) { return meta_json(meta).dump(); }

DatasetMeta meta_from_json(std::string_view text) {
  try {
    return meta_from(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed dataset metadata: ") + e.what());
  }
}

TableInfo table_info_for(const DatasetKey& key, std::string units) {
  return {key.level, key.variable, std::move(units), key.weighting, key.base_year, key.frequency};
}

std::string_view to_string(Shape s) { return s == Shape::wide ? "wide" : "long"; }
std::string_view to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

Shape parse_shape(std::string_view s) {
  if (s == "wide") return Shape::wide;
  if (s == "long") return Shape::long_form;
  throw ValidationError("unknown shape '" + std::string(s) + "'");
}

Format parse_format(std::string_view f) {
  if (f == "csv") return Format::csv;
  if (f == "json") return Format::json;
  throw ValidationError("unknown format '" + std::string(f) + "'");
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

std::string csv_value(double v) { return std::isnan(v) ? std::string() : format_double(v); }

ordered_json json_value(double v) { return std::isnan(v) ? ordered_json(nullptr) : ordered_json(v); }

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      field_started = false;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  if (field_started || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_cell(const std::string& s) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  auto v = parse_double(s);
  if (!v || std::isnan(*v)) throw ParseError("bad numeric value '" + s + "'");
  return *v;
}

/// Assemble a table from (region, time, value) triples.
SeriesTable assemble(const std::vector<std::tuple<std::string, Timestamp, double>>& records, const TableInfo& info) {
  std::set<std::string> regions;
  std::set<Timestamp> times;
  for (const auto& [r, t, v] : records) {
    regions.insert(r);
    times.insert(t);
  }
  SeriesTable table;
  table.info = info;
  table.regions.assign(regions.begin(), regions.end());
  table.times.assign(times.begin(), times.end());
  table.values.setConstant(static_cast<Eigen::Index>(regions.size()), static_cast<Eigen::Index>(times.size()),
                           std::numeric_limits<double>::quiet_NaN());
  std::vector<char> seen(regions.size() * times.size(), 0);
  for (const auto& [r, t, v] : records) {
    const auto i = std::lower_bound(table.regions.begin(), table.regions.end(), r) - table.regions.begin();
    const auto k = std::lower_bound(table.times.begin(), table.times.end(), t) - table.times.begin();
    char& s = seen[static_cast<std::size_t>(i) * times.size() + static_cast<std::size_t>(k)];
    if (s) throw ParseError("duplicate record for (" + r + ", " + t.str() + ")");
    s = 1;
    table.values(i, k) = v;
  }
  return table;
}

}  // namespace

std::string export_table(const SeriesTable& table, Shape shape, Format format) {
  table.validate();
  const auto n_regions = static_cast<Eigen::Index>(table.regions.size());
  const auto n_times = static_cast<Eigen::Index>(table.times.size());
  if (format == Format::csv) {
    std::string out;
    if (shape == Shape::long_form) {
      out += "region_id,time,value\n";
      for (Eigen::Index i = 0; i < n_regions; ++i) {
        const std::string id = csv_field(table.regions[i]);
        for (Eigen::Index t = 0; t < n_times; ++t) {
          out += id;
          out += ',';
          out += table.times[t].str();
          out += ',';
          out += csv_value(table.values(i, t));
          out += '\n';
        }
      }
    } else {
      out += "region_id";
      for (const Timestamp& t : table.times) out += ',' + t.str();
      out += '\n';
      for (Eigen::Index i = 0; i < n_regions; ++i) {
        out += csv_field(table.regions[i]);
        for (Eigen::Index t = 0; t < n_times; ++t) out += ',' + csv_value(table.values(i, t));
        out += '\n';
      }
    }
    return out;
  }

  ordered_json records = ordered_json::array();
  for (Eigen::Index i = 0; i < n_regions; ++i) {
    if (shape == Shape::long_form) {
      for (Eigen::Index t = 0; t < n_times; ++t) {
        ordered_json rec;
        rec["region_id"] = table.regions[i];
        rec["time"] = table.times[t].str();
        rec["value"] = json_value(table.values(i, t));
        records.push_back(std::move(rec));
      }
    } else {
      ordered_json rec;
      rec["region_id"] = table.regions[i];
      for (Eigen::Index t = 0; t < n_times; ++t) rec[table.times[t].str()] = json_value(table.values(i, t));
      records.push_back(std::move(rec));
    }
  }
  return records.dump();
}

SeriesTable import_table(std::string_view bytes, Shape shape, Format format, const TableInfo& info) {
  std::vector<std::tuple<std::string, Timestamp, double>> records;
  try {
    if (format == Format::csv) {
      const auto rows = parse_csv(bytes);
      if (rows.empty()) throw ParseError("CSV without header");
      const auto& header = rows.front();
      if (header.empty() || header[0] != "region_id") throw ParseError("CSV header must start with region_id");
      if (shape == Shape::long_form) {
        if (header != std::vector<std::string>{"region_id", "time", "value"})
          throw ParseError("long CSV header must be region_id,time,value");
        for (std::size_t r = 1; r < rows.size(); ++r) {
          if (rows[r].size() != 3) throw ParseError("CSV row " + std::to_string(r) + " has wrong field count");
          records.emplace_back(rows[r][0], Timestamp::parse(rows[r][1]), parse_cell(rows[r][2]));
        }
      } else {
        std::vector<Timestamp> times;
        for (std::size_t c = 1; c < header.size(); ++c) times.push_back(Timestamp::parse(header[c]));
        for (std::size_t r = 1; r < rows.size(); ++r) {
          if (rows[r].size() != header.size())
            throw ParseError("CSV row " + std::to_string(r) + " has wrong field count");
          for (std::size_t c = 1; c < header.size(); ++c)
            records.emplace_back(rows[r][0], times[c - 1], parse_cell(rows[r][c]));
        }
      }
    } else {
      const json doc = json::parse(bytes);
      if (!doc.is_array()) throw ParseError("expected a JSON array of records");
      for (const json& rec : doc) {
        const std::string id = rec.at("region_id").get<std::string>();
        auto value_of = [](const json& v) {
          return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        };
        if (shape == Shape::long_form) {
          records.emplace_back(id, Timestamp::parse(rec.at("time").get<std::string>()), value_of(rec.at("value")));
        } else {
          for (const auto& [k, v] : rec.items())
            if (k != "region_id") records.emplace_back(id, Timestamp::parse(k), value_of(v));
        }
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON export: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return assemble(records, info);
}

std::string table_to_payload(const SeriesTable& table) {
  table.validate();
  ordered_json j;
  j["level"] = to_string(table.info.level);
  j["variable"] = to_string(table.info.variable);
  j["units"] = table.info.units;
  j["weighting"] = to_string(table.info.weighting);
  j["base_year"] = table.info.base_year ? ordered_json(*table.info.base_year) : ordered_json(nullptr);
  j["frequency"] = to_string(table.info.frequency);
  j["regions"] = table.regions;
  ordered_json times = ordered_json::array();
  for (const Timestamp& t : table.times) times.push_back(t.str());
  j["times"] = std::move(times);
  ordered_json values = ordered_json::array();
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index t = 0; t < table.values.cols(); ++t) row.push_back(json_value(table.values(i, t)));
    values.push_back(std::move(row));
  }
  j["values"] = std::move(values);
  return j.dump();
}

SeriesTable table_from_payload(std::string_view payload) {
  try {
    const json j = json::parse(payload);
    SeriesTable t;
    t.info.level = parse_level(j.at("level").get<std::string>());
    t.info.variable = parse_variable(j.at("variable").get<std::string>());
    t.info.units = j.at("units").get<std::string>();
    t.info.weighting = parse_weight_kind(j.at("weighting").get<std::string>());
    if (!j.at("base_year").is_null()) t.info.base_year = j.at("base_year").get<int>();
    t.info.frequency = parse_frequency(j.at("frequency").get<std::string>());
    t.regions = j.at("regions").get<std::vector<std::string>>();
    for (const json& s : j.at("times")) t.times.push_back(Timestamp::parse(s.get<std::string>()));
    const json& values = j.at("values");
    if (values.size() != t.regions.size()) throw ParseError("payload row count does not match regions");
    t.values.resize(static_cast<Eigen::Index>(t.regions.size()), static_cast<Eigen::Index>(t.times.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i].size() != t.times.size()) throw ParseError("payload column count does not match times");
      for (std::size_t k = 0; k < t.times.size(); ++k) {
        const json& v = values[i][k];
        t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
      }
    }
    t.validate();
    return t;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed payload: ") + e.what());
  }
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  std::string hex;
  hex.reserve(2 * len);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& p, std::string_view bytes) {
  const std::filesystem::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, p);
}

std::string utc_now() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const auto days = std::chrono::floor<std::chrono::days>(now);
  const std::chrono::year_month_day ymd{days};
  const std::chrono::hh_mm_ss hms{now - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

}  // namespace

DatasetStore::DatasetStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_ / "objects");
}

std::filesystem::path DatasetStore::object_path(const std::string& checksum) const {
  return root_ / "objects" / checksum.substr(0, 2) / (checksum + ".json");
}

std::vector<DatasetMeta> DatasetStore::list() const {
  const auto index = root_ / "index.json";
  if (!std::filesystem::exists(index)) return {};
  try {
    const json j = json::parse(read_file(index));
    std::vector<DatasetMeta> out;
    for (const json& m : j) out.push_back(meta_from(m));
    return out;
  } catch (const json::parse_error& e) {
    throw CorruptionError(std::string("unreadable catalog index: ") + e.what());
  }
}

void DatasetStore::write_index(const std::vector<DatasetMeta>& entries) const {
  ordered_json j = ordered_json::array();
  for (const DatasetMeta& m : entries) j.push_back(meta_json(m));
  write_file_atomic(root_ / "index.json", j.dump(2) + "\n");
}

DatasetMeta DatasetStore::store(const SeriesTable& table, DatasetMeta meta) {
  meta.key.validate();
  table.validate();
  const TableInfo expected = table_info_for(meta.key, table.info.units);
  if (!(table.info == expected))
    throw ValidationError("table does not match dataset key " + meta.key.id());
  if (!table.times.empty()) {
    meta.period_start = table.times.front();
    meta.period_end = table.times.back();
  }
  if (meta.built_at.empty()) meta.built_at = utc_now();

  const std::string payload = table_to_payload(table);
  meta.checksum = sha256_hex(payload);
  const auto object = object_path(meta.checksum);

  std::lock_guard lock(write_mutex_);
  std::filesystem::create_directories(object.parent_path());
  if (!std::filesystem::exists(object)) write_file_atomic(object, payload);

  auto entries = list();
  std::optional<std::string> replaced;
  auto it = std::find_if(entries.begin(), entries.end(), [&](const DatasetMeta& m) { return m.key == meta.key; });
  if (it != entries.end()) {
    replaced = it->checksum;
    *it = meta;
  } else {
    entries.push_back(meta);
  }
  std::sort(entries.begin(), entries.end(),
            [](const DatasetMeta& a, const DatasetMeta& b) { return a.key.id() < b.key.id(); });
  write_index(entries);

  if (replaced && *replaced != meta.checksum &&
      std::none_of(entries.begin(), entries.end(), [&](const DatasetMeta& m) { return m.checksum == *replaced; }))
    std::filesystem::remove(object_path(*replaced));
  return meta;
}

StoredDataset DatasetStore::lookup(const DatasetKey& key) const {
  const auto entries = list();
  auto it = std::find_if(entries.begin(), entries.end(), [&](const DatasetMeta& m) { return m.key == key; });
  if (it == entries.end()) throw NotFoundError("no dataset stored for " + key.id());
  const auto path = object_path(it->checksum);
  if (!std::filesystem::exists(path)) throw CorruptionError("payload missing for " + key.id());
  const std::string payload = read_file(path);
  if (sha256_hex(payload) != it->checksum) throw CorruptionError("checksum mismatch for " + key.id());
  return {table_from_payload(payload), *it};
}

}  // namespace zonalclim
