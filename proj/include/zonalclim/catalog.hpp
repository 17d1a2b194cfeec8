#pragma once

#include <compare>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "zonalclim/zonal.hpp"

namespace zonalclim {

enum class Source { CRU, CSIC, ERA5, UDEL, custom };

std::string_view to_string(Source s);
Source parse_source(std::string_view s);

/// The base years the published catalog advertises.
inline constexpr int kBaseYears[] = {2000, 2005, 2010, 2015};

/// One dataset combination. Invariants (checked by validate()):
///   - variable is temperature, precipitation or spei
///   - spei only from CSIC at monthly frequency; CSIC only offers spei
///   - daily only from ERA5
///   - base_year absent exactly when unweighted
struct DatasetKey {
  Source source = Source::custom;
  Variable variable = Variable::temperature;
  Level level = Level::L0;
  WeightKind weighting = WeightKind::unweighted;
  std::optional<int> base_year;
  Frequency frequency = Frequency::monthly;

  void validate() const;
  bool valid() const noexcept;

  /// Stable identifier, e.g. "ERA5_temperature_L0_population_2015_daily".
  std::string id() const;
  static DatasetKey parse(std::string_view id);

  auto operator<=>(const DatasetKey&) const = default;
};

/// Every valid key over the four published sources, in a fixed order.
std::vector<DatasetKey> enumerate_valid_keys();

struct DatasetMeta {
  DatasetKey key;
  std::string source_version;
  Timestamp period_start;
  Timestamp period_end;
  std::string built_at;
  /// SHA-256 of the stored payload, lowercase hex. Filled in by the store.
  std::string checksum;

  bool operator==(const DatasetMeta&) const = default;
};

std::string meta_to_json(const DatasetMeta& meta);
DatasetMeta meta_from_json(std::string_view json);

/// Table fields implied by a key.
TableInfo table_info_for(const DatasetKey& key, std::string units);

enum class Shape { wide, long_form };
enum class Format { csv, json };

std::string_view to_string(Shape s);
std::string_view to_string(Format f);
Shape parse_shape(std::string_view s);
Format parse_format(std::string_view f);

/// Long: one record per (region_id, time) with a value column. Wide: one
/// record per region with one column per timestamp. Rows are in region_id
/// order, columns in time order; missing values are empty in CSV and null
/// in JSON.
std::string export_table(const SeriesTable& table, Shape shape, Format format);

/// Inverse of export_table; descriptive fields come from `info`.
SeriesTable import_table(std::string_view bytes, Shape shape, Format format, const TableInfo& info);

/// Canonical payload serialization (what the checksum covers).
std::string table_to_payload(const SeriesTable& table);
SeriesTable table_from_payload(std::string_view payload);

std::string sha256_hex(std::string_view bytes);

struct StoredDataset {
  SeriesTable table;
  DatasetMeta meta;
};

/// Directory-backed catalog: payloads live under objects/<aa>/<sha256>.json
/// and index.json lists the metadata of every stored key. Writes are
/// serialized; reads only see fully written files.
class DatasetStore {
 public:
  explicit DatasetStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Upsert. Returns the metadata as stored (checksum filled in).
  DatasetMeta store(const SeriesTable& table, DatasetMeta meta);

  /// Throws NotFoundError for absent keys and CorruptionError when the
  /// payload no longer matches its checksum.
  StoredDataset lookup(const DatasetKey& key) const;

  std::vector<DatasetMeta> list() const;

 private:
  std::filesystem::path object_path(const std::string& checksum) const;
  void write_index(const std::vector<DatasetMeta>& entries) const;

  std::filesystem::path root_;
  std::mutex write_mutex_;
};

}  // namespace zonalclim
