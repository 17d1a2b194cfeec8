#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "zonalclim/catalog.hpp"
#include "zonalclim/error.hpp"

using namespace zonalclim;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Literal nested loops over the published sources with each availability
/// rule written out longhand.
std::vector<std::string> enumeration_oracle() {
  std::vector<std::string> out;
  const char* sources[] = {"CRU", "CSIC", "ERA5", "UDEL"};
  const char* variables[] = {"temperature", "precipitation", "spei"};
  const char* levels[] = {"L0", "L1"};
  const char* frequencies[] = {"daily", "monthly", "annual"};
  for (std::string s : sources)
    for (std::string v : variables) {
      if ((v == "spei") != (s == "CSIC")) continue;
      for (std::string l : levels)
        for (std::string f : frequencies) {
          if (v == "spei" && f != "monthly") continue;
          if (f == "daily" && s != "ERA5") continue;
          out.push_back(s + "_" + v + "_" + l + "_unweighted_none_" + f);
          for (std::string w : {"population", "nightlight"})
            for (int y : {2000, 2005, 2010, 2015}) out.push_back(s + "_" + v + "_" + l + "_" + w + "_" + std::to_string(y) + "_" + f);
        }
    }
  return out;
}

SeriesTable random_table(std::mt19937_64& rng, int n_regions, int n_times, Frequency freq) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SeriesTable t;
  t.info = {Level::L1, Variable::precipitation, "mm", WeightKind::nightlight, 2010, freq};
  for (int i = 0; i < n_regions; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "R%03d%s", i, i % 3 == 0 ? ",x" : (i % 3 == 1 ? "\"q\"" : ""));
    t.regions.push_back(id);
  }
  std::sort(t.regions.begin(), t.regions.end());
  for (int k = 0; k < n_times; ++k) {
    if (freq == Frequency::annual)
      t.times.push_back({1990 + k});
    else if (freq == Frequency::monthly)
      t.times.push_back({1990 + k / 12, k % 12 + 1});
    else
      t.times.push_back({1990, 1 + k / 28, 1 + k % 28});
  }
  t.values.resize(n_regions, n_times);
  for (Eigen::Index k = 0; k < t.values.size(); ++k)
    t.values(k) = u(rng) < 0.1 ? kNaN : (u(rng) - 0.3) * std::pow(10.0, static_cast<int>(u(rng) * 12) - 6);
  return t;
}

SeriesTable small_table(Frequency freq, std::vector<std::string> regions, std::vector<Timestamp> times, Eigen::MatrixXd values) {
  SeriesTable t;
  t.info = {Level::L0, Variable::temperature, "degC", WeightKind::unweighted, std::nullopt, freq};
  t.regions = std::move(regions);
  t.times = std::move(times);
  t.values = std::move(values);
  return t;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("zonalclim_catalog_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("enumeration matches a literal nested-loop count") {
  const auto keys = enumerate_valid_keys();
  std::vector<std::string> ids;
  for (const auto& k : keys) ids.push_back(k.id());
  auto expected = enumeration_oracle();
  CHECK(ids.size() == expected.size());
  std::vector<std::string> a(ids), b(expected);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
  MESSAGE("valid keys over the four published sources: " << keys.size() << " (published figure: 138)");
  CHECK(keys.size() == 270);
}

TEST_CASE("enumeration is valid, duplicate free and deterministic") {
  const auto keys = enumerate_valid_keys();
  CHECK(keys == enumerate_valid_keys());
  std::set<std::string> seen;
  for (const auto& k : keys) {
    CHECK(k.valid());
    CHECK(seen.insert(k.id()).second);
    CHECK(k.source != Source::custom);
    CHECK(!(k.source == Source::CRU && k.frequency == Frequency::daily));
    if (k.frequency == Frequency::daily) CHECK(k.source == Source::ERA5);
  }
  const auto spei = std::count_if(keys.begin(), keys.end(), [](const DatasetKey& k) { return k.variable == Variable::spei; });
  CHECK(spei == 2 * (1 + 2 * 4));
  for (const auto& k : keys)
    if (k.variable == Variable::spei) CHECK((k.source == Source::CSIC && k.frequency == Frequency::monthly));
}

TEST_CASE("key validation") {
  CHECK(!DatasetKey{Source::CRU, Variable::temperature, Level::L0, WeightKind::unweighted, std::nullopt, Frequency::daily}.valid());
  CHECK(!DatasetKey{Source::CSIC, Variable::spei, Level::L0, WeightKind::unweighted, std::nullopt, Frequency::annual}.valid());
  CHECK(!DatasetKey{Source::ERA5, Variable::spei, Level::L0, WeightKind::unweighted, std::nullopt, Frequency::monthly}.valid());
  CHECK(!DatasetKey{Source::CRU, Variable::temperature, Level::L0, WeightKind::population, std::nullopt, Frequency::monthly}.valid());
  CHECK(!DatasetKey{Source::CRU, Variable::temperature, Level::L0, WeightKind::unweighted, 2015, Frequency::monthly}.valid());
  CHECK(!DatasetKey{Source::CRU, Variable::generic, Level::L0, WeightKind::unweighted, std::nullopt, Frequency::monthly}.valid());
  CHECK(DatasetKey{Source::custom, Variable::temperature, Level::L1, WeightKind::population, 1995, Frequency::annual}.valid());
}

TEST_CASE("ids round trip") {
  for (const auto& k : enumerate_valid_keys()) CHECK(DatasetKey::parse(k.id()) == k);
  CHECK(DatasetKey{Source::ERA5, Variable::temperature, Level::L0, WeightKind::population, 2015, Frequency::daily}.id() ==
        "ERA5_temperature_L0_population_2015_daily");
  CHECK_THROWS_AS(DatasetKey::parse("ERA5_temperature_L0"), ValidationError);
  CHECK_THROWS_AS(DatasetKey::parse("CRU_temperature_L0_unweighted_none_daily"), ValidationError);
  CHECK_THROWS(DatasetKey::parse("XYZ_temperature_L0_unweighted_none_monthly"));
}

TEST_CASE("metadata JSON round trips") {
  for (const auto& k : enumerate_valid_keys()) {
    const DatasetMeta m{k, "v4.07", {1901, 1}, {2020, 12}, "2026-01-01T00:00:00Z", std::string(64, 'a')};
    CHECK(meta_from_json(meta_to_json(m)) == m);
  }
  const auto j = nlohmann::json::parse(meta_to_json(
      {enumerate_valid_keys().front(), "v", {2000}, {2001}, "t", "c"}));
  for (const char* field : {"key", "source_version", "period", "built_at", "checksum"}) CHECK(j.contains(field));
  CHECK_THROWS_AS(meta_from_json("{"), ParseError);
  CHECK_THROWS_AS(meta_from_json("{\"key\":{}}"), ParseError);
}

TEST_CASE("long CSV of one region and two years") {
  Eigen::MatrixXd v(1, 2);
  v << 1.5, kNaN;
  const std::string csv = export_table(small_table(Frequency::annual, {"AUT"}, {{2000}, {2001}}, v), Shape::long_form, Format::csv);
  CHECK(csv == "region_id,time,value\nAUT,2000,1.5\nAUT,2001,\n");
}

TEST_CASE("long JSON of two regions and three months") {
  Eigen::MatrixXd v(2, 3);
  v << 1, 2, 3, 4, kNaN, 6;
  const std::string out =
      export_table(small_table(Frequency::monthly, {"A", "B"}, {{2001, 1}, {2001, 2}, {2001, 3}}, v), Shape::long_form, Format::json);
  const auto j = nlohmann::json::parse(out);
  REQUIRE(j.is_array());
  CHECK(j.size() == 6);
  for (const auto& rec : j) {
    CHECK(rec.size() == 3);
    CHECK(rec.contains("region_id"));
    CHECK(rec.contains("time"));
    CHECK(rec.contains("value"));
  }
  CHECK(j[4]["value"].is_null());
  CHECK(j[4]["region_id"] == "B");
  CHECK(j[4]["time"] == "2001-02");
  CHECK(j[5]["value"] == 6.0);
}

TEST_CASE("wide exports put timestamps in columns") {
  Eigen::MatrixXd v(2, 2);
  v << 1, 2, kNaN, 4;
  const SeriesTable t = small_table(Frequency::annual, {"A", "B"}, {{2000}, {2001}}, v);
  CHECK(export_table(t, Shape::wide, Format::csv) == "region_id,2000,2001\nA,1,2\nB,,4\n");
  const auto j = nlohmann::json::parse(export_table(t, Shape::wide, Format::json));
  CHECK(j.size() == 2);
  CHECK(j[1]["2000"].is_null());
  CHECK(j[1]["2001"] == 4.0);
}

TEST_CASE("export then import is the identity for every shape and format") {
  std::mt19937_64 rng(7);
  for (Frequency f : {Frequency::daily, Frequency::monthly, Frequency::annual})
    for (int trial = 0; trial < 4; ++trial) {
      const SeriesTable t = random_table(rng, 1 + trial * 3, 1 + trial * 9, f);
      for (Shape s : {Shape::wide, Shape::long_form})
        for (Format fmt : {Format::csv, Format::json}) {
          const std::string bytes = export_table(t, s, fmt);
          const SeriesTable back = import_table(bytes, s, fmt, t.info);
          CHECK(back.identical(t));
          CHECK(export_table(back, s, fmt) == bytes);
        }
    }
}

TEST_CASE("wide to long to wide") {
  std::mt19937_64 rng(8);
  const SeriesTable t = random_table(rng, 5, 24, Frequency::monthly);
  const SeriesTable w = import_table(export_table(t, Shape::wide, Format::csv), Shape::wide, Format::csv, t.info);
  const SeriesTable l = import_table(export_table(w, Shape::long_form, Format::json), Shape::long_form, Format::json, t.info);
  CHECK(l.identical(t));
  CHECK(export_table(l, Shape::wide, Format::csv) == export_table(t, Shape::wide, Format::csv));
}

TEST_CASE("import rejects malformed input") {
  const TableInfo info{};
  CHECK_THROWS_AS(import_table("", Shape::long_form, Format::csv, info), ParseError);
  CHECK_THROWS_AS(import_table("id,time,value\n", Shape::long_form, Format::csv, info), ParseError);
  CHECK_THROWS_AS(import_table("region_id,2000\nA,1,2\n", Shape::wide, Format::csv, info), ParseError);
  CHECK_THROWS(import_table("region_id,time,value\nA,2000,abc\n", Shape::long_form, Format::csv, info));
  CHECK_THROWS(import_table("[{\"region_id\":\"A\"}]", Shape::long_form, Format::json, info));
}

TEST_CASE("payload round trip and checksum") {
  std::mt19937_64 rng(9);
  const SeriesTable t = random_table(rng, 4, 30, Frequency::daily);
  const std::string p = table_to_payload(t);
  CHECK(table_from_payload(p).identical(t));
  CHECK(table_to_payload(table_from_payload(p)) == p);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("store, lookup, upsert and not-found") {
  const fs::path root = fresh_dir("store");
  DatasetStore store(root);
  CHECK(store.list().empty());
  std::mt19937_64 rng(10);
  SeriesTable t = random_table(rng, 3, 12, Frequency::monthly);
  const DatasetKey key{Source::UDEL, Variable::precipitation, Level::L1, WeightKind::nightlight, 2010, Frequency::monthly};
  const DatasetMeta stored = store.store(t, {key, "v5.01", {}, {}, "2026-01-01T00:00:00Z", ""});
  CHECK(stored.checksum == sha256_hex(table_to_payload(t)));
  CHECK(stored.period_start == Timestamp{1990, 1});
  CHECK(stored.period_end == Timestamp{1990, 12});

  const StoredDataset got = store.lookup(key);
  CHECK(got.table.identical(t));
  CHECK(got.meta == stored);
  CHECK(store.lookup(key).meta.checksum == stored.checksum);

  t.values(0, 0) = 123.0;
  const DatasetMeta second = store.store(t, {key, "v5.02", {}, {}, "2026-02-01T00:00:00Z", ""});
  REQUIRE(store.list().size() == 1);
  CHECK(store.list()[0] == second);
  CHECK(store.lookup(key).table.identical(t));
  CHECK(!fs::exists(root / "objects" / stored.checksum.substr(0, 2) / (stored.checksum + ".json")));

  DatasetKey other = key;
  other.base_year = 2015;
  CHECK_THROWS_AS(store.lookup(other), NotFoundError);

  SeriesTable mismatched = t;
  mismatched.info.frequency = Frequency::annual;
  CHECK_THROWS_AS(store.store(mismatched, {key, "v", {}, {}, "", ""}), ValidationError);
  fs::remove_all(root);
}

TEST_CASE("a tampered payload is reported as corruption") {
  const fs::path root = fresh_dir("tamper");
  DatasetStore store(root);
  std::mt19937_64 rng(11);
  const SeriesTable t = random_table(rng, 2, 5, Frequency::annual);
  const DatasetKey key{Source::CRU, Variable::precipitation, Level::L1, WeightKind::nightlight, 2010, Frequency::annual};
  const DatasetMeta m = store.store(t, {key, "v", {}, {}, "", ""});
  CHECK(!m.built_at.empty());
  const fs::path object = root / "objects" / m.checksum.substr(0, 2) / (m.checksum + ".json");
  REQUIRE(fs::exists(object));
  {
    std::ofstream f(object, std::ios::app);
    f << ' ';
  }
  CHECK_THROWS_AS(store.lookup(key), CorruptionError);
  fs::remove(object);
  CHECK_THROWS_AS(store.lookup(key), CorruptionError);
  fs::remove_all(root);
}

TEST_CASE("a reopened store sees the same index") {
  const fs::path root = fresh_dir("reopen");
  std::mt19937_64 rng(12);
  std::vector<DatasetMeta> written;
  {
    DatasetStore store(root);
    for (Frequency f : {Frequency::monthly, Frequency::annual}) {
      const SeriesTable t = random_table(rng, 2, 6, f);
      written.push_back(store.store(t, {{Source::CRU, Variable::precipitation, Level::L1, WeightKind::nightlight, 2010, f}, "v", {}, {}, "x", ""}));
    }
  }
  DatasetStore again(root);
  const auto listed = again.list();
  REQUIRE(listed.size() == 2);
  for (const auto& m : written) CHECK(std::find(listed.begin(), listed.end(), m) != listed.end());
  fs::remove_all(root);
}
