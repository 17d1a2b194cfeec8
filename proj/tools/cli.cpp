#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zonalclim/api.hpp"
#include "zonalclim/catalog.hpp"
#include "zonalclim/error.hpp"
#include "zonalclim/geom.hpp"
#include "zonalclim/grid_archive.hpp"
#include "zonalclim/temporal.hpp"
#include "zonalclim/weights.hpp"
#include "zonalclim/zonal.hpp"

namespace zonalclim::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Either a file whose header holds the grid keys, or an inline
/// "rows=..,cols=..,.." list.
GridSpec grid_spec_arg(const std::string& arg) {
  if (std::filesystem::is_regular_file(arg)) {
    std::ifstream in(arg, std::ios::binary);
    return read_grid_spec(in);
  }
  std::string text = arg;
  std::replace(text.begin(), text.end(), ',', '\n');
  std::istringstream in(text);
  return read_grid_spec(in);
}

Raster single_frame(const std::string& path) {
  RasterSeries s = load_grid_archive(path);
  if (s.size() != 1) throw ValidationError(path + ": expected a single-frame archive, found " + std::to_string(s.size()));
  return s[0];
}

void write_output(const std::string& path, const std::string& bytes, std::ostream& out) {
  if (path == "-") {
    out << bytes;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << bytes;
  if (!f) throw Error("failed writing " + path);
}

Encoding parse_encoding(const std::string& s) {
  if (s == "text") return Encoding::text;
  if (s == "le_float64") return Encoding::le_float64;
  throw UsageError("unknown encoding '" + s + "'");
}

WeightGrid weights_arg(const std::string& path, const GridSpec& spec) {
  return path.empty() ? unweighted(spec) : load_weight_grid(path);
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string stage;
};

struct BuildWeights {
  std::string kind;
  std::optional<int> base_year;
  std::string density;
  std::string lights;
  std::vector<std::string> refs;
  int factor = 1;
  std::string target_spec;
  std::string out;
  std::string encoding = "text";

  void run(Context& ctx) const {
    const WeightKind k = parse_weight_kind(kind);
    if (k != WeightKind::unweighted && !base_year) throw UsageError("--base-year is required with --kind " + kind);
    if (k == WeightKind::unweighted && base_year) throw UsageError("--base-year is not allowed with --kind unweighted");
    if (k == WeightKind::population && density.empty()) throw UsageError("--density is required with --kind population");
    if (k == WeightKind::nightlight && lights.empty()) throw UsageError("--lights is required with --kind nightlight");
    if (k == WeightKind::unweighted && target_spec.empty())
      throw UsageError("--target-spec is required with --kind unweighted");
    if (factor < 1) throw UsageError("--factor must be at least 1");
    const Encoding enc = parse_encoding(encoding);

    std::optional<GridSpec> target;
    if (!target_spec.empty()) {
      ctx.stage = "target-spec";
      target = grid_spec_arg(target_spec);
    }

    std::optional<WeightGrid> w;
    if (k == WeightKind::unweighted) {
      w = unweighted(*target);
    } else if (k == WeightKind::population) {
      ctx.stage = "read-density";
      const Raster d = single_frame(density);
      ctx.stage = "population";
      w = population_weight(d, target.value_or(d.spec()), *base_year);
    } else {
      ctx.stage = "read-lights";
      Raster light = single_frame(lights);
      if (factor > 1) {
        ctx.stage = "downsample";
        light = downsample_block_mean(light, factor);
      }
      if (!refs.empty()) {
        ctx.stage = "read-refs";
        const std::array<Raster, 3> r{single_frame(refs[0]), single_frame(refs[1]), single_frame(refs[2])};
        ctx.stage = "aurora";
        light = aurora_correct(light, r);
      }
      ctx.stage = "nightlight";
      w = nightlight_weight(light, *base_year);
      if (target) {
        ctx.stage = "resample";
        w = resample_half_offset(*w, *target);
      }
    }
    ctx.stage = "write";
    write_output(out, write_grid_archive(to_series(*w), weight_archive_options(*w, enc)), ctx.out);
  }
};

struct BuildCoverage {
  std::string grid_spec;
  std::string boundaries;
  std::string level;
  std::string out;
  std::string store;
  unsigned jobs = 0;

  void run(Context& ctx) const {
    ctx.stage = "grid-spec";
    const GridSpec spec = grid_spec_arg(grid_spec);
    std::optional<Level> lv;
    if (!level.empty()) lv = parse_level(level);
    ctx.stage = "boundaries";
    std::vector<std::string> warnings;
    const RegionSet regions = load_geojson(boundaries, lv, &warnings);
    for (const auto& w : warnings) ctx.err << "warning: " << w << '\n';
    ctx.stage = "coverage";
    const CoverageMatrix cov = build_coverage(spec, regions, {jobs});
    ctx.stage = "write";
    write_output(out, write_coverage(cov), ctx.out);
    if (!store.empty()) {
      const auto dir = std::filesystem::path(store) / "boundaries";
      std::filesystem::create_directories(dir);
      write_output((dir / (std::string(to_string(regions.level())) + ".geojson")).string(), to_geojson(regions),
                   ctx.out);
    }
  }
};

struct Output {
  std::string out = "-";
  std::string shape = "long";
  std::string format = "csv";

  void emit(Context& ctx, const SeriesTable& table) const {
    const Shape s = parse_shape(shape);
    const Format f = parse_format(format);
    ctx.stage = "write";
    write_output(out, export_table(table, s, f), ctx.out);
  }
};

struct Aggregate {
  std::string climate;
  std::string coverage;
  std::string weights;
  std::string upscale = "none";
  std::string to = "annual";
  unsigned jobs = 0;
  Output output;
  std::string store;
  std::string source;
  std::string source_version;
  std::string built_at;

  SeriesTable table(Context& ctx) const {
    std::optional<UpscaleStat> stat;
    if (upscale != "none") stat = parse_upscale_stat(upscale);
    const Frequency target = parse_frequency(to);
    if (!store.empty() && source.empty()) throw UsageError("--source is required with --store");

    ctx.stage = "read-climate";
    const RasterSeries xs = load_grid_archive(climate);
    ctx.stage = "read-coverage";
    const CoverageMatrix cov = load_coverage(coverage);
    ctx.stage = "read-weights";
    const WeightGrid w = weights_arg(weights, xs.spec());
    ctx.stage = "aggregate";
    SeriesTable t = aggregate_series(xs, cov, w, {jobs});
    if (stat) {
      ctx.stage = "upscale";
      t = zonalclim::upscale(t, target, *stat);
    }
    return t;
  }

  void run(Context& ctx) const {
    const SeriesTable t = table(ctx);
    output.emit(ctx, t);
    if (store.empty()) return;
    ctx.stage = "store";
    DatasetMeta meta;
    meta.key = {parse_source(source), t.info.variable, t.info.level, t.info.weighting, t.info.base_year,
                t.info.frequency};
    meta.source_version = source_version;
    meta.built_at = built_at;
    DatasetStore(store).store(t, meta);
  }
};

struct Extremes {
  std::string climate;
  std::string coverage;
  std::string weights;
  std::string mode;
  double value = 0.0;
  std::string period = "year";
  unsigned jobs = 0;
  Output output;

  void run(Context& ctx) const {
    ThresholdSpec spec;
    spec.mode = parse_threshold_mode(mode);
    spec.value = value;
    spec.period = parse_threshold_period(period);
    ctx.stage = "read-climate";
    const RasterSeries xs = load_grid_archive(climate);
    ctx.stage = "read-coverage";
    const CoverageMatrix cov = load_coverage(coverage);
    ctx.stage = "read-weights";
    const WeightGrid w = weights_arg(weights, xs.spec());
    ctx.stage = "aggregate";
    const SeriesTable daily = aggregate_series(xs, cov, w, {jobs});
    ctx.stage = "extremes";
    output.emit(ctx, count_exceedance_days(daily, spec));
  }
};

struct Serve {
  std::string store;
  std::string host;
  int port = -1;

  void run(Context& ctx) const {
    ServerConfig config = ServerConfig::from_env();
    if (!host.empty()) config.host = host;
    if (port >= 0) config.port = port;
    if (!std::filesystem::is_directory(store)) throw Error("store directory " + store + " does not exist");
    const DatasetStore ds(store);
    const ApiService service(ds);
    HttpServer server(service, config.cors_origin);
    const int bound = server.bind(config.host, config.port);
    ctx.out << "listening on " << config.host << ':' << bound << std::endl;
    server.listen();
  }
};

struct Validate {
  std::string archive;
  std::string boundaries;
  std::string level;

  int run(Context& ctx) const {
    if (archive.empty() == boundaries.empty()) throw UsageError("give exactly one of --archive or --boundaries");
    try {
      if (!archive.empty()) {
        const ParsedArchive a = load_grid_archive_full(archive);
        const GridSpec& s = a.series.spec();
        ctx.out << "ok: " << archive << ": " << s.rows << 'x' << s.cols << ' ' << to_string(s.registration) << ", "
                << a.series.size() << ' ' << to_string(a.series.frequency()) << " frame(s) of "
                << to_string(a.series.variable()) << ", " << to_string(a.options.encoding) << '\n';
      } else {
        std::optional<Level> lv;
        if (!level.empty()) lv = parse_level(level);
        std::vector<std::string> warnings;
        const RegionSet r = load_geojson(boundaries, lv, &warnings);
        for (const auto& w : warnings) ctx.out << "warning: " << w << '\n';
        ctx.out << "ok: " << boundaries << ": " << r.regions().size() << " region(s) at level "
                << to_string(r.level()) << '\n';
      }
      return 0;
    } catch (const Error& e) {
      ctx.out << "finding: " << e.what() << '\n';
      return 1;
    }
  }
};

void add_output(CLI::App* cmd, Output& o) {
  cmd->add_option("--out", o.out, "Output path, - for stdout")->capture_default_str();
  cmd->add_option("--shape", o.shape, "long or wide")->capture_default_str();
  cmd->add_option("--format", o.format, "csv or json")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zonal climate aggregation toolkit", "zonalclim"};
  app.require_subcommand(1);

  BuildWeights bw;
  auto* c_bw = app.add_subcommand("build-weights", "Build a weight grid archive");
  c_bw->add_option("--kind", bw.kind, "unweighted, population or nightlight")->required();
  c_bw->add_option("--base-year", bw.base_year, "Base year of the weighting data");
  c_bw->add_option("--density", bw.density, "Population density archive");
  c_bw->add_option("--lights", bw.lights, "Night-light radiance archive");
  c_bw->add_option("--refs", bw.refs, "Three reference archives for aurora correction")->expected(3)->delimiter(',');
  c_bw->add_option("--factor", bw.factor, "Block-mean downsampling factor for night lights")->capture_default_str();
  c_bw->add_option("--target-spec", bw.target_spec, "Target grid: archive/spec file or k=v,... list");
  c_bw->add_option("--out", bw.out, "Output archive")->required();
  c_bw->add_option("--encoding", bw.encoding, "text or le_float64")->capture_default_str();

  BuildCoverage bc;
  auto* c_bc = app.add_subcommand("build-coverage", "Build the coverage matrix cache");
  c_bc->add_option("--grid-spec", bc.grid_spec, "Grid: archive/spec file or k=v,... list")->required();
  c_bc->add_option("--boundaries", bc.boundaries, "GeoJSON FeatureCollection")->required();
  c_bc->add_option("--level", bc.level, "L0 or L1");
  c_bc->add_option("--out", bc.out, "Output cache, - for stdout")->required();
  c_bc->add_option("--store", bc.store, "Also publish the boundaries into this store");
  c_bc->add_option("--jobs", bc.jobs, "Worker threads, 0 = all cores");

  Aggregate ag;
  auto* c_ag = app.add_subcommand("aggregate", "Aggregate a climate archive to regions");
  c_ag->add_option("--climate", ag.climate, "Climate archive")->required();
  c_ag->add_option("--coverage", ag.coverage, "Coverage cache")->required();
  c_ag->add_option("--weights", ag.weights, "Weight archive (default: unweighted)");
  c_ag->add_option("--upscale", ag.upscale, "mean, sum or none")->capture_default_str();
  c_ag->add_option("--to", ag.to, "Upscale target: monthly or annual")->capture_default_str();
  c_ag->add_option("--jobs", ag.jobs, "Worker threads, 0 = all cores");
  add_output(c_ag, ag.output);
  c_ag->add_option("--store", ag.store, "Also store the table in this catalog directory");
  c_ag->add_option("--source", ag.source, "Source name for the stored key");
  c_ag->add_option("--source-version", ag.source_version, "Source version recorded in the catalog");
  c_ag->add_option("--built-at", ag.built_at, "Build timestamp recorded in the catalog");

  Extremes ex;
  auto* c_ex = app.add_subcommand("extremes", "Count threshold exceedance days");
  c_ex->add_option("--climate", ex.climate, "Daily climate archive")->required();
  c_ex->add_option("--coverage", ex.coverage, "Coverage cache")->required();
  c_ex->add_option("--weights", ex.weights, "Weight archive (default: unweighted)");
  c_ex->add_option("--mode", ex.mode, "absolute or quantile")->required();
  c_ex->add_option("--value", ex.value, "Threshold value or quantile level")->required();
  c_ex->add_option("--period", ex.period, "month or year")->capture_default_str();
  c_ex->add_option("--jobs", ex.jobs, "Worker threads, 0 = all cores");
  add_output(c_ex, ex.output);

  Serve sv;
  auto* c_sv = app.add_subcommand("serve", "Serve a dataset store over HTTP");
  c_sv->add_option("--store", sv.store, "Store directory")->required();
  c_sv->add_option("--host", sv.host, "Bind host (overrides ZONALCLIM_ADDR)");
  c_sv->add_option("--port", sv.port, "Bind port (overrides ZONALCLIM_ADDR)");

  Validate va;
  auto* c_va = app.add_subcommand("validate", "Schema-check an archive or a boundaries file");
  c_va->add_option("--archive", va.archive, "Grid archive");
  c_va->add_option("--boundaries", va.boundaries, "GeoJSON FeatureCollection");
  c_va->add_option("--level", va.level, "L0 or L1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Context ctx{out, err, {}};
  try {
    if (c_bw->parsed()) bw.run(ctx);
    if (c_bc->parsed()) bc.run(ctx);
    if (c_ag->parsed()) ag.run(ctx);
    if (c_ex->parsed()) ex.run(ctx);
    if (c_sv->parsed()) sv.run(ctx);
    if (c_va->parsed()) return va.run(ctx);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error";
    if (!ctx.stage.empty()) err << " [" << ctx.stage << ']';
    err << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace zonalclim::cli
