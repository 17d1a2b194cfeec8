#include "zonalclim/api.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "zonalclim/error.hpp"
#include "zonalclim/numeric_text.hpp"

namespace zonalclim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::optional<std::string> get(const QueryMap& q, const std::string& name) {
  auto it = q.find(name);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

std::string require(const QueryMap& q, const std::string& name) {
  auto v = get(q, name);
  if (!v || v->empty()) throw ValidationError("missing query parameter '" + name + "'");
  return *v;
}

long long int_param(const std::string& name, const std::string& text) {
  auto v = parse_int(text);
  if (!v) throw ValidationError("query parameter '" + name + "' must be an integer");
  return *v;
}

std::size_t count_param(const QueryMap& q, const std::string& name, std::size_t fallback) {
  auto v = get(q, name);
  if (!v) return fallback;
  const long long n = int_param(name, *v);
  if (n < 0) throw ValidationError("query parameter '" + name + "' must be non-negative");
  return static_cast<std::size_t>(n);
}

HttpResponse json_response(std::string body) {
  HttpResponse r;
  r.body = std::move(body);
  return r;
}

}  // namespace

QueryParams QueryParams::parse(const QueryMap& q) {
  QueryParams p;
  p.key.source = parse_source(require(q, "source"));
  p.key.variable = parse_variable(require(q, "variable"));
  p.key.level = parse_level(require(q, "level"));
  p.key.weighting = parse_weight_kind(require(q, "weighting"));
  if (auto y = get(q, "base_year"); y && !y->empty() && *y != "none")
    p.key.base_year = static_cast<int>(int_param("base_year", *y));
  p.key.frequency = parse_frequency(require(q, "frequency"));
  p.key.validate();

  if (auto v = get(q, "year_start")) p.year_start = static_cast<int>(int_param("year_start", *v));
  if (auto v = get(q, "year_end")) p.year_end = static_cast<int>(int_param("year_end", *v));
  if (p.year_start && p.year_end && *p.year_start > *p.year_end)
    throw ValidationError("year_start must not exceed year_end");

  if (auto v = get(q, "region_ids")) {
    std::stringstream ss(*v);
    std::string id;
    while (std::getline(ss, id, ','))
      if (!id.empty()) p.region_ids.push_back(id);
  }

  if (auto mode = get(q, "threshold_mode")) {
    ThresholdSpec t;
    t.mode = parse_threshold_mode(*mode);
    auto value = parse_double(require(q, "threshold_value"));
    if (!value) throw ValidationError("threshold_value must be a number");
    t.value = *value;
    t.period = parse_threshold_period(get(q, "threshold_period").value_or("year"));
    t.validate();
    if (p.key.frequency != Frequency::daily) throw FrequencyError("thresholds need a daily dataset");
    p.threshold = t;
  }

  if (auto v = get(q, "shape")) p.shape = parse_shape(*v);
  if (auto v = get(q, "format")) p.format = parse_format(*v);
  p.offset = count_param(q, "offset", 0);
  p.limit = count_param(q, "limit", p.limit);
  return p;
}

SeriesTable filter_table(const SeriesTable& table, const QueryParams& params) {
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  const std::set<std::string> wanted(params.region_ids.begin(), params.region_ids.end());
  for (std::size_t i = 0; i < table.regions.size(); ++i)
    if (wanted.empty() || wanted.contains(table.regions[i])) rows.push_back(static_cast<Eigen::Index>(i));
  for (std::size_t t = 0; t < table.times.size(); ++t) {
    const int year = table.times[t].year;
    if (params.year_start && year < *params.year_start) continue;
    if (params.year_end && year > *params.year_end) continue;
    cols.push_back(static_cast<Eigen::Index>(t));
  }
  SeriesTable out;
  out.info = table.info;
  for (Eigen::Index i : rows) out.regions.push_back(table.regions[i]);
  for (Eigen::Index t : cols) out.times.push_back(table.times[t]);
  out.values = table.values(rows, cols);
  return out;
}

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
  HttpResponse r;
  r.status = status;
  r.body = json{{"code", code}, {"message", message}}.dump();
  return r;
}

ApiService::ApiService(const DatasetStore& store) : store_(store) {}

HttpResponse ApiService::handle(std::string_view path, const QueryMap& query) const {
  try {
    if (path == "/catalog") return catalog();
    if (path == "/boundaries") return boundaries(query);
    if (path != "/series" && path != "/map" && path != "/extremes" && path != "/download" && path != "/preview")
      return error_response(404, "no_route", "unknown endpoint " + std::string(path));
    const QueryParams p = QueryParams::parse(query);
    if (path == "/series") return series(p);
    if (path == "/map") return map(p, query);
    if (path == "/extremes") return extremes(p);
    if (path == "/download") return download(p);
    return preview(p, query);
  } catch (const NotFoundError& e) {
    return error_response(404, "not_found", e.what());
  } catch (const FrequencyError& e) {
    return error_response(400, "unsupported_frequency", e.what());
  } catch (const CorruptionError& e) {
    return error_response(500, "corrupt_dataset", e.what());
  } catch (const ValidationError& e) {
    return error_response(400, "invalid_params", e.what());
  } catch (const ParseError& e) {
    return error_response(400, "invalid_params", e.what());
  } catch (const DomainError& e) {
    return error_response(400, "invalid_params", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse ApiService::catalog() const {
  ordered_json out = ordered_json::array();
  for (const DatasetMeta& m : store_.list()) out.push_back(ordered_json::parse(meta_to_json(m)));
  return json_response(out.dump());
}

HttpResponse ApiService::series(const QueryParams& p) const {
  const SeriesTable table = filter_table(store_.lookup(p.key).table, p);
  const std::size_t total = table.regions.size() * table.times.size();
  HttpResponse r;
  if (p.offset == 0 && p.limit >= total) {
    r.body = export_table(table, Shape::long_form, Format::json);
  } else {
    const ordered_json all = ordered_json::parse(export_table(table, Shape::long_form, Format::json));
    ordered_json page = ordered_json::array();
    for (std::size_t k = p.offset; k < total && k - p.offset < p.limit; ++k) page.push_back(all[k]);
    r.body = page.dump();
  }
  r.headers.emplace_back("X-Total-Count", std::to_string(total));
  return r;
}

HttpResponse ApiService::map(const QueryParams& p, const QueryMap& query) const {
  const Timestamp when = Timestamp::parse(require(query, "time"));
  const SeriesTable table = filter_table(store_.lookup(p.key).table, p);
  auto it = std::find(table.times.begin(), table.times.end(), when);
  if (it == table.times.end()) throw NotFoundError("timestamp " + when.str() + " is not covered by " + p.key.id());
  const auto t = static_cast<Eigen::Index>(it - table.times.begin());
  ordered_json out = ordered_json::object();
  for (std::size_t i = 0; i < table.regions.size(); ++i) {
    const auto v = table.at(static_cast<Eigen::Index>(i), t);
    out[table.regions[i]] = v ? ordered_json(*v) : ordered_json(nullptr);
  }
  return json_response(out.dump());
}

HttpResponse ApiService::extremes(const QueryParams& p) const {
  if (p.key.frequency != Frequency::daily) throw FrequencyError("exceedance counts need a daily dataset");
  if (!p.threshold) throw ValidationError("missing threshold_mode / threshold_value");
  QueryParams regions_only = p;
  regions_only.year_start.reset();
  regions_only.year_end.reset();
  const SeriesTable history = filter_table(store_.lookup(p.key).table, regions_only);
  QueryParams years_only = p;
  years_only.region_ids.clear();
  const SeriesTable counts = filter_table(count_exceedance_days(history, *p.threshold), years_only);
  return json_response(export_table(counts, Shape::long_form, Format::json));
}

HttpResponse ApiService::download(const QueryParams& p) const {
  const SeriesTable table = filter_table(store_.lookup(p.key).table, p);
  const Format format = p.format.value_or(Format::csv);
  HttpResponse r;
  r.body = export_table(table, p.shape, format);
  r.content_type = format == Format::csv ? "text/csv; charset=utf-8" : "application/json";
  r.headers.emplace_back("Content-Disposition", "attachment; filename=\"" + p.key.id() + "_" +
                                                    std::string(to_string(p.shape)) + "." +
                                                    std::string(to_string(format)) + "\"");
  return r;
}

HttpResponse ApiService::preview(const QueryParams& p, const QueryMap& query) const {
  const std::size_t n = count_param(query, "n", 10);
  const SeriesTable table = filter_table(store_.lookup(p.key).table, p);
  const ordered_json all = ordered_json::parse(export_table(table, p.shape, Format::json));
  ordered_json columns = ordered_json::array({"region_id"});
  if (p.shape == Shape::long_form) {
    columns.push_back("time");
    columns.push_back("value");
  } else {
    for (const Timestamp& t : table.times) columns.push_back(t.str());
  }
  ordered_json records = ordered_json::array();
  for (std::size_t k = 0; k < std::min(n, all.size()); ++k) records.push_back(all[k]);
  ordered_json out;
  out["key"] = p.key.id();
  out["shape"] = to_string(p.shape);
  out["columns"] = std::move(columns);
  out["total_records"] = all.size();
  out["records"] = std::move(records);
  return json_response(out.dump());
}

HttpResponse ApiService::boundaries(const QueryMap& query) const {
  const Level level = parse_level(require(query, "level"));
  const auto path = store_.root() / "boundaries" / (std::string(to_string(level)) + ".geojson");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("no boundaries published for level " + std::string(to_string(level)));
  std::ostringstream ss;
  ss << in.rdbuf();
  HttpResponse r;
  r.content_type = "application/geo+json";
  r.body = ss.str();
  return r;
}

ServerConfig ServerConfig::from_env() {
  ServerConfig c;
  if (const char* addr = std::getenv("ZONALCLIM_ADDR"); addr && *addr) {
    const std::string a(addr);
    const auto colon = a.rfind(':');
    if (colon == std::string::npos) throw ValidationError("ZONALCLIM_ADDR must be host:port");
    c.host = a.substr(0, colon);
    auto port = parse_int(a.substr(colon + 1));
    if (!port || *port < 0 || *port > 65535) throw ValidationError("ZONALCLIM_ADDR has an invalid port");
    c.port = static_cast<int>(*port);
  }
  if (const char* origin = std::getenv("ZONALCLIM_CORS_ORIGIN"); origin && *origin) c.cors_origin = origin;
  return c;
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(const ApiService& service, std::string cors_origin) : impl_(std::make_unique<Impl>()) {
  auto& svr = impl_->server;
  svr.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                           {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  svr.Get(".*", [&service](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = service.handle(req.path, req.params);
    res.status = r.status;
    for (const auto& [k, v] : r.headers) res.set_header(k, v);
    res.set_content(r.body, r.content_type);
  });
  svr.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  svr.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const HttpResponse r = error_response(res.status, "http_error", "request to " + req.path + " failed");
    res.set_content(r.body, r.content_type);
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace zonalclim
