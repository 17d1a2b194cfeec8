#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zonalclim/catalog.hpp"
#include "zonalclim/temporal.hpp"

namespace zonalclim {

using QueryMap = std::multimap<std::string, std::string>;

/// Parsed query string shared by every data endpoint.
struct QueryParams {
  DatasetKey key;
  std::optional<int> year_start;
  std::optional<int> year_end;
  std::vector<std::string> region_ids;
  std::optional<ThresholdSpec> threshold;
  Shape shape = Shape::long_form;
  std::optional<Format> format;
  std::size_t offset = 0;
  std::size_t limit = 50'000;

  /// Throws ValidationError on missing or malformed parameters.
  static QueryParams parse(const QueryMap& query);
};

/// Rows restricted to the requested regions and [year_start, year_end].
SeriesTable filter_table(const SeriesTable& table, const QueryParams& params);

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

/// Read-only request handling over a dataset store. Every error body is
/// JSON {code, message}.
///
///   GET /catalog
///   GET /series?<key>[&year_start&year_end&region_ids&offset&limit]
///   GET /map?<key>&time=T
///   GET /extremes?<key>&threshold_mode&threshold_value&threshold_period
///   GET /download?<key>[&shape&format]
///   GET /preview?<key>&n=k[&shape]
///   GET /boundaries?level=L0|L1
class ApiService {
 public:
  explicit ApiService(const DatasetStore& store);

  HttpResponse handle(std::string_view path, const QueryMap& query) const;

 private:
  HttpResponse catalog() const;
  HttpResponse series(const QueryParams& p) const;
  HttpResponse map(const QueryParams& p, const QueryMap& query) const;
  HttpResponse extremes(const QueryParams& p) const;
  HttpResponse download(const QueryParams& p) const;
  HttpResponse preview(const QueryParams& p, const QueryMap& query) const;
  HttpResponse boundaries(const QueryMap& query) const;

  const DatasetStore& store_;
};

HttpResponse error_response(int status, std::string_view code, std::string_view message);

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";

  /// ZONALCLIM_ADDR (host:port) and ZONALCLIM_CORS_ORIGIN override the
  /// defaults.
  static ServerConfig from_env();
};

/// HTTP/1.1 front end for ApiService.
class HttpServer {
 public:
  HttpServer(const ApiService& service, std::string cors_origin);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Bind to host:port (port 0 picks a free one); returns the bound port.
  int bind(const std::string& host, int port);
  /// Serve until stop(); call after bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace zonalclim
