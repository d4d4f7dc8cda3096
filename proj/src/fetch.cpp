#include <cstdlib>
#include <fstream>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sentcast/error.hpp"
#include "sentcast/format.hpp"
#include "sentcast/ingest.hpp"

namespace sentcast {

std::mutex PriceFetcher::cache_mutex_;

FetchOptions FetchOptions::from_environment() {
  FetchOptions opts;
  if (const char* v = std::getenv("SENTCAST_CACHE_DIR"); v != nullptr && *v != '\0') opts.cache_dir = v;
  if (const char* v = std::getenv("SENTCAST_PRICE_URL"); v != nullptr && *v != '\0') opts.base_url = v;
  if (const char* v = std::getenv("SENTCAST_PRICE_API_KEY"); v != nullptr) opts.api_key = v;
  return opts;
}

PriceFetcher::PriceFetcher(FetchOptions options) : options_(std::move(options)) {}

std::filesystem::path PriceFetcher::cache_path(std::string_view symbol, Date start, Date end) const {
  std::string name = fmt::format("{}_{}_{}.json", symbol, start.iso(), end.iso());
  for (char& c : name) {
    if (c == '/' || c == '\\' || c == ':') c = '_';
  }
  return options_.cache_dir / name;
}

PriceSeries PriceFetcher::fetch_prices(std::string_view symbol, Date start, Date end) {
  if (!(start < end)) {
    throw ConfigError(fmt::format("fetch range start {} must precede end {}", start.iso(), end.iso()));
  }
  if (symbol.empty()) throw ConfigError("fetch needs a symbol");

  const auto path = cache_path(symbol, start, end);
  std::string body;
  {
    std::lock_guard lock(cache_mutex_);
    if (std::filesystem::exists(path)) {
      body = read_file(path);
    } else {
      body = download(symbol, start, end);
      // Only well-formed answers are cached; a bad body throws before the write.
      (void)parse_chart_response(body, symbol);
      write_file_atomic(path, body);
    }
  }
  return parse_chart_response(body, symbol);
}

std::string PriceFetcher::download(std::string_view symbol, Date start, Date end) const {
  httplib::Client client(options_.base_url);
  client.set_connection_timeout(options_.timeout_seconds);
  client.set_read_timeout(options_.timeout_seconds);
  client.set_follow_location(true);
  httplib::Headers headers{{"User-Agent", "sentcast/" SENTCAST_VERSION}};
  if (!options_.api_key.empty()) headers.emplace("X-API-KEY", options_.api_key);

  const std::string target =
      fmt::format("/v8/finance/chart/{}?period1={}&period2={}&interval=1d&events=history", symbol,
                  start.unix_seconds(), end.unix_seconds());
  auto res = client.Get(target, headers);
  if (!res) {
    throw TransportError(fmt::format("price request to {} failed: {}", options_.base_url,
                                     httplib::to_string(res.error())));
  }
  // The chart API reports unknown symbols as 404 with a JSON error body.
  if (res->status != 200 && res->status != 404) {
    throw TransportError(fmt::format("price request returned HTTP {}", res->status));
  }
  return res->body;
}

PriceSeries parse_chart_response(std::string_view body, std::string_view symbol) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(fmt::format("malformed chart response for {}: {}", symbol, e.what()));
  }
  const auto& chart = doc.value("chart", nlohmann::json::object());
  const auto error = chart.value("error", nlohmann::json());
  if (!error.is_null()) {
    const std::string code = error.value("code", "");
    if (code == "Not Found") throw DataError(fmt::format("unknown symbol '{}'", symbol));
    throw DataError(fmt::format("chart API error for {}: {} {}", symbol, code,
                                error.value("description", "")));
  }
  const auto result = chart.value("result", nlohmann::json());
  if (!result.is_array() || result.empty()) {
    throw DataError(fmt::format("unknown symbol '{}'", symbol));
  }
  const auto& r0 = result.at(0);
  if (!r0.contains("timestamp") || r0["timestamp"].empty()) {
    throw DataError(fmt::format("empty range: no bars returned for {}", symbol));
  }
  const auto& stamps = r0.at("timestamp");
  const auto& closes = r0.at("indicators").at("quote").at(0).at("close");
  if (stamps.size() != closes.size()) {
    throw TransportError(fmt::format("chart response for {} has mismatched arrays", symbol));
  }
  std::vector<PriceBar> bars;
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    if (closes[i].is_null()) continue;
    const auto secs = stamps[i].get<long long>();
    const auto days = std::chrono::floor<std::chrono::days>(std::chrono::sys_seconds{std::chrono::seconds{secs}});
    bars.push_back(PriceBar{Date{days}, closes[i].get<double>()});
  }
  if (bars.empty()) throw DataError(fmt::format("empty range: no bars returned for {}", symbol));
  return PriceSeries(std::move(bars));
}

}  // namespace sentcast
