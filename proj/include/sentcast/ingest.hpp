#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentcast/date.hpp"

namespace sentcast {

inline constexpr std::size_t kDefaultHeadlineCap = 10;

struct PriceBar {
  Date date;
  double close = 0.0;

  friend bool operator==(const PriceBar&, const PriceBar&) = default;
};

/// Daily closing prices with strictly increasing dates and positive closes.
class PriceSeries {
 public:
  PriceSeries() = default;
  /// Validates the invariants; throws DataError naming the offending date.
  explicit PriceSeries(std::vector<PriceBar> bars);

  [[nodiscard]] std::span<const PriceBar> bars() const { return bars_; }
  [[nodiscard]] std::size_t size() const { return bars_.size(); }
  [[nodiscard]] bool empty() const { return bars_.empty(); }
  [[nodiscard]] const PriceBar& operator[](std::size_t i) const { return bars_[i]; }
  [[nodiscard]] std::vector<double> closes() const;

  friend bool operator==(const PriceSeries&, const PriceSeries&) = default;

 private:
  std::vector<PriceBar> bars_;
};

struct NewsDay {
  Date date;
  std::vector<std::string> headlines;

  friend bool operator==(const NewsDay&, const NewsDay&) = default;
};

/// Prices plus one headline list per trading day; `news[i]` belongs to `prices[i]`.
struct AlignedSeries {
  PriceSeries prices;
  std::vector<NewsDay> news;

  [[nodiscard]] std::size_t headline_count() const;
};

enum class AlignPolicy { carry_forward, drop };

AlignPolicy parse_align_policy(std::string_view text);

/// Non-fatal findings collected while loading (e.g. headline truncation).
struct Diagnostics {
  std::vector<std::string> warnings;
};

/// Reads a `date,close` CSV. Rows may arrive in any order; the result is
/// sorted. Errors carry the source name and 1-based line number.
PriceSeries parse_prices(std::istream& in, std::string_view source_name = "<stream>");
PriceSeries load_prices(const std::filesystem::path& path);
void write_prices(const PriceSeries& series, std::ostream& out);

/// Reads NDJSON records `{"date": ..., "headlines": [...]}`. Records sharing a
/// date are merged in file order and truncated to `cap` (earliest kept).
std::vector<NewsDay> parse_news(std::istream& in, std::string_view source_name = "<stream>",
                                std::size_t cap = kDefaultHeadlineCap, Diagnostics* diag = nullptr);
std::vector<NewsDay> load_news(const std::filesystem::path& path,
                               std::size_t cap = kDefaultHeadlineCap, Diagnostics* diag = nullptr);
void write_news(std::span<const NewsDay> news, std::ostream& out);

/// Maps news onto trading days. With carry_forward, news dated on a
/// non-trading day moves to the next trading day; news after the last trading
/// day has nowhere to go and is dropped.
AlignedSeries align(const PriceSeries& prices, std::span<const NewsDay> news, AlignPolicy policy,
                    std::size_t cap = kDefaultHeadlineCap, Diagnostics* diag = nullptr);

struct FetchOptions {
  std::filesystem::path cache_dir = "sentcast-cache";
  /// Chart API root; `SENTCAST_PRICE_URL` overrides the default.
  std::string base_url = "https://query1.finance.yahoo.com";
  /// Sent as `X-API-KEY` when non-empty (`SENTCAST_PRICE_API_KEY`).
  std::string api_key;
  int timeout_seconds = 30;

  /// Defaults overlaid with SENTCAST_CACHE_DIR / SENTCAST_PRICE_URL / SENTCAST_PRICE_API_KEY.
  static FetchOptions from_environment();
};

/// Daily-close client for the Yahoo chart API. Responses are cached verbatim
/// under `cache_dir`, so a repeated request never touches the network.
class PriceFetcher {
 public:
  explicit PriceFetcher(FetchOptions options);

  /// Closes for `symbol` over [start, end). Throws ConfigError for an empty
  /// range, DataError for an unknown symbol or a range with no bars, and
  /// TransportError when the request fails.
  PriceSeries fetch_prices(std::string_view symbol, Date start, Date end);

  [[nodiscard]] std::filesystem::path cache_path(std::string_view symbol, Date start, Date end) const;

 private:
  std::string download(std::string_view symbol, Date start, Date end) const;

  FetchOptions options_;
  static std::mutex cache_mutex_;
};

/// Decodes a chart-API JSON body into a series. Exposed for fixture tests.
PriceSeries parse_chart_response(std::string_view body, std::string_view symbol);

}  // namespace sentcast
