#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sentcast/date.hpp"
#include "sentcast/ingest.hpp"

namespace sentcast {

enum class SentimentLabel { positive, negative, neutral };

std::string_view to_string(SentimentLabel label);
SentimentLabel parse_label(std::string_view text);

/// One classifier verdict: a label plus its confidence in [0, 1].
struct HeadlineSentiment {
  SentimentLabel label = SentimentLabel::neutral;
  double score = 0.0;

  friend bool operator==(const HeadlineSentiment&, const HeadlineSentiment&) = default;
};

struct DailySentiment {
  Date date;
  double value = 0.0;  // in [-1, 1]

  friend bool operator==(const DailySentiment&, const DailySentiment&) = default;
};

/// Scores headlines one by one. Implementations are immutable after
/// construction and safe to call from several threads.
class SentimentProvider {
 public:
  virtual ~SentimentProvider() = default;
  [[nodiscard]] virtual std::string_view backend() const = 0;
  /// One result per headline, in input order. Throws DataError on empty
  /// headlines.
  [[nodiscard]] virtual std::vector<HeadlineSentiment> score_headlines(
      std::span<const std::string> headlines) const = 0;
};

/// Keyword-count classifier. Deterministic and dependency free; stands in for
/// a real model in tests and offline runs.
///
/// A headline is tokenized into lowercase alphanumeric words. With p positive
/// and n negative keyword hits: p > n gives positive, n > p negative, and the
/// score is 0.5 + 0.5 * |p - n| / (p + n). Ties score neutral 0.5; no hits at
/// all score neutral 1.0.
class LexiconStubProvider final : public SentimentProvider {
 public:
  LexiconStubProvider();
  [[nodiscard]] std::string_view backend() const override { return "lexicon_stub"; }
  [[nodiscard]] std::vector<HeadlineSentiment> score_headlines(
      std::span<const std::string> headlines) const override;

  [[nodiscard]] HeadlineSentiment score_one(std::string_view headline) const;
};

/// Looks headlines up in a table recorded from an earlier scoring run. The
/// table is NDJSON: `{"headline": "...", "label": "positive", "score": 0.93}`.
class PrecomputedHeadlineProvider final : public SentimentProvider {
 public:
  explicit PrecomputedHeadlineProvider(std::unordered_map<std::string, HeadlineSentiment> table);
  static PrecomputedHeadlineProvider load(const std::filesystem::path& path);

  [[nodiscard]] std::string_view backend() const override { return "precomputed_file"; }
  /// Throws DataError for a headline that is not in the table.
  [[nodiscard]] std::vector<HeadlineSentiment> score_headlines(
      std::span<const std::string> headlines) const override;

 private:
  std::unordered_map<std::string, HeadlineSentiment> table_;
};

struct RemoteOptions {
  /// Service root, e.g. `http://127.0.0.1:8080`; `SENTCAST_SENTIMENT_URL` by default.
  std::string url;
  std::size_t max_in_flight = 4;
  std::size_t max_batch = 64;
  int timeout_seconds = 60;

  static RemoteOptions from_environment();
};

/// Client for the scoring service (`POST /v1/score`).
class RemoteSentimentProvider final : public SentimentProvider {
 public:
  explicit RemoteSentimentProvider(RemoteOptions options);

  [[nodiscard]] std::string_view backend() const override { return "remote_service"; }
  /// Throws TransportError on connection failures, non-200 statuses, and
  /// responses that break the wire contract.
  [[nodiscard]] std::vector<HeadlineSentiment> score_headlines(
      std::span<const std::string> headlines) const override;

 private:
  std::vector<HeadlineSentiment> post_batch(std::span<const std::string> batch) const;

  RemoteOptions options_;
};

/// Serializes a request body `{"headlines": [...]}`.
std::string encode_score_request(std::span<const std::string> headlines);
/// Parses a response body and checks it against the request size.
std::vector<HeadlineSentiment> decode_score_response(std::string_view body, std::size_t expected);

/// positive -> +score, negative -> -score, neutral -> 0.
double signed_score(const HeadlineSentiment& hs);

enum class Aggregation {
  signed_mean,    // mean of signed scores
  max_magnitude,  // signed score with the largest magnitude (earliest on ties)
  count_balance,  // (#positive - #negative) / count
};

Aggregation parse_aggregation(std::string_view text);

/// Reduces one day's verdicts to a scalar in [-1, 1]; an empty day is 0.0.
DailySentiment aggregate_day(Date date, std::span<const HeadlineSentiment> items,
                             Aggregation how = Aggregation::signed_mean);

/// Scores every trading day of `aligned` (empty days included).
std::vector<DailySentiment> score_days(const SentimentProvider& provider, const AlignedSeries& aligned,
                                       Aggregation how = Aggregation::signed_mean);

/// `date,value` CSV. Values outside [-1, 1] and duplicate dates are DataErrors.
std::vector<DailySentiment> parse_daily_sentiment(std::istream& in,
                                                  std::string_view source_name = "<stream>");
std::vector<DailySentiment> load_daily_sentiment(const std::filesystem::path& path);
void write_daily_sentiment(std::span<const DailySentiment> days, std::ostream& out);

}  // namespace sentcast
