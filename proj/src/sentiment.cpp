#include "sentcast/sentiment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sentcast/error.hpp"
#include "sentcast/format.hpp"

namespace sentcast {

std::string_view to_string(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::positive: return "positive";
    case SentimentLabel::negative: return "negative";
    case SentimentLabel::neutral: return "neutral";
  }
  return "neutral";
}

SentimentLabel parse_label(std::string_view text) {
  if (text == "positive") return SentimentLabel::positive;
  if (text == "negative") return SentimentLabel::negative;
  if (text == "neutral") return SentimentLabel::neutral;
  throw DataError(fmt::format("unknown sentiment label '{}'", text));
}

namespace {

constexpr std::array<std::string_view, 24> kPositiveWords = {
    "profit",  "profits", "record",   "acquisition", "acquires", "growth",
    "gain",    "gains",   "surge",    "surges",      "soar",     "soars",
    "rally",   "rallies", "beat",     "beats",       "upgrade",  "upgraded",
    "rise",    "rises",   "boost",    "strong",      "jump",     "jumps"};

constexpr std::array<std::string_view, 24> kNegativeWords = {
    "bankruptcy", "bankrupt", "layoffs",   "layoff",   "loss",      "losses",
    "decline",    "declines", "plunge",    "plunges",  "fall",      "falls",
    "downgrade",  "downgraded", "recession", "fraud",  "lawsuit",   "slump",
    "crash",      "weak",     "miss",      "misses",   "cuts",      "drop"};

bool contains(std::span<const std::string_view> words, std::string_view w) {
  return std::find(words.begin(), words.end(), w) != words.end();
}

void require_headline(std::string_view h) {
  if (trim(h).empty()) throw DataError("headline must be a non-empty string");
}

}  // namespace

LexiconStubProvider::LexiconStubProvider() = default;

HeadlineSentiment LexiconStubProvider::score_one(std::string_view headline) const {
  require_headline(headline);
  int pos = 0;
  int neg = 0;
  std::string word;
  const auto flush = [&] {
    if (word.empty()) return;
    if (contains(kPositiveWords, word)) ++pos;
    if (contains(kNegativeWords, word)) ++neg;
    word.clear();
  };
  for (char c : headline) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) != 0) {
      word.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();
    }
  }
  flush();
  if (pos + neg == 0) return {SentimentLabel::neutral, 1.0};
  if (pos == neg) return {SentimentLabel::neutral, 0.5};
  const double score = 0.5 + 0.5 * static_cast<double>(std::abs(pos - neg)) / static_cast<double>(pos + neg);
  return {pos > neg ? SentimentLabel::positive : SentimentLabel::negative, score};
}

std::vector<HeadlineSentiment> LexiconStubProvider::score_headlines(
    std::span<const std::string> headlines) const {
  std::vector<HeadlineSentiment> out;
  out.reserve(headlines.size());
  for (const auto& h : headlines) out.push_back(score_one(h));
  return out;
}

PrecomputedHeadlineProvider::PrecomputedHeadlineProvider(
    std::unordered_map<std::string, HeadlineSentiment> table)
    : table_(std::move(table)) {}

PrecomputedHeadlineProvider PrecomputedHeadlineProvider::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open headline table '{}'", path.string()));
  std::unordered_map<std::string, HeadlineSentiment> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      HeadlineSentiment hs{parse_label(rec.at("label").get<std::string>()), rec.at("score").get<double>()};
      if (!(hs.score >= 0.0 && hs.score <= 1.0)) throw DataError("score outside [0, 1]");
      table.insert_or_assign(rec.at("headline").get<std::string>(), hs);
    } catch (const std::exception& e) {
      throw DataError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return PrecomputedHeadlineProvider(std::move(table));
}

std::vector<HeadlineSentiment> PrecomputedHeadlineProvider::score_headlines(
    std::span<const std::string> headlines) const {
  std::vector<HeadlineSentiment> out;
  out.reserve(headlines.size());
  for (const auto& h : headlines) {
    require_headline(h);
    const auto it = table_.find(h);
    if (it == table_.end()) throw DataError(fmt::format("headline not found in table: '{}'", h));
    out.push_back(it->second);
  }
  return out;
}

double signed_score(const HeadlineSentiment& hs) {
  switch (hs.label) {
    case SentimentLabel::positive: return hs.score;
    case SentimentLabel::negative: return -hs.score;
    case SentimentLabel::neutral: return 0.0;
  }
  return 0.0;
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "signed_mean") return Aggregation::signed_mean;
  if (text == "max_magnitude") return Aggregation::max_magnitude;
  if (text == "count_balance") return Aggregation::count_balance;
  throw ConfigError(fmt::format("unknown aggregation '{}'", text));
}

DailySentiment aggregate_day(Date date, std::span<const HeadlineSentiment> items, Aggregation how) {
  if (items.empty()) return {date, 0.0};
  double value = 0.0;
  switch (how) {
    case Aggregation::signed_mean: {
      double sum = 0.0;
      for (const auto& hs : items) sum += signed_score(hs);
      value = sum / static_cast<double>(items.size());
      break;
    }
    case Aggregation::max_magnitude: {
      for (const auto& hs : items) {
        const double s = signed_score(hs);
        if (std::abs(s) > std::abs(value)) value = s;
      }
      break;
    }
    case Aggregation::count_balance: {
      long balance = 0;
      for (const auto& hs : items) {
        if (hs.label == SentimentLabel::positive) ++balance;
        if (hs.label == SentimentLabel::negative) --balance;
      }
      value = static_cast<double>(balance) / static_cast<double>(items.size());
      break;
    }
  }
  return {date, std::clamp(value, -1.0, 1.0)};
}

std::vector<DailySentiment> score_days(const SentimentProvider& provider, const AlignedSeries& aligned,
                                       Aggregation how) {
  std::vector<DailySentiment> out;
  out.reserve(aligned.news.size());
  for (const auto& day : aligned.news) {
    const auto verdicts = day.headlines.empty() ? std::vector<HeadlineSentiment>{}
                                                : provider.score_headlines(day.headlines);
    out.push_back(aggregate_day(day.date, verdicts, how));
  }
  return out;
}

std::vector<DailySentiment> parse_daily_sentiment(std::istream& in, std::string_view source_name) {
  std::vector<DailySentiment> out;
  std::set<Date> seen;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    const auto fields = split_csv_line(row);
    if (!saw_header) {
      if (fields.size() != 2 || fields[0] != "date" || fields[1] != "value") {
        throw DataError(fmt::format("{}:{}: expected header 'date,value'", source_name, line_no));
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != 2) throw DataError(fmt::format("{}:{}: expected 2 fields", source_name, line_no));
    DailySentiment ds;
    try {
      ds.date = Date::parse(fields[0]);
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", source_name, line_no, e.what()));
    }
    auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), ds.value);
    if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size() || !(ds.value >= -1.0 && ds.value <= 1.0)) {
      throw DataError(fmt::format("{}:{}: sentiment value '{}' not in [-1, 1]", source_name, line_no, fields[1]));
    }
    if (!seen.insert(ds.date).second) {
      throw DataError(fmt::format("{}:{}: duplicate date {}", source_name, line_no, ds.date.iso()));
    }
    out.push_back(ds);
  }
  if (!saw_header) throw DataError(fmt::format("{}: empty sentiment file", source_name));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
  return out;
}

std::vector<DailySentiment> load_daily_sentiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open sentiment file '{}'", path.string()));
  return parse_daily_sentiment(in, path.string());
}

void write_daily_sentiment(std::span<const DailySentiment> days, std::ostream& out) {
  out << "date,value\n";
  for (const auto& d : days) out << d.date.iso() << ',' << format_real(d.value) << '\n';
}

}  // namespace sentcast
