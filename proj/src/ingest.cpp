#include "sentcast/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sentcast/error.hpp"
#include "sentcast/format.hpp"

namespace sentcast {

PriceSeries::PriceSeries(std::vector<PriceBar> bars) : bars_(std::move(bars)) {
  for (std::size_t i = 0; i < bars_.size(); ++i) {
    const auto& bar = bars_[i];
    if (!(bar.close > 0.0) || !std::isfinite(bar.close)) {
      throw DataError(fmt::format("non-positive close {} on {}", bar.close, bar.date.iso()));
    }
    if (i > 0 && !(bars_[i - 1].date < bar.date)) {
      if (bars_[i - 1].date == bar.date) {
        throw DataError(fmt::format("duplicate date {}", bar.date.iso()));
      }
      throw DataError(fmt::format("dates not increasing at {}", bar.date.iso()));
    }
  }
}

std::vector<double> PriceSeries::closes() const {
  std::vector<double> out;
  out.reserve(bars_.size());
  for (const auto& b : bars_) out.push_back(b.close);
  return out;
}

std::size_t AlignedSeries::headline_count() const {
  std::size_t n = 0;
  for (const auto& day : news) n += day.headlines.size();
  return n;
}

AlignPolicy parse_align_policy(std::string_view text) {
  if (text == "carry_forward") return AlignPolicy::carry_forward;
  if (text == "drop") return AlignPolicy::drop;
  throw ConfigError(fmt::format("unknown alignment policy '{}'", text));
}

PriceSeries parse_prices(std::istream& in, std::string_view source_name) {
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  std::vector<PriceBar> bars;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_csv_line(row);
    if (!saw_header) {
      if (fields.size() != 2 || fields[0] != "date" || fields[1] != "close") {
        throw DataError(fmt::format("{}:{}: expected header 'date,close'", source_name, line_no));
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != 2) {
      throw DataError(fmt::format("{}:{}: expected 2 fields, got {}", source_name, line_no, fields.size()));
    }
    PriceBar bar;
    try {
      bar.date = Date::parse(fields[0]);
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}:{}: {}", source_name, line_no, e.what()));
    }
    const auto& text = fields[1];
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), bar.close);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(bar.close)) {
      throw DataError(fmt::format("{}:{}: invalid close '{}'", source_name, line_no, text));
    }
    if (bar.close <= 0.0) {
      throw DataError(fmt::format("{}:{}: non-positive close {}", source_name, line_no, text));
    }
    bars.push_back(bar);
  }
  if (!saw_header) throw DataError(fmt::format("{}: empty price file", source_name));
  if (bars.empty()) throw DataError(fmt::format("{}: price file has no rows", source_name));
  std::stable_sort(bars.begin(), bars.end(),
                   [](const PriceBar& a, const PriceBar& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < bars.size(); ++i) {
    if (bars[i].date == bars[i - 1].date) {
      throw DataError(fmt::format("{}: duplicate date {}", source_name, bars[i].date.iso()));
    }
  }
  return PriceSeries(std::move(bars));
}

PriceSeries load_prices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open price file '{}'", path.string()));
  return parse_prices(in, path.string());
}

void write_prices(const PriceSeries& series, std::ostream& out) {
  out << "date,close\n";
  for (const auto& bar : series.bars()) out << bar.date.iso() << ',' << format_real(bar.close) << '\n';
}

namespace {

void append_capped(NewsDay& day, std::vector<std::string>&& incoming, std::size_t cap,
                   Diagnostics* diag) {
  std::size_t dropped = 0;
  for (auto& h : incoming) {
    if (day.headlines.size() < cap) {
      day.headlines.push_back(std::move(h));
    } else {
      ++dropped;
    }
  }
  if (dropped > 0 && diag != nullptr) {
    diag->warnings.push_back(
        fmt::format("{}: {} headline(s) beyond cap {} dropped", day.date.iso(), dropped, cap));
  }
}

}  // namespace

std::vector<NewsDay> parse_news(std::istream& in, std::string_view source_name, std::size_t cap,
                                Diagnostics* diag) {
  std::map<Date, NewsDay> by_date;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = [&] { return fmt::format("{}:{}", source_name, line_no); };
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(fmt::format("{}: unparseable record: {}", where(), e.what()));
    }
    if (!record.is_object() || !record.contains("date") || !record["date"].is_string() ||
        !record.contains("headlines") || !record["headlines"].is_array()) {
      throw DataError(fmt::format("{}: record needs string 'date' and array 'headlines'", where()));
    }
    Date date;
    try {
      date = Date::parse(record["date"].get<std::string>());
    } catch (const DataError& e) {
      throw DataError(fmt::format("{}: {}", where(), e.what()));
    }
    std::vector<std::string> headlines;
    for (const auto& h : record["headlines"]) {
      if (!h.is_string() || trim(h.get_ref<const std::string&>()).empty()) {
        throw DataError(fmt::format("{}: headlines must be non-empty strings", where()));
      }
      headlines.push_back(h.get<std::string>());
    }
    auto [it, inserted] = by_date.try_emplace(date, NewsDay{date, {}});
    append_capped(it->second, std::move(headlines), cap, diag);
  }
  std::vector<NewsDay> out;
  out.reserve(by_date.size());
  for (auto& [_, day] : by_date) out.push_back(std::move(day));
  return out;
}

std::vector<NewsDay> load_news(const std::filesystem::path& path, std::size_t cap, Diagnostics* diag) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open news file '{}'", path.string()));
  return parse_news(in, path.string(), cap, diag);
}

void write_news(std::span<const NewsDay> news, std::ostream& out) {
  for (const auto& day : news) {
    nlohmann::ordered_json record;
    record["date"] = day.date.iso();
    record["headlines"] = day.headlines;
    out << record.dump() << '\n';
  }
}

AlignedSeries align(const PriceSeries& prices, std::span<const NewsDay> news, AlignPolicy policy,
                    std::size_t cap, Diagnostics* diag) {
  AlignedSeries out{prices, {}};
  out.news.reserve(prices.size());
  for (const auto& bar : prices.bars()) out.news.push_back(NewsDay{bar.date, {}});

  std::vector<NewsDay> sorted(news.begin(), news.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const NewsDay& a, const NewsDay& b) { return a.date < b.date; });

  const auto bars = prices.bars();
  for (auto& day : sorted) {
    const auto it = std::lower_bound(bars.begin(), bars.end(), day.date,
                                     [](const PriceBar& b, const Date& d) { return b.date < d; });
    if (it == bars.end()) continue;
    if (it->date != day.date && policy == AlignPolicy::drop) continue;
    auto& target = out.news[static_cast<std::size_t>(it - bars.begin())];
    append_capped(target, std::move(day.headlines), cap, diag);
  }
  return out;
}

}  // namespace sentcast
