#include "sentcast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "sentcast/error.hpp"
#include "sentcast/format.hpp"

namespace sentcast {

Scaler fit_scaler(std::span<const double> values) {
  if (values.empty()) throw DataError("cannot fit a scaler to no values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!(*hi > *lo)) throw DataError(fmt::format("degenerate range: every value equals {}", *lo));
  return Scaler{*lo, *hi};
}

double normalize(const Scaler& s, double x) { return s.normalize(x); }
double denormalize(const Scaler& s, double xn) { return s.denormalize(xn); }

ScalerFit parse_scaler_fit(std::string_view text) {
  if (text == "train") return ScalerFit::train;
  if (text == "all") return ScalerFit::all;
  throw ConfigError(fmt::format("unknown scaler fit mode '{}'", text));
}

WindowedDataset make_windows(const PriceSeries& series, std::size_t window) {
  if (window == 0) throw ConfigError("window must be at least 1");
  if (series.size() <= window) {
    throw DataError(fmt::format("series too short: {} closes for window {}", series.size(), window));
  }
  const auto closes = series.closes();
  return make_windows(series, window, fit_scaler(closes));
}

WindowedDataset make_windows(const PriceSeries& series, std::size_t window, const Scaler& scaler) {
  if (window == 0) throw ConfigError("window must be at least 1");
  if (series.size() <= window) {
    throw DataError(fmt::format("series too short: {} closes for window {}", series.size(), window));
  }
  WindowedDataset ds;
  ds.scaler = scaler;
  ds.window = window;
  ds.feature_count = window;
  const std::size_t n = series.size();
  ds.samples.reserve(n - window);
  for (std::size_t k = 0; k + window < n; ++k) {
    Sample s;
    s.features.reserve(window + 1);
    for (std::size_t j = k; j < k + window; ++j) s.features.push_back(scaler.normalize(series[j].close));
    s.target = scaler.normalize(series[k + window].close);
    s.target_date = series[k + window].date;
    s.last_input_date = series[k + window - 1].date;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

WindowedDataset attach_sentiment(const WindowedDataset& ds, std::span<const DailySentiment> daily,
                                 SentimentLag lag) {
  if (ds.feature_count != ds.window) {
    throw DataError("dataset already carries a sentiment feature");
  }
  std::map<Date, double> by_date;
  for (const auto& d : daily) by_date.insert_or_assign(d.date, d.value);
  WindowedDataset out = ds;
  out.feature_count = ds.window + 1;
  for (auto& s : out.samples) {
    const Date key = lag == SentimentLag::target_day ? s.target_date : s.last_input_date;
    const auto it = by_date.find(key);
    s.features.push_back(it == by_date.end() ? 0.0 : it->second);
  }
  return out;
}

std::size_t split_index(std::size_t sample_count, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError(fmt::format("train fraction {} must lie in (0, 1)", train_fraction));
  }
  return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(sample_count)));
}

SplitDataset split(const WindowedDataset& ds, double train_fraction) {
  if (ds.empty()) throw DataError("cannot split an empty dataset");
  const std::size_t cut = split_index(ds.size(), train_fraction);
  if (cut == 0 || cut >= ds.size()) {
    throw DataError(fmt::format("split of {} samples at fraction {} leaves an empty partition", ds.size(),
                                train_fraction));
  }
  SplitDataset out;
  out.train = ds;
  out.test = ds;
  out.train.samples.assign(ds.samples.begin(), ds.samples.begin() + static_cast<std::ptrdiff_t>(cut));
  out.test.samples.assign(ds.samples.begin() + static_cast<std::ptrdiff_t>(cut), ds.samples.end());
  return out;
}

SplitDataset prepare_split(const PriceSeries& series, std::size_t window, double train_fraction,
                           ScalerFit fit) {
  if (series.size() <= window) {
    throw DataError(fmt::format("series too short: {} closes for window {}", series.size(), window));
  }
  const auto closes = series.closes();
  Scaler scaler;
  if (fit == ScalerFit::all) {
    scaler = fit_scaler(closes);
  } else {
    const std::size_t samples = series.size() - window;
    const std::size_t train = split_index(samples, train_fraction);
    if (train == 0) throw DataError("training partition would be empty");
    // Train sample train-1 reads closes up to index train-1+window (its target).
    scaler = fit_scaler(std::span<const double>(closes).first(train + window));
  }
  return split(make_windows(series, window, scaler), train_fraction);
}

SplitDataset attach_sentiment(const SplitDataset& ds, std::span<const DailySentiment> daily, SentimentLag lag) {
  return SplitDataset{attach_sentiment(ds.train, daily, lag), attach_sentiment(ds.test, daily, lag)};
}

void write_dataset_csv(const WindowedDataset& ds, std::ostream& out) {
  for (std::size_t j = 0; j < ds.feature_count; ++j) out << 'f' << j << ',';
  out << "target,target_date\n";
  for (const auto& s : ds.samples) {
    for (double f : s.features) out << format_real(f) << ',';
    out << format_real(s.target) << ',' << s.target_date.iso() << '\n';
  }
}

}  // namespace sentcast
