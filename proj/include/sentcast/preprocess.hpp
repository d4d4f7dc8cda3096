#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "sentcast/date.hpp"
#include "sentcast/ingest.hpp"
#include "sentcast/sentiment.hpp"

namespace sentcast {

inline constexpr std::size_t kDefaultWindow = 10;
inline constexpr double kDefaultTrainFraction = 0.85;

/// Min-max scaler: x -> (x - min) / (max - min).
struct Scaler {
  double min_val = 0.0;
  double max_val = 1.0;

  [[nodiscard]] double normalize(double x) const { return (x - min_val) / (max_val - min_val); }
  [[nodiscard]] double denormalize(double xn) const { return xn * (max_val - min_val) + min_val; }

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

/// Throws DataError when fewer than two distinct values are given.
Scaler fit_scaler(std::span<const double> values);
double normalize(const Scaler& s, double x);
double denormalize(const Scaler& s, double xn);

struct Sample {
  std::vector<double> features;  // normalized closes, oldest first (+ sentiment)
  double target = 0.0;           // normalized next-day close
  Date target_date;
  Date last_input_date;          // date of the newest close in the window

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct WindowedDataset {
  std::vector<Sample> samples;
  Scaler scaler;
  std::size_t window = kDefaultWindow;
  std::size_t feature_count = kDefaultWindow;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] bool empty() const { return samples.empty(); }
};

struct SplitDataset {
  WindowedDataset train;
  WindowedDataset test;
};

/// Which day's sentiment feeds a sample.
enum class SentimentLag {
  target_day = 0,  // sentiment published on the predicted day
  last_input = 1,  // sentiment of the newest day inside the window
};

enum class ScalerFit { train, all };

ScalerFit parse_scaler_fit(std::string_view text);

/// Rolling windows over `series`: sample k reads closes k..k+window-1 and
/// predicts close k+window. The scaler is fit over the whole series.
WindowedDataset make_windows(const PriceSeries& series, std::size_t window = kDefaultWindow);
/// Same, normalizing with a caller-supplied scaler.
WindowedDataset make_windows(const PriceSeries& series, std::size_t window, const Scaler& scaler);

/// Appends each sample's daily sentiment as one extra feature; dates missing
/// from `daily` get 0.0.
WindowedDataset attach_sentiment(const WindowedDataset& ds, std::span<const DailySentiment> daily,
                                 SentimentLag lag = SentimentLag::target_day);

/// Chronological split at floor(train_fraction * size). Throws DataError when
/// either side would be empty.
SplitDataset split(const WindowedDataset& ds, double train_fraction = kDefaultTrainFraction);

/// Index of the first test sample for a dataset of `sample_count` samples.
std::size_t split_index(std::size_t sample_count, double train_fraction);

/// Windows, scales and splits a price series in one go. With ScalerFit::train
/// the scaler sees only the closes that feed train samples (inputs and
/// targets), so nothing from the test period leaks into normalization.
SplitDataset prepare_split(const PriceSeries& series, std::size_t window = kDefaultWindow,
                           double train_fraction = kDefaultTrainFraction,
                           ScalerFit fit = ScalerFit::train);

SplitDataset attach_sentiment(const SplitDataset& ds, std::span<const DailySentiment> daily,
                              SentimentLag lag = SentimentLag::target_day);

/// One row per sample: f0..fN, target, target_date.
void write_dataset_csv(const WindowedDataset& ds, std::ostream& out);

}  // namespace sentcast
