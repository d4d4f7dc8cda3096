#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sentcast/error.hpp"
#include "sentcast/preprocess.hpp"
#include "synthetic.hpp"

namespace sentcast {
namespace {

const std::filesystem::path kFixtures = SENTCAST_FIXTURE_DIR;

PriceSeries from_closes(const std::vector<double>& closes) {
  const auto dates = testing::business_days(Date::from_ymd(2021, 1, 4), closes.size());
  std::vector<PriceBar> bars;
  for (std::size_t i = 0; i < closes.size(); ++i) bars.push_back({dates[i], closes[i]});
  return PriceSeries(bars);
}

TEST(Scaler, DenormalizeExample) {
  const Scaler s{11000.0, 16000.0};
  EXPECT_DOUBLE_EQ(denormalize(s, 0.25), 12250.0);
  EXPECT_DOUBLE_EQ(normalize(s, 12250.0), 0.25);
}

TEST(Scaler, FitErrors) {
  EXPECT_THROW(fit_scaler(std::vector<double>{}), DataError);
  EXPECT_THROW(fit_scaler(std::vector<double>{3.0, 3.0, 3.0}), DataError);
  const auto s = fit_scaler(std::vector<double>{5.0, 2.0, 9.0});
  EXPECT_EQ(s, (Scaler{2.0, 9.0}));
}

TEST(Scaler, RoundTripProperty) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lo(1.0, 20000.0);
  std::uniform_real_distribution<double> width(1.0, 10000.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const double a = lo(rng);
    const Scaler s{a, a + width(rng)};
    const double range = s.max_val - s.min_val;
    const double x = s.min_val + unit(rng) * range;
    const double xn = normalize(s, x);
    EXPECT_GE(xn, 0.0);
    EXPECT_LE(xn, 1.0);
    EXPECT_NEAR(denormalize(s, xn), x, 1e-12 * std::abs(x));
    // Values outside the fit range, up to ten ranges away, also survive.
    const double far = s.min_val + (20.0 * unit(rng) - 10.0) * range;
    if (std::abs(far) >= 1.0) EXPECT_NEAR(denormalize(s, normalize(s, far)), far, 1e-12 * std::abs(far));
  }
}

TEST(Windows, OneToFifteen) {
  std::vector<double> closes;
  for (int i = 1; i <= 15; ++i) closes.push_back(i);
  const auto ds = make_windows(from_closes(closes), 10);
  ASSERT_EQ(ds.size(), 5U);
  EXPECT_EQ(ds.scaler, (Scaler{1.0, 15.0}));
  for (std::size_t k = 0; k < 5; ++k) {
    ASSERT_EQ(ds.samples[k].features.size(), 10U);
    for (std::size_t j = 0; j < 10; ++j) {
      EXPECT_DOUBLE_EQ(ds.samples[k].features[j], (static_cast<double>(k + j + 1) - 1.0) / 14.0);
    }
    EXPECT_DOUBLE_EQ(ds.samples[k].target, (static_cast<double>(k + 11) - 1.0) / 14.0);
  }
  EXPECT_DOUBLE_EQ(ds.scaler.denormalize(ds.samples[4].target), 15.0);
}

TEST(Windows, TooShort) {
  EXPECT_THROW(make_windows(from_closes({1, 2, 3}), 3), DataError);
  EXPECT_NO_THROW(make_windows(from_closes({1, 2, 3, 4}), 3));
}

TEST(Split, FixtureCounts) {
  const auto prices = load_prices(kFixtures / "prices_504.csv");
  const auto ds = make_windows(prices);
  EXPECT_EQ(ds.size(), 494U);
  const auto sp = split(ds);
  EXPECT_EQ(sp.train.size(), 419U);  // floor(0.85 * 494)
  EXPECT_EQ(sp.test.size(), 75U);
  EXPECT_LT(sp.train.samples.back().target_date, sp.test.samples.front().target_date);
}

TEST(Split, FractionBounds) {
  EXPECT_EQ(split_index(494, 0.85), 419U);
  EXPECT_EQ(split_index(10, 0.5), 5U);
  EXPECT_THROW(split_index(10, 0.0), ConfigError);
  EXPECT_THROW(split_index(10, 1.0), ConfigError);
  const auto ds = make_windows(from_closes({1, 2, 3, 4, 5}), 3);  // 2 samples
  EXPECT_THROW(split(ds, 0.4), DataError);
}

TEST(Split, PropertiesOnRandomSeries) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> price(10.0, 500.0);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t window = 1 + rng() % 12;
    const std::size_t n = window + 2 + rng() % 120;
    std::vector<double> closes(n);
    for (auto& c : closes) c = price(rng);
    const auto series = from_closes(closes);
    const auto ds = make_windows(series, window);
    ASSERT_EQ(ds.size(), n - window);
    for (std::size_t k = 0; k < ds.size(); ++k) {
      EXPECT_EQ(ds.samples[k].target_date, series[k + window].date);
      EXPECT_EQ(ds.samples[k].last_input_date, series[k + window - 1].date);
      EXPECT_LT(ds.samples[k].last_input_date, ds.samples[k].target_date);
      for (double f : ds.samples[k].features) {
        EXPECT_GE(f, 0.0);
        EXPECT_LE(f, 1.0);
      }
    }
    const double f = frac(rng);
    const std::size_t cut = split_index(ds.size(), f);
    if (cut == 0 || cut == ds.size()) continue;
    const auto sp = split(ds, f);
    EXPECT_EQ(sp.train.size() + sp.test.size(), ds.size());
    EXPECT_EQ(sp.train.size(), static_cast<std::size_t>(std::floor(f * static_cast<double>(ds.size()))));
    EXPECT_LT(sp.train.samples.back().target_date, sp.test.samples.front().target_date);
    ++checked;
  }
  EXPECT_GT(checked, 200);
}

TEST(PrepareSplit, TrainFitSeesOnlyTrainCloses) {
  std::vector<double> closes;
  for (int i = 0; i < 40; ++i) closes.push_back(100.0 + i);
  closes.push_back(1000.0);  // a spike in the test period
  const auto series = from_closes(closes);
  const auto sp = prepare_split(series, 5, 0.5, ScalerFit::train);
  // 36 samples, 18 train: train inputs and targets cover closes 0..22.
  EXPECT_EQ(sp.train.size(), 18U);
  EXPECT_EQ(sp.train.scaler, (Scaler{100.0, 122.0}));
  EXPECT_EQ(sp.test.scaler, sp.train.scaler);
  const auto all = prepare_split(series, 5, 0.5, ScalerFit::all);
  EXPECT_EQ(all.train.scaler, (Scaler{100.0, 1000.0}));
  EXPECT_EQ(all.test.samples, split(make_windows(series, 5), 0.5).test.samples);
}

TEST(Sentiment, AttachWithLag) {
  const auto series = from_closes({1, 2, 3, 4, 5, 6});
  const auto ds = make_windows(series, 3);
  std::vector<DailySentiment> daily;
  for (std::size_t i = 0; i < series.size(); ++i) daily.push_back({series[i].date, 0.1 * static_cast<double>(i)});
  daily.erase(daily.begin() + 4);  // day 4 has no sentiment

  const auto target = attach_sentiment(ds, daily, SentimentLag::target_day);
  ASSERT_EQ(target.feature_count, 4U);
  EXPECT_DOUBLE_EQ(target.samples[0].features.back(), 0.3);
  EXPECT_EQ(target.samples[1].features.back(), 0.0);
  EXPECT_DOUBLE_EQ(target.samples[2].features.back(), 0.5);
  const auto last = attach_sentiment(ds, daily, SentimentLag::last_input);
  EXPECT_DOUBLE_EQ(last.samples[0].features.back(), 0.2);
  EXPECT_DOUBLE_EQ(last.samples[1].features.back(), 0.3);
  EXPECT_EQ(last.samples[2].features.back(), 0.0);
  EXPECT_THROW(attach_sentiment(target, daily), DataError);
}

}  // namespace
}  // namespace sentcast
