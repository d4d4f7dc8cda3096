#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "sentcast/error.hpp"
#include "sentcast/eval.hpp"
#include "sentcast/format.hpp"
#include "sentcast/hash.hpp"
#include "synthetic.hpp"
#include "temp_dir.hpp"

namespace sentcast {
namespace {

using V = std::vector<double>;

TEST(Metrics, Examples) {
  EXPECT_EQ(mae(V{1, 2}, V{1, 2}), 0.0);
  EXPECT_DOUBLE_EQ(mae(V{2, 4}, V{1, 2}), 1.5);
  EXPECT_DOUBLE_EQ(mape(V{99}, V{100}), 0.01);
  EXPECT_EQ(mape(V{5, 6}, V{5, 6}), 0.0);
  EXPECT_EQ(accuracy(0.0), 1.0);
  EXPECT_THROW((void)mape(V{1, 2}, V{1, 0}), DataError);
  EXPECT_THROW((void)mae(V{}, V{}), DataError);
  EXPECT_THROW((void)mae(V{1}, V{1, 2}), DataError);
}

TEST(Metrics, PublishedAccuracies) {
  // The printed accuracies sit exactly one unit in the 11th decimal below
  // 1 - MAPE, so the 1e-11 bound holds with equality; the slack covers only
  // binary representation of the decimal inputs.
  const double slack = 1e-11 + 8 * std::numeric_limits<double>::epsilon();
  EXPECT_LE(std::abs(accuracy(0.01767204122) - 0.98232795877), slack);
  EXPECT_LE(std::abs(accuracy(0.01409574846) - 0.98590425153), slack);
}

TEST(Metrics, PublishedImprovements) {
  const double mlp = 0.01767204122;
  const double lstm = 0.01456811176;
  const double fb = 0.01409574846;
  EXPECT_NEAR(relative_improvement(fb, mlp), 0.202370, 1e-5);
  EXPECT_NEAR(relative_improvement(fb, lstm), 0.032424, 1e-5);
  EXPECT_NEAR(relative_improvement(accuracy(fb), accuracy(mlp), MetricDirection::higher_is_better), 0.003640, 1e-5);
  EXPECT_NEAR(relative_improvement(accuracy(fb), accuracy(lstm), MetricDirection::higher_is_better), 0.000479, 1e-5);
  EXPECT_THROW((void)relative_improvement(1.0, 0.0), DataError);
}

TEST(Metrics, MatchIndependentFold) {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> d(100.0, 20000.0);
  V pred(100), actual(100);
  for (auto& p : pred) p = d(rng);
  for (auto& a : actual) a = d(rng);
  const double abs_sum = std::inner_product(pred.begin(), pred.end(), actual.begin(), 0.0, std::plus<>(),
                                            [](double p, double a) { return std::abs(p - a); });
  const double pct_sum = std::inner_product(pred.begin(), pred.end(), actual.begin(), 0.0, std::plus<>(),
                                            [](double p, double a) { return std::abs((p - a) / a); });
  EXPECT_NEAR(mae(pred, actual), abs_sum / 100.0, 1e-12 * abs_sum);
  EXPECT_NEAR(mape(pred, actual), pct_sum / 100.0, 1e-12);
}

TEST(Metrics, Properties) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(1.0, 1000.0);
  std::uniform_real_distribution<double> k(0.1, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    V pred(n), actual(n);
    for (auto& p : pred) p = d(rng);
    for (auto& a : actual) a = d(rng);
    const double m = mape(pred, actual);
    EXPECT_EQ(accuracy(m) + m, 1.0);
    EXPECT_EQ(evaluate(pred, actual).accuracy, accuracy(m));
    EXPECT_DOUBLE_EQ(mae(pred, actual), mae(actual, pred));

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    V pp(n), pa(n);
    for (std::size_t i = 0; i < n; ++i) {
      pp[i] = pred[idx[i]];
      pa[i] = actual[idx[i]];
    }
    EXPECT_NEAR(mae(pp, pa), mae(pred, actual), 1e-9);
    EXPECT_NEAR(mape(pp, pa), m, 1e-12);

    const double s = k(rng);
    V sp(n), sa(n);
    for (std::size_t i = 0; i < n; ++i) {
      sp[i] = pred[i] * s;
      sa[i] = actual[i] * s;
    }
    EXPECT_NEAR(mape(sp, sa), m, 1e-12);
    EXPECT_NEAR(mae(sp, sa), s * mae(pred, actual), 1e-9 * s * mae(pred, actual) + 1e-12);
  }
}

TrialData small_trial_data(std::size_t n = 160) {
  const auto planted = testing::planted_sentiment_series(n, 12);
  TrialData data;
  data.prices = prepare_split(planted.prices);
  data.with_sentiment = attach_sentiment(data.prices, planted.sentiment);
  return data;
}

std::vector<ModelSpec> small_specs() {
  std::vector<ModelSpec> specs;
  for (auto kind : {ModelKind::mlp, ModelKind::lstm, ModelKind::finbert_lstm}) {
    auto s = ModelSpec::reference(kind);
    s.layer_sizes = {6, 4, 3, 1};
    specs.push_back(s);
  }
  return specs;
}

TEST(RunTrials, SingleTrialMatchesDirectTraining) {
  const auto data = small_trial_data();
  auto spec = ModelSpec::reference(ModelKind::mlp);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 40;
  const auto result = run_trials(std::span(&spec, 1), data, cfg, 1, 1);
  const auto trained = train(build(spec, 40), data.prices, cfg);
  const auto preds = predict(trained, data.prices.test);
  V p, a;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    p.push_back(preds[i].price);
    a.push_back(data.prices.test.scaler.denormalize(data.prices.test.samples[i].target));
  }
  ASSERT_EQ(result.report.models.size(), 1U);
  EXPECT_EQ(result.report.models[0].mape_mean, mape(p, a));
  EXPECT_EQ(result.report.models[0].mae_mean, mae(p, a));
  EXPECT_EQ(result.report.seeds, (std::vector<std::uint64_t>{40}));
  ASSERT_EQ(result.traces[0].points.size(), preds.size());
  EXPECT_EQ(result.traces[0].points[3].predicted, preds[3].price);
}

TEST(RunTrials, AggregationIsConsistent) {
  const auto data = small_trial_data();
  const auto specs = small_specs();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 100;
  const auto result = run_trials(specs, data, cfg, 20, 0);
  ASSERT_EQ(result.report.models.size(), 3U);
  EXPECT_EQ(result.report.trial_count, 20U);
  for (const auto& m : result.report.models) {
    ASSERT_EQ(m.per_trial.size(), 20U);
    V mapes;
    for (const auto& t : m.per_trial) mapes.push_back(t.mape);
    EXPECT_GE(m.mape_mean, *std::min_element(mapes.begin(), mapes.end()));
    EXPECT_LE(m.mape_mean, *std::max_element(mapes.begin(), mapes.end()));
    const double mean = std::accumulate(mapes.begin(), mapes.end(), 0.0) / 20.0;
    double ss = 0.0;
    for (double x : mapes) ss += (x - mean) * (x - mean);
    EXPECT_NEAR(m.mape_mean, mean, 1e-15);
    EXPECT_NEAR(m.mape_std, std::sqrt(ss / 19.0), 1e-15);
    EXPECT_EQ(m.accuracy_mean, 1.0 - m.mape_mean);
  }
  // 3 models -> 6 ordered pairs, 3 metrics each.
  EXPECT_EQ(result.report.improvements.size(), 18U);
  for (const auto& imp : result.report.improvements) {
    if (imp.metric != "mape") continue;
    const auto find = [&](const std::string& name) {
      return std::find_if(result.report.models.begin(), result.report.models.end(),
                          [&](const auto& m) { return m.model == name; })->mape_mean;
    };
    EXPECT_DOUBLE_EQ(imp.fraction, relative_improvement(find(imp.candidate), find(imp.baseline)));
  }
}

TEST(RunTrials, ThreadCountDoesNotChangeResults) {
  const auto data = small_trial_data();
  const auto specs = small_specs();
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 9;
  const auto serial = run_trials(specs, data, cfg, 5, 1);
  const auto threaded = run_trials(specs, data, cfg, 5, 4);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_EQ(serial.report.models[m].mape_mean, threaded.report.models[m].mape_mean);
    EXPECT_EQ(serial.report.models[m].mae_std, threaded.report.models[m].mae_std);
    EXPECT_EQ(serial.checkpoints[m], threaded.checkpoints[m]);
  }
}

TEST(RunTrials, SentimentModelNeedsSentimentData) {
  auto data = small_trial_data();
  data.with_sentiment.reset();
  const auto specs = small_specs();
  EXPECT_THROW(run_trials(specs, data, TrainConfig{}, 1, 1), ConfigError);
  EXPECT_THROW(run_trials(specs, small_trial_data(), TrainConfig{}, 0, 1), ConfigError);
}

TEST(EmitReport, FilesAndDeterminism) {
  const auto data = small_trial_data();
  const auto specs = small_specs();
  TrainConfig cfg;
  cfg.epochs = 2;
  const auto result = run_trials(specs, data, cfg, 2, 1);
  testing::TempDir a, b;
  emit_report(result.report, result.traces, a.path());
  emit_report(result.report, result.traces, b.path());
  for (const std::string name : {"metrics.csv", "improvements.csv", "trace_mlp.csv", "trace_lstm.csv",
                                 "trace_finbert_lstm.csv"}) {
    ASSERT_TRUE(std::filesystem::exists(a.path() / name)) << name;
    EXPECT_EQ(sha256_file(a.path() / name), sha256_file(b.path() / name)) << name;
  }
  const auto metrics = read_file(a.path() / "metrics.csv");
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 4);
  EXPECT_EQ(metrics.substr(0, metrics.find('\n')), "model,trials,mae_mean,mae_std,mape_mean,mape_std,accuracy_mean");
  const auto trace = read_file(a.path() / "trace_lstm.csv");
  EXPECT_EQ(static_cast<std::size_t>(std::count(trace.begin(), trace.end(), '\n')), data.prices.test.size() + 1);
}

TEST(EmitReport, SingleModel) {
  const auto data = small_trial_data();
  auto spec = small_specs()[0];
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto result = run_trials(std::span(&spec, 1), data, cfg, 1, 1);
  testing::TempDir dir;
  emit_report(result.report, result.traces, dir.path());
  const auto metrics = read_file(dir.path() / "metrics.csv");
  EXPECT_EQ(std::count(metrics.begin(), metrics.end(), '\n'), 2);
  EXPECT_NE(format_table(result.report).find("mlp"), std::string::npos);
}

}  // namespace
}  // namespace sentcast
