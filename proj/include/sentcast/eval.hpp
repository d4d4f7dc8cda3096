#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentcast/models.hpp"

namespace sentcast {

/// Mean absolute error in price units. Throws DataError on empty or
/// mismatched input.
double mae(std::span<const double> pred, std::span<const double> actual);
/// Mean absolute percentage error as a fraction. Throws DataError when any
/// actual value is zero.
double mape(std::span<const double> pred, std::span<const double> actual);
/// 1 - MAPE.
double accuracy(double mape_value);

enum class MetricDirection { lower_is_better, higher_is_better };

/// (baseline - candidate) / baseline for error metrics, (candidate - baseline)
/// / baseline for accuracy. Throws DataError on a zero baseline.
double relative_improvement(double candidate, double baseline,
                            MetricDirection direction = MetricDirection::lower_is_better);

struct MetricSet {
  double mae = 0.0;
  double mape = 0.0;
  double accuracy = 1.0;
};

MetricSet evaluate(std::span<const double> pred, std::span<const double> actual);

struct ModelSummary {
  std::string model;
  std::size_t trials = 0;  // successful trials
  std::size_t failed = 0;
  double mae_mean = 0.0, mae_std = 0.0;
  double mape_mean = 0.0, mape_std = 0.0;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  std::vector<MetricSet> per_trial;
  std::vector<std::string> failures;
};

struct Improvement {
  std::string candidate;
  std::string baseline;
  std::string metric;  // mae, mape or accuracy
  double fraction = 0.0;
};

struct ComparisonReport {
  std::vector<ModelSummary> models;
  std::vector<Improvement> improvements;  // every ordered pair of models, on trial means
  std::size_t trial_count = 0;
  std::vector<std::uint64_t> seeds;
};

struct TracePoint {
  Date date;
  double actual = 0.0;
  double predicted = 0.0;
};

struct ModelTrace {
  std::string model;
  std::vector<TracePoint> points;
};

/// Datasets for one comparison. Sentiment-using specs read `with_sentiment`;
/// both must share target dates so every model is scored on the same days.
struct TrialData {
  SplitDataset prices;
  std::optional<SplitDataset> with_sentiment;
};

struct TrialsResult {
  ComparisonReport report;
  std::vector<ModelTrace> traces;        // first successful trial of each model
  std::vector<std::string> checkpoints;  // serialized network of that trial
  std::vector<std::vector<double>> loss_histories;
};

/// Trains every spec `n_trials` times with seeds cfg.seed + 0 .. n_trials - 1
/// and scores each run on the test partition in price units. Trials run on up
/// to `parallelism` threads (0 = hardware concurrency); results do not depend
/// on the thread count. Diverged trials are counted and excluded.
TrialsResult run_trials(std::span<const ModelSpec> specs, const TrialData& data, const TrainConfig& cfg,
                        std::size_t n_trials, std::size_t parallelism = 0);

/// Writes metrics.csv, improvements.csv and trace_<model>.csv into `out_dir`.
void emit_report(const ComparisonReport& report, std::span<const ModelTrace> traces,
                 const std::filesystem::path& out_dir);

/// Human-readable table of per-model means.
std::string format_table(const ComparisonReport& report);

}  // namespace sentcast
