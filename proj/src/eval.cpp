#include "sentcast/eval.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "sentcast/error.hpp"
#include "sentcast/format.hpp"

namespace sentcast {

namespace {

void check_lengths(std::span<const double> pred, std::span<const double> actual) {
  if (pred.size() != actual.size()) {
    throw DataError(fmt::format("length mismatch: {} predictions for {} actuals", pred.size(), actual.size()));
  }
  if (pred.empty()) throw DataError("metrics need at least one prediction");
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// Sample standard deviation (n - 1); zero for a single value.
MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double sq = 0.0;
    for (double x : v) sq += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(sq / static_cast<double>(v.size() - 1));
  }
  return out;
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> actual) {
  check_lengths(pred, actual);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - actual[i]);
  return sum / static_cast<double>(pred.size());
}

double mape(std::span<const double> pred, std::span<const double> actual) {
  check_lengths(pred, actual);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (actual[i] == 0.0) throw DataError(fmt::format("zero denominator: actual value {} is 0", i));
    sum += std::abs((pred[i] - actual[i]) / actual[i]);
  }
  return sum / static_cast<double>(pred.size());
}

double accuracy(double mape_value) { return 1.0 - mape_value; }

double relative_improvement(double candidate, double baseline, MetricDirection direction) {
  if (baseline == 0.0) throw DataError("relative improvement over a zero baseline");
  return direction == MetricDirection::lower_is_better ? (baseline - candidate) / baseline
                                                       : (candidate - baseline) / baseline;
}

MetricSet evaluate(std::span<const double> pred, std::span<const double> actual) {
  MetricSet m;
  m.mae = mae(pred, actual);
  m.mape = mape(pred, actual);
  m.accuracy = accuracy(m.mape);
  return m;
}

TrialsResult run_trials(std::span<const ModelSpec> specs, const TrialData& data, const TrainConfig& cfg,
                        std::size_t n_trials, std::size_t parallelism) {
  if (n_trials < 1) throw ConfigError("need at least one trial");
  if (specs.empty()) throw ConfigError("no models requested");

  const auto data_for = [&](const ModelSpec& spec) -> const SplitDataset& {
    if (spec.uses_sentiment()) {
      if (!data.with_sentiment) {
        throw ConfigError(fmt::format("{} needs a sentiment-augmented dataset", to_string(spec.kind)));
      }
      return *data.with_sentiment;
    }
    return data.prices;
  };
  for (const auto& spec : specs) {
    const auto& ds = data_for(spec);
    if (ds.test.size() != data.prices.test.size()) throw DataError("model test sets differ in size");
    for (std::size_t i = 0; i < ds.test.size(); ++i) {
      if (ds.test.samples[i].target_date != data.prices.test.samples[i].target_date) {
        throw DataError("model test sets cover different dates");
      }
    }
  }

  std::vector<double> actual;
  for (const auto& s : data.prices.test.samples) actual.push_back(data.prices.test.scaler.denormalize(s.target));

  struct Outcome {
    bool ok = false;
    MetricSet metrics;
    std::vector<Prediction> predictions;
    std::string checkpoint;
    std::vector<double> losses;
    std::string failure;
  };
  const std::size_t jobs = specs.size() * n_trials;
  std::vector<Outcome> outcomes(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;

  const auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const ModelSpec& spec = specs[job / n_trials];
      const std::size_t trial = job % n_trials;
      TrainConfig trial_cfg = cfg;
      trial_cfg.seed = cfg.seed + trial;
      try {
        const auto& ds = data_for(spec);
        TrainedModel model = train(build(spec, trial_cfg.seed), ds, trial_cfg);
        auto preds = predict(model, ds.test);
        std::vector<double> p;
        for (const auto& pr : preds) p.push_back(pr.price);
        Outcome& o = outcomes[job];
        o.metrics = evaluate(p, actual);
        o.predictions = std::move(preds);
        if (trial == 0) o.checkpoint = nn::serialize_checkpoint(model.network);
        o.losses = std::move(model.loss_history);
        o.ok = true;
      } catch (const DivergenceError& e) {
        outcomes[job].failure = e.what();
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next = jobs;
      }
    }
  };
  std::size_t threads = parallelism == 0 ? std::max(1U, std::thread::hardware_concurrency()) : parallelism;
  threads = std::min(threads, jobs);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (fatal) std::rethrow_exception(fatal);

  TrialsResult result;
  auto& report = result.report;
  report.trial_count = n_trials;
  for (std::size_t t = 0; t < n_trials; ++t) report.seeds.push_back(cfg.seed + t);

  for (std::size_t m = 0; m < specs.size(); ++m) {
    ModelSummary summary;
    summary.model = std::string(to_string(specs[m].kind));
    std::vector<double> maes, mapes;
    const Outcome* first_ok = nullptr;
    for (std::size_t t = 0; t < n_trials; ++t) {
      const Outcome& o = outcomes[m * n_trials + t];
      if (!o.ok) {
        ++summary.failed;
        summary.failures.push_back(o.failure);
        continue;
      }
      if (first_ok == nullptr) first_ok = &o;
      summary.per_trial.push_back(o.metrics);
      maes.push_back(o.metrics.mae);
      mapes.push_back(o.metrics.mape);
    }
    summary.trials = summary.per_trial.size();
    const auto mae_s = mean_std(maes);
    const auto mape_s = mean_std(mapes);
    summary.mae_mean = mae_s.mean;
    summary.mae_std = mae_s.std;
    summary.mape_mean = mape_s.mean;
    summary.mape_std = mape_s.std;
    // Accuracy is 1 - MAPE; deriving it from the mean keeps that identity exact.
    summary.accuracy_mean = summary.trials > 0 ? accuracy(mape_s.mean) : 0.0;
    summary.accuracy_std = mape_s.std;
    report.models.push_back(std::move(summary));

    ModelTrace trace{report.models.back().model, {}};
    std::string checkpoint;
    std::vector<double> losses;
    if (first_ok != nullptr) {
      for (std::size_t i = 0; i < actual.size(); ++i) {
        trace.points.push_back({first_ok->predictions[i].target_date, actual[i], first_ok->predictions[i].price});
      }
      checkpoint = first_ok->checkpoint;
      if (checkpoint.empty()) {
        // Only trial 0 keeps its network; rebuild the first successful one from its seed.
        const auto t = static_cast<std::size_t>(first_ok - &outcomes[m * n_trials]);
        TrainConfig again = cfg;
        again.seed = cfg.seed + t;
        checkpoint = nn::serialize_checkpoint(train(build(specs[m], again.seed), data_for(specs[m]), again).network);
      }
      losses = first_ok->losses;
    }
    result.traces.push_back(std::move(trace));
    result.checkpoints.push_back(std::move(checkpoint));
    result.loss_histories.push_back(std::move(losses));
  }

  for (const auto& cand : report.models) {
    for (const auto& base : report.models) {
      if (&cand == &base || cand.trials == 0 || base.trials == 0) continue;
      report.improvements.push_back({cand.model, base.model, "mae", relative_improvement(cand.mae_mean, base.mae_mean)});
      report.improvements.push_back(
          {cand.model, base.model, "mape", relative_improvement(cand.mape_mean, base.mape_mean)});
      report.improvements.push_back({cand.model, base.model, "accuracy",
                                     relative_improvement(cand.accuracy_mean, base.accuracy_mean,
                                                          MetricDirection::higher_is_better)});
    }
  }
  return result;
}

void emit_report(const ComparisonReport& report, std::span<const ModelTrace> traces,
                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ostringstream metrics;
  metrics << "model,trials,mae_mean,mae_std,mape_mean,mape_std,accuracy_mean\n";
  for (const auto& m : report.models) {
    metrics << m.model << ',' << m.trials << ',' << format_real(m.mae_mean) << ',' << format_real(m.mae_std) << ','
            << format_real(m.mape_mean) << ',' << format_real(m.mape_std) << ',' << format_real(m.accuracy_mean)
            << '\n';
  }
  write_file_atomic(out_dir / "metrics.csv", metrics.str());

  std::ostringstream improvements;
  improvements << "candidate,baseline,metric,improvement_fraction\n";
  for (const auto& imp : report.improvements) {
    improvements << imp.candidate << ',' << imp.baseline << ',' << imp.metric << ',' << format_real(imp.fraction)
                 << '\n';
  }
  write_file_atomic(out_dir / "improvements.csv", improvements.str());

  for (const auto& trace : traces) {
    std::ostringstream t;
    t << "date,actual,predicted\n";
    for (const auto& p : trace.points) {
      t << p.date.iso() << ',' << format_real(p.actual) << ',' << format_real(p.predicted) << '\n';
    }
    write_file_atomic(out_dir / fmt::format("trace_{}.csv", trace.model), t.str());
  }
}

std::string format_table(const ComparisonReport& report) {
  std::string out = fmt::format("{:<14} {:>7} {:>16} {:>16} {:>16}\n", "model", "trials", "MAE", "MAPE", "Accuracy");
  for (const auto& m : report.models) {
    out += fmt::format("{:<14} {:>7} {:>16.8f} {:>16.11f} {:>16.11f}\n", m.model, m.trials, m.mae_mean, m.mape_mean,
                       m.accuracy_mean);
    if (m.failed > 0) out += fmt::format("  ({} diverged trial(s) excluded)\n", m.failed);
  }
  out += fmt::format("values are means over {} trial(s)\n", report.trial_count);
  return out;
}

}  // namespace sentcast
