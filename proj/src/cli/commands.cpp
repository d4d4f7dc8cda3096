#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sentcast/cli.hpp"
#include "sentcast/error.hpp"
#include "sentcast/eval.hpp"
#include "sentcast/format.hpp"
#include "sentcast/hash.hpp"
#include "sentcast/ingest.hpp"
#include "sentcast/models.hpp"
#include "sentcast/nn/kernels.hpp"
#include "sentcast/preprocess.hpp"
#include "sentcast/sentiment.hpp"

namespace sentcast::cli {

namespace {

using json = nlohmann::ordered_json;

struct GlobalOptions {
  std::uint64_t seed = 42;
  std::string out = "out";
};

struct IngestOptions {
  std::string prices;
  std::string symbol;
  std::string start;
  std::string end;
  std::string cache_dir;
  std::string news;
  std::string policy = "carry_forward";
  std::size_t headline_cap = kDefaultHeadlineCap;
};

struct SentimentOptions {
  std::string prices;
  std::string news;
  std::string policy = "carry_forward";
  std::size_t headline_cap = kDefaultHeadlineCap;
  std::string backend = "lexicon_stub";
  std::string sentiment_file;
  std::string headline_table;
  std::string url;
  std::size_t max_in_flight = 4;
  std::string aggregation = "signed_mean";
};

struct TrainEvalOptions {
  std::string prices;
  std::string sentiment;
  std::vector<std::string> models{"mlp", "lstm", "finbert_lstm"};
  std::size_t trials = 1;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t patience = 0;
  std::size_t window = kDefaultWindow;
  double train_fraction = kDefaultTrainFraction;
  std::string scaler_fit = "train";
  int sentiment_lag = 0;
  std::size_t parallelism = 0;
};

/// Which pipeline stage is running, for error messages.
struct Stage {
  std::string name = "setup";
};

json input_record(const std::string& path) {
  json j;
  j["path"] = path;
  j["sha256"] = sha256_file(path);
  return j;
}

void write_manifest(const std::filesystem::path& out_dir, std::string_view command, const CLI::App& app,
                    json inputs) {
  json m;
  m["toolkit"] = "sentcast";
  m["version"] = SENTCAST_VERSION;
  m["command"] = std::string(command);
  m["simd_backend"] = std::string(simd::to_string(simd::active_backend()));
  m["config"] = app.config_to_str(true, false);
  m["inputs"] = std::move(inputs);
  write_file_atomic(out_dir / fmt::format("manifest-{}.json", command), m.dump(2) + "\n");
}

std::string render(const auto& writer_fn) {
  std::ostringstream ss;
  writer_fn(ss);
  return ss.str();
}

int cmd_ingest(const GlobalOptions& g, const IngestOptions& o, const CLI::App& app, std::ostream& out, Stage& stage) {
  const std::filesystem::path out_dir = g.out;
  json inputs = json::object();

  stage.name = "load prices";
  PriceSeries prices;
  if (!o.prices.empty()) {
    if (!o.symbol.empty()) throw ConfigError("give either --prices or --symbol, not both");
    prices = load_prices(o.prices);
    inputs["prices"] = input_record(o.prices);
  } else if (!o.symbol.empty()) {
    if (o.start.empty() || o.end.empty()) throw ConfigError("--symbol needs --start and --end");
    stage.name = "fetch prices";
    FetchOptions fopts = FetchOptions::from_environment();
    if (!o.cache_dir.empty()) fopts.cache_dir = o.cache_dir;
    PriceFetcher fetcher(fopts);
    Date start;
    Date end;
    try {
      start = Date::parse(o.start);
      end = Date::parse(o.end);
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    prices = fetcher.fetch_prices(o.symbol, start, end);
    inputs["fetch"] = json{{"symbol", o.symbol},
                           {"start", o.start},
                           {"end", o.end},
                           {"cache_sha256", sha256_file(fetcher.cache_path(o.symbol, start, end))}};
  } else {
    throw ConfigError("ingest needs --prices <csv> or --symbol/--start/--end");
  }

  stage.name = "load news";
  Diagnostics diag;
  std::vector<NewsDay> news;
  if (!o.news.empty()) {
    news = load_news(o.news, o.headline_cap, &diag);
    inputs["news"] = input_record(o.news);
  }
  std::size_t raw_headlines = 0;
  for (const auto& d : news) raw_headlines += d.headlines.size();

  stage.name = "align";
  const AlignedSeries aligned = align(prices, news, parse_align_policy(o.policy), o.headline_cap, &diag);

  stage.name = "write outputs";
  write_file_atomic(out_dir / "prices.csv", render([&](std::ostream& s) { write_prices(aligned.prices, s); }));
  write_file_atomic(out_dir / "news.ndjson", render([&](std::ostream& s) { write_news(aligned.news, s); }));
  std::size_t days_with_news = 0;
  for (const auto& d : aligned.news) days_with_news += d.headlines.empty() ? 0 : 1;
  json summary;
  summary["trading_days"] = aligned.prices.size();
  summary["first_date"] = aligned.prices[0].date.iso();
  summary["last_date"] = aligned.prices[aligned.prices.size() - 1].date.iso();
  summary["policy"] = o.policy;
  summary["headlines_in"] = raw_headlines;
  summary["headlines_aligned"] = aligned.headline_count();
  summary["days_with_news"] = days_with_news;
  summary["warnings"] = diag.warnings;
  write_file_atomic(out_dir / "alignment.json", summary.dump(2) + "\n");
  write_manifest(out_dir, "ingest", app, std::move(inputs));

  out << fmt::format("trading days: {} ({} .. {})\n", aligned.prices.size(), summary["first_date"].get<std::string>(),
                     summary["last_date"].get<std::string>());
  out << fmt::format("headlines: {} read, {} aligned over {} day(s)\n", raw_headlines, aligned.headline_count(),
                     days_with_news);
  for (const auto& w : diag.warnings) out << "warning: " << w << '\n';
  return kOk;
}

std::string canonical_backend(const std::string& name) {
  if (name == "stub" || name == "lexicon_stub") return "lexicon_stub";
  if (name == "precomputed" || name == "precomputed_file") return "precomputed_file";
  if (name == "remote" || name == "remote_service") return "remote_service";
  throw ConfigError(fmt::format("unknown sentiment backend '{}'", name));
}

int cmd_sentiment(const GlobalOptions& g, const SentimentOptions& o, const CLI::App& app, std::ostream& out,
                  Stage& stage) {
  const std::filesystem::path out_dir = g.out;
  const std::string backend = canonical_backend(o.backend);
  const Aggregation how = parse_aggregation(o.aggregation);
  json inputs = json::object();

  stage.name = "load prices";
  if (o.prices.empty()) throw ConfigError("sentiment needs --prices to know the trading days");
  const PriceSeries prices = load_prices(o.prices);
  inputs["prices"] = input_record(o.prices);

  std::vector<DailySentiment> days;
  if (backend == "precomputed_file" && o.headline_table.empty()) {
    if (o.sentiment_file.empty()) {
      throw ConfigError("precomputed_file backend needs --sentiment-file or --headline-table");
    }
    stage.name = "load sentiment file";
    const auto file = load_daily_sentiment(o.sentiment_file);
    inputs["sentiment_file"] = input_record(o.sentiment_file);
    std::map<Date, double> by_date;
    for (const auto& d : file) by_date[d.date] = d.value;
    for (const auto& bar : prices.bars()) {
      const auto it = by_date.find(bar.date);
      days.push_back({bar.date, it == by_date.end() ? 0.0 : it->second});
    }
  } else {
    if (o.news.empty()) throw ConfigError(fmt::format("{} backend needs --news", backend));
    stage.name = "load news";
    Diagnostics diag;
    const auto news = load_news(o.news, o.headline_cap, &diag);
    inputs["news"] = input_record(o.news);
    const AlignedSeries aligned = align(prices, news, parse_align_policy(o.policy), o.headline_cap, &diag);

    std::unique_ptr<SentimentProvider> provider;
    if (backend == "lexicon_stub") {
      provider = std::make_unique<LexiconStubProvider>();
    } else if (backend == "precomputed_file") {
      provider = std::make_unique<PrecomputedHeadlineProvider>(PrecomputedHeadlineProvider::load(o.headline_table));
      inputs["headline_table"] = input_record(o.headline_table);
    } else {
      RemoteOptions ropts = RemoteOptions::from_environment();
      if (!o.url.empty()) ropts.url = o.url;
      ropts.max_in_flight = o.max_in_flight;
      provider = std::make_unique<RemoteSentimentProvider>(ropts);
    }
    stage.name = fmt::format("score headlines ({})", provider->backend());
    days = score_days(*provider, aligned, how);
  }

  stage.name = "write outputs";
  write_file_atomic(out_dir / "sentiment.csv", render([&](std::ostream& s) { write_daily_sentiment(days, s); }));
  write_manifest(out_dir, "sentiment", app, std::move(inputs));
  std::size_t nonzero = 0;
  for (const auto& d : days) nonzero += d.value != 0.0 ? 1 : 0;
  out << fmt::format("sentiment rows: {} ({} non-neutral), backend {}\n", days.size(), nonzero, backend);
  return kOk;
}

int cmd_train_eval(const GlobalOptions& g, const TrainEvalOptions& o, const CLI::App& app, std::ostream& out,
                   Stage& stage) {
  const std::filesystem::path out_dir = g.out;
  json inputs = json::object();

  stage.name = "configure";
  if (o.prices.empty()) throw ConfigError("train-eval needs --prices");
  if (o.trials < 1) throw ConfigError("--trials must be at least 1");
  if (o.epochs < 1) throw ConfigError("--epochs must be at least 1");
  if (o.batch_size < 1) throw ConfigError("--batch-size must be at least 1");
  if (o.window < 1) throw ConfigError("--window must be at least 1");
  if (o.sentiment_lag != 0 && o.sentiment_lag != 1) throw ConfigError("--sentiment-lag must be 0 or 1");
  std::vector<ModelSpec> specs;
  for (const auto& name : o.models) {
    specs.push_back(ModelSpec::reference(parse_model_kind(name), o.window));
    validate_reference(specs.back());
  }
  if (specs.empty()) throw ConfigError("--models is empty");
  const bool need_sentiment =
      std::any_of(specs.begin(), specs.end(), [](const ModelSpec& s) { return s.uses_sentiment(); });
  if (need_sentiment && o.sentiment.empty()) {
    throw ConfigError("finbert_lstm needs a daily sentiment file (--sentiment)");
  }
  TrainConfig cfg;
  cfg.epochs = o.epochs;
  cfg.batch_size = o.batch_size;
  cfg.seed = g.seed;
  if (o.patience > 0) cfg.early_stop_patience = o.patience;

  stage.name = "load data";
  const PriceSeries prices = load_prices(o.prices);
  inputs["prices"] = input_record(o.prices);
  std::vector<DailySentiment> daily;
  if (!o.sentiment.empty()) {
    daily = load_daily_sentiment(o.sentiment);
    inputs["sentiment"] = input_record(o.sentiment);
  }

  stage.name = "preprocess";
  TrialData data;
  data.prices = prepare_split(prices, o.window, o.train_fraction, parse_scaler_fit(o.scaler_fit));
  if (need_sentiment) {
    data.with_sentiment = attach_sentiment(data.prices, daily, static_cast<SentimentLag>(o.sentiment_lag));
  }

  stage.name = "train and evaluate";
  const TrialsResult result = run_trials(specs, data, cfg, o.trials, o.parallelism);

  stage.name = "write outputs";
  emit_report(result.report, result.traces, out_dir);
  for (std::size_t m = 0; m < specs.size(); ++m) {
    const auto name = std::string(to_string(specs[m].kind));
    if (!result.checkpoints[m].empty()) {
      write_file_atomic(out_dir / fmt::format("checkpoint_{}.json", name), result.checkpoints[m]);
    }
    std::string losses = "epoch,loss\n";
    for (std::size_t e = 0; e < result.loss_histories[m].size(); ++e) {
      losses += fmt::format("{},{}\n", e + 1, format_real(result.loss_histories[m][e]));
    }
    write_file_atomic(out_dir / fmt::format("loss_{}.csv", name), losses);

    const auto& ds = specs[m].uses_sentiment() ? *data.with_sentiment : data.prices;
    json sidecar;
    sidecar["model"] = name;
    sidecar["spec"] = json{{"kind", name},
                           {"layer_sizes", specs[m].layer_sizes},
                           {"dropout_rates", specs[m].dropout_rates},
                           {"learning_rate", specs[m].learning_rate},
                           {"input_features", specs[m].input_features}};
    sidecar["train"] = json{{"epochs", cfg.epochs},
                            {"batch_size", cfg.batch_size},
                            {"early_stop_patience", o.patience},
                            {"shuffle", cfg.shuffle}};
    sidecar["seed"] = cfg.seed;
    sidecar["scaler"] = json{{"min", ds.train.scaler.min_val}, {"max", ds.train.scaler.max_val}, {"fit", o.scaler_fit}};
    sidecar["data_fingerprint"] = sha256_hex(render([&](std::ostream& s) {
      write_dataset_csv(ds.train, s);
      write_dataset_csv(ds.test, s);
    }));
    sidecar["train_samples"] = ds.train.size();
    sidecar["test_samples"] = ds.test.size();
    sidecar["trial_aggregation"] = "mean and sample standard deviation over seeds";
    write_file_atomic(out_dir / fmt::format("model_{}.json", name), sidecar.dump(2) + "\n");
  }
  write_manifest(out_dir, "train-eval", app, std::move(inputs));

  out << format_table(result.report);
  for (const auto& imp : result.report.improvements) {
    if (imp.metric == "mae") continue;
    out << fmt::format("{} over {}: {} improvement {:.4f}%\n", imp.candidate, imp.baseline, imp.metric,
                       imp.fraction * 100.0);
  }
  return kOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sentcast: news-sentiment stock price forecasting"};
  app.name(args.empty() ? "sentcast" : args[0]);
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Base random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  IngestOptions io;
  auto* ingest = app.add_subcommand("ingest", "Validate and align prices and news");
  ingest->add_option("--prices", io.prices, "Price CSV (date,close)")->check(CLI::ExistingFile);
  ingest->add_option("--symbol", io.symbol, "Ticker to fetch, e.g. ^NDX");
  ingest->add_option("--start", io.start, "Fetch start date (YYYY-MM-DD, inclusive)");
  ingest->add_option("--end", io.end, "Fetch end date (YYYY-MM-DD, exclusive)");
  ingest->add_option("--cache-dir", io.cache_dir, "Fetch cache directory")->envname("SENTCAST_CACHE_DIR");
  ingest->add_option("--news", io.news, "News NDJSON")->check(CLI::ExistingFile);
  ingest->add_option("--policy", io.policy, "Non-trading-day news: carry_forward or drop")->capture_default_str();
  ingest->add_option("--headline-cap", io.headline_cap, "Headlines kept per day")->capture_default_str();

  SentimentOptions so;
  auto* sentiment = app.add_subcommand("sentiment", "Score daily news sentiment");
  sentiment->add_option("--prices", so.prices, "Price CSV giving the trading days")->check(CLI::ExistingFile);
  sentiment->add_option("--news", so.news, "News NDJSON")->check(CLI::ExistingFile);
  sentiment->add_option("--policy", so.policy, "Non-trading-day news: carry_forward or drop")->capture_default_str();
  sentiment->add_option("--headline-cap", so.headline_cap, "Headlines kept per day")->capture_default_str();
  sentiment->add_option("--backend", so.backend, "lexicon_stub, precomputed_file or remote_service")
      ->capture_default_str();
  sentiment->add_option("--sentiment-file", so.sentiment_file, "Daily date,value CSV (precomputed_file)")
      ->check(CLI::ExistingFile);
  sentiment->add_option("--headline-table", so.headline_table, "Per-headline NDJSON table (precomputed_file)")
      ->check(CLI::ExistingFile);
  sentiment->add_option("--url", so.url, "Scoring service root URL")->envname("SENTCAST_SENTIMENT_URL");
  sentiment->add_option("--max-in-flight", so.max_in_flight, "Concurrent requests to the service")
      ->capture_default_str();
  sentiment->add_option("--aggregation", so.aggregation, "signed_mean, max_magnitude or count_balance")
      ->capture_default_str();

  TrainEvalOptions to;
  auto* train_eval = app.add_subcommand("train-eval", "Train and compare models");
  train_eval->add_option("--prices", to.prices, "Price CSV (date,close)")->check(CLI::ExistingFile);
  train_eval->add_option("--sentiment", to.sentiment, "Daily sentiment CSV (date,value)")->check(CLI::ExistingFile);
  train_eval->add_option("--models", to.models, "Comma-separated model kinds")->delimiter(',')->capture_default_str();
  train_eval->add_option("--trials", to.trials, "Trials per model")->capture_default_str();
  train_eval->add_option("--epochs", to.epochs, "Training epochs")->capture_default_str();
  train_eval->add_option("--batch-size", to.batch_size, "Mini-batch size")->capture_default_str();
  train_eval->add_option("--patience", to.patience, "Early-stop patience in epochs (0 = off)")->capture_default_str();
  train_eval->add_option("--window", to.window, "Rolling window length")->capture_default_str();
  train_eval->add_option("--train-fraction", to.train_fraction, "Chronological train share")->capture_default_str();
  train_eval->add_option("--scaler-fit", to.scaler_fit, "Fit the scaler on 'train' or 'all'")->capture_default_str();
  train_eval->add_option("--sentiment-lag", to.sentiment_lag, "0: target-day sentiment, 1: last window day")
      ->capture_default_str();
  train_eval->add_option("--parallelism", to.parallelism, "Concurrent trials (0 = all cores)")->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsageError;
  }

  Stage stage;
  try {
    if (*ingest) return cmd_ingest(g, io, app, out, stage);
    if (*sentiment) return cmd_sentiment(g, so, app, out, stage);
    return cmd_train_eval(g, to, app, out, stage);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DivergenceError& e) {
    err << "training diverged [" << stage.name << "]: " << e.what() << '\n';
    return kDivergence;
  } catch (const TransportError& e) {
    err << "remote error [" << stage.name << "]: " << e.what() << '\n';
    if (stage.name.starts_with("score")) {
      err << "hint: retry once the service is reachable, or use --backend precomputed_file\n";
    }
    return kDataError;
  } catch (const std::exception& e) {
    err << "error [" << stage.name << "]: " << e.what() << '\n';
    return kDataError;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sentcast::cli
