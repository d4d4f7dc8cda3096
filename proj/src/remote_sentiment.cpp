#include <algorithm>
#include <cstdlib>
#include <future>

#include <fmt/format.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sentcast/error.hpp"
#include "sentcast/format.hpp"
#include "sentcast/sentiment.hpp"

namespace sentcast {

RemoteOptions RemoteOptions::from_environment() {
  RemoteOptions opts;
  if (const char* v = std::getenv("SENTCAST_SENTIMENT_URL"); v != nullptr) opts.url = v;
  return opts;
}

RemoteSentimentProvider::RemoteSentimentProvider(RemoteOptions options) : options_(std::move(options)) {
  if (options_.url.empty()) throw ConfigError("remote sentiment backend needs a service URL");
  options_.max_in_flight = std::max<std::size_t>(options_.max_in_flight, 1);
  options_.max_batch = std::clamp<std::size_t>(options_.max_batch, 1, 64);
}

std::string encode_score_request(std::span<const std::string> headlines) {
  nlohmann::json body;
  body["headlines"] = std::vector<std::string>(headlines.begin(), headlines.end());
  return body.dump();
}

std::vector<HeadlineSentiment> decode_score_response(std::string_view body, std::size_t expected) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(fmt::format("malformed score response: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("results") || !doc["results"].is_array()) {
    throw TransportError("malformed score response: missing 'results' array");
  }
  const auto& results = doc["results"];
  if (results.size() != expected) {
    throw TransportError(fmt::format("score response has {} results for {} headlines", results.size(), expected));
  }
  std::vector<HeadlineSentiment> out;
  out.reserve(expected);
  for (const auto& r : results) {
    if (!r.is_object() || !r.contains("label") || !r["label"].is_string() || !r.contains("score") ||
        !r["score"].is_number()) {
      throw TransportError("malformed score response: result needs 'label' and 'score'");
    }
    HeadlineSentiment hs;
    try {
      hs.label = parse_label(r["label"].get<std::string>());
    } catch (const DataError& e) {
      throw TransportError(fmt::format("malformed score response: {}", e.what()));
    }
    hs.score = r["score"].get<double>();
    if (!(hs.score >= 0.0 && hs.score <= 1.0)) {
      throw TransportError(fmt::format("malformed score response: score {} outside [0, 1]", hs.score));
    }
    out.push_back(hs);
  }
  return out;
}

std::vector<HeadlineSentiment> RemoteSentimentProvider::post_batch(std::span<const std::string> batch) const {
  httplib::Client client(options_.url);
  client.set_connection_timeout(options_.timeout_seconds);
  client.set_read_timeout(options_.timeout_seconds);
  auto res = client.Post("/v1/score", encode_score_request(batch), "application/json");
  if (!res) {
    throw TransportError(fmt::format("sentiment service at {} unreachable: {}", options_.url,
                                     httplib::to_string(res.error())));
  }
  if (res->status == 503) throw TransportError("sentiment service is still loading its model (HTTP 503)");
  if (res->status != 200) {
    throw TransportError(fmt::format("sentiment service returned HTTP {}: {}", res->status, res->body));
  }
  return decode_score_response(res->body, batch.size());
}

std::vector<HeadlineSentiment> RemoteSentimentProvider::score_headlines(
    std::span<const std::string> headlines) const {
  for (const auto& h : headlines) {
    if (trim(h).empty()) throw DataError("headline must be a non-empty string");
  }
  std::vector<std::span<const std::string>> batches;
  for (std::size_t i = 0; i < headlines.size(); i += options_.max_batch) {
    batches.push_back(headlines.subspan(i, std::min(options_.max_batch, headlines.size() - i)));
  }
  std::vector<HeadlineSentiment> out;
  out.reserve(headlines.size());
  for (std::size_t first = 0; first < batches.size(); first += options_.max_in_flight) {
    const std::size_t last = std::min(batches.size(), first + options_.max_in_flight);
    std::vector<std::future<std::vector<HeadlineSentiment>>> pending;
    for (std::size_t b = first; b < last; ++b) {
      pending.push_back(std::async(std::launch::async, [this, batch = batches[b]] { return post_batch(batch); }));
    }
    for (auto& f : pending) {
      auto part = f.get();
      out.insert(out.end(), part.begin(), part.end());
    }
  }
  return out;
}

}  // namespace sentcast
