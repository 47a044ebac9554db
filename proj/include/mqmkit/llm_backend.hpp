// Copyright 2026 The mqmkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Completion backends behind one interface:
//
//   http_generic  POST {prompt, max_tokens, temperature, stop, model} and
//                 read {text} from the JSON response.
//   oracle        answers a prompt by rendering the gold annotations of the
//                 target segment; used for offline end-to-end checks.
//   replay        returns completions recorded in a replay log.
//
// `LlmClient` adds request validation, central rate limiting, retries and
// the replay log on top of any backend. Secrets are read from the
// environment variable named in the config and never written anywhere.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "mqmkit/error.hpp"
#include "mqmkit/hash.hpp"
#include "mqmkit/json_io.hpp"
#include "mqmkit/loaders.hpp"
#include "mqmkit/mqm.hpp"
#include "mqmkit/prompting.hpp"
#include "mqmkit/text.hpp"

namespace mqmkit {

inline constexpr int kAutoMqmMaxTokens = 256;
inline constexpr int kScoreMaxTokens = 16;

struct CompletionRequest {
  std::string prompt;
  int max_tokens = kAutoMqmMaxTokens;
  double temperature = 0.0;
  std::vector<std::string> stop;
  std::string model;

  void validate() const {
    if (prompt.empty()) throw ConfigError("completion request has an empty prompt");
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  }
};

struct Completion {
  std::string text;
  // Replay backends report the recorded timestamp so re-recorded logs are
  // byte-identical.
  std::optional<std::string> timestamp;
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual Completion complete(const CompletionRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Configuration.

enum class BackendKind { kHttpGeneric, kOracle, kReplay };

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

struct BackendConfig {
  BackendKind kind = BackendKind::kOracle;
  std::string model;
  // http_generic
  std::string endpoint;
  std::string api_key_env;  // name of the variable, never the key
  double timeout_seconds = 60.0;
  // oracle: gold assessments (MQM TSV, DA TSV or assessments JSONL)
  std::string gold_path;
  std::string gold_format = "jsonl";
  std::string gold_lp;
  // replay
  std::string replay_path;
  // 0 disables rate limiting.
  double rate_limit_rps = 0.0;
  RetryPolicy retry;

  void validate() const {
    switch (kind) {
      case BackendKind::kHttpGeneric:
        if (endpoint.empty()) throw ConfigError("http_generic backend requires an endpoint");
        break;
      case BackendKind::kOracle:
        if (gold_path.empty()) throw ConfigError("oracle backend requires a gold store");
        break;
      case BackendKind::kReplay:
        if (replay_path.empty()) throw ConfigError("replay backend requires a replay file");
        break;
    }
    if (rate_limit_rps < 0.0) throw ConfigError("rate limit must be >= 0");
    if (retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
    if (retry.initial_backoff.count() < 0 || retry.multiplier < 1.0) {
      throw ConfigError("retry backoff must be non-negative and non-shrinking");
    }
  }

  static std::string_view kind_name(BackendKind k) {
    switch (k) {
      case BackendKind::kHttpGeneric:
        return "http_generic";
      case BackendKind::kOracle:
        return "oracle";
      case BackendKind::kReplay:
        return "replay";
    }
    return "oracle";
  }

  Json to_json() const {
    Json j;
    j["kind"] = kind_name(kind);
    j["model"] = model;
    j["endpoint"] = endpoint;
    j["api_key_env"] = api_key_env;
    j["timeout_seconds"] = timeout_seconds;
    j["gold"] = gold_path;
    j["gold_format"] = gold_format;
    j["gold_lp"] = gold_lp;
    j["replay_path"] = replay_path;
    j["rate_limit_rps"] = rate_limit_rps;
    j["retry"] = {{"max_attempts", retry.max_attempts},
                  {"initial_backoff_ms", retry.initial_backoff.count()},
                  {"multiplier", retry.multiplier}};
    return j;
  }

  static BackendConfig from_json(const Json& j) {
    BackendConfig c;
    try {
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "http_generic") c.kind = BackendKind::kHttpGeneric;
      else if (kind == "oracle") c.kind = BackendKind::kOracle;
      else if (kind == "replay") c.kind = BackendKind::kReplay;
      else throw ConfigError("unknown backend kind '" + kind + "'");
      c.model = j.value("model", std::string());
      c.endpoint = j.value("endpoint", std::string());
      c.api_key_env = j.value("api_key_env", std::string());
      c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
      c.gold_path = j.value("gold", std::string());
      c.gold_format = j.value("gold_format", c.gold_format);
      c.gold_lp = j.value("gold_lp", std::string());
      c.replay_path = j.value("replay_path", std::string());
      c.rate_limit_rps = j.value("rate_limit_rps", 0.0);
      if (j.contains("retry")) {
        const auto& r = j.at("retry");
        c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
        c.retry.initial_backoff =
            std::chrono::milliseconds(r.value("initial_backoff_ms", c.retry.initial_backoff.count()));
        c.retry.multiplier = r.value("multiplier", c.retry.multiplier);
      }
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("invalid backend config: ") + e.what());
    }
    c.validate();
    return c;
  }

  static BackendConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open backend config " + path);
    try {
      return from_json(Json::parse(in));
    } catch (const Json::exception& e) {
      throw ConfigError("backend config " + path + ": " + e.what());
    }
  }
};

// ---------------------------------------------------------------------------
// Oracle.

// Gold answers keyed by candidate text; entries sharing a candidate are told
// apart by their source.
class OracleStore {
 public:
  struct Entry {
    Segment segment;
    std::vector<ErrorAnnotation> annotations;
    std::optional<double> raw_score;
    std::optional<double> derived_score;
  };

  // Uses the first rater (by rater id) of each segment that has gold.
  static OracleStore build(std::span<const Segment> segments,
                           std::span<const SegmentAssessment> gold) {
    std::map<SegmentKey, const SegmentAssessment*> first;
    for (const auto& a : gold) {
      auto [it, inserted] = first.try_emplace(a.key, &a);
      if (!inserted && a.rater_id < it->second->rater_id) it->second = &a;
    }
    OracleStore store;
    for (const auto& s : segments) {
      auto it = first.find(s.key());
      if (it == first.end()) continue;
      store.entries_.insert({s.candidate,
                             Entry{s, it->second->annotations, it->second->raw_score,
                                   it->second->derived_score}});
    }
    return store;
  }

  std::size_t size() const { return entries_.size(); }

  // The entry whose candidate and source appear in the final block of
  // `prompt`, if any.
  const Entry* find(std::string_view prompt) const {
    constexpr std::string_view kTranslation = " translation: \"";
    for (auto pos = prompt.rfind(kTranslation); pos != std::string_view::npos;
         pos = pos == 0 ? std::string_view::npos : prompt.rfind(kTranslation, pos - 1)) {
      const std::size_t start = pos + kTranslation.size();
      const auto end = prompt.rfind("\"\n");
      if (end == std::string_view::npos || end < start) continue;
      auto [lo, hi] = entries_.equal_range(std::string(prompt.substr(start, end - start)));
      const Entry* best = nullptr;
      std::size_t best_pos = 0;
      for (auto it = lo; it != hi; ++it) {
        const std::string needle = " source: \"" + it->second.segment.source + "\"\n";
        auto at = prompt.substr(0, pos).rfind(needle);
        if (at != std::string_view::npos && (!best || at > best_pos)) {
          best = &it->second;
          best_pos = at;
        }
      }
      if (best) return best;
    }
    return nullptr;
  }

 private:
  std::multimap<std::string, Entry> entries_;
};

// Oracle score answer: the gold raw score, else the MQM penalty mapped to
// 100 - 4 * penalty and clamped to [0, 100].
inline double oracle_score(const OracleStore::Entry& e) {
  if (e.raw_score) return *e.raw_score;
  const double penalty = e.derived_score.value_or(score_annotations(e.annotations));
  return std::clamp(100.0 - 4.0 * penalty, 0.0, 100.0);
}

class OracleBackend : public CompletionBackend {
 public:
  explicit OracleBackend(OracleStore store) : store_(std::move(store)) {}

  Completion complete(const CompletionRequest& request) override {
    std::string_view prompt = text::trim(request.prompt);
    const Entry* entry = store_.find(request.prompt);
    if (!entry) throw BackendError("oracle has no gold answer for the prompt's target segment");
    if (prompt.ends_with(templates::kErrorsLabel)) {
      return {render_error_list(entry->annotations), std::nullopt};
    }
    if (prompt.ends_with(templates::kScoreLabel)) {
      return {text::format_number(text::round4(oracle_score(*entry))), std::nullopt};
    }
    throw BackendError("oracle cannot tell the prompt mode");
  }

 private:
  using Entry = OracleStore::Entry;
  OracleStore store_;
};

// ---------------------------------------------------------------------------
// Replay.

struct ReplayRecord {
  std::string prompt_sha256;
  std::string prompt;
  std::string completion;
  std::string model;
  std::string timestamp;

  Json to_json() const {
    Json j;
    j["prompt_sha256"] = prompt_sha256;
    j["prompt"] = prompt;
    j["completion"] = completion;
    j["model"] = model;
    j["timestamp"] = timestamp;
    return j;
  }
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class ReplayBackend : public CompletionBackend {
 public:
  explicit ReplayBackend(const std::string& path) {
    for (const auto& line : detail::read_lines(path)) {
      try {
        Json j = Json::parse(line.text);
        ReplayRecord r{j.at("prompt_sha256").get<std::string>(), j.at("prompt").get<std::string>(),
                       j.at("completion").get<std::string>(), j.value("model", std::string()),
                       j.value("timestamp", std::string())};
        // The first recording of a prompt wins.
        records_.try_emplace(r.prompt_sha256, std::move(r));
      } catch (const Json::exception& e) {
        throw SchemaError(path, line.number, e.what());
      }
    }
  }

  Completion complete(const CompletionRequest& request) override {
    auto it = records_.find(sha256_hex(request.prompt));
    if (it == records_.end() || it->second.prompt != request.prompt) {
      throw ReplayMiss("replay log has no completion for prompt " +
                       sha256_hex(request.prompt).substr(0, 12));
    }
    return {it->second.completion, it->second.timestamp};
  }

 private:
  std::map<std::string, ReplayRecord> records_;
};

// Appends replay records as JSONL; safe to share between threads. Fields of
// `provenance` are appended to every record.
class ReplayRecorder {
 public:
  explicit ReplayRecorder(const std::string& path, Json provenance = Json::object())
      : out_(path, std::ios::binary | std::ios::trunc), provenance_(std::move(provenance)) {
    if (!out_) throw ConfigError("cannot write replay log " + path);
  }

  void append(const ReplayRecord& r) {
    Json j = r.to_json();
    for (const auto& [k, v] : provenance_.items()) j[k] = v;
    const std::string line = j.dump() + "\n";
    std::lock_guard lock(mu_);
    out_ << line;
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
  Json provenance_;
};

// ---------------------------------------------------------------------------
// HTTP.

class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(const BackendConfig& config) : config_(config) {
    const auto scheme_end = config.endpoint.find("://");
    const auto path_start = config.endpoint.find(
        '/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    base_ = config.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config.endpoint.substr(path_start);
    if (!config.api_key_env.empty()) {
      const char* key = std::getenv(config.api_key_env.c_str());
      if (!key || !*key) {
        throw AuthError("environment variable " + config.api_key_env + " is not set");
      }
      api_key_ = key;
    }
  }

  Completion complete(const CompletionRequest& request) override {
    httplib::Client client(base_);
    const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    Json body;
    body["prompt"] = request.prompt;
    body["max_tokens"] = request.max_tokens;
    body["temperature"] = request.temperature;
    body["stop"] = request.stop;
    body["model"] = request.model.empty() ? config_.model : request.model;

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
    if (res->status == 401 || res->status == 403) {
      throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status == 429) throw RateLimited("endpoint rate-limited the request");
    if (res->status >= 500) {
      throw TransportError("server error (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
      throw MalformedResponse("unexpected HTTP status " + std::to_string(res->status));
    }
    try {
      Json j = Json::parse(res->body);
      return {j.at("text").get<std::string>(), std::nullopt};
    } catch (const Json::exception& e) {
      throw MalformedResponse(std::string("response is not {text}: ") + e.what());
    }
  }

 private:
  BackendConfig config_;
  std::string base_;
  std::string path_;
  std::string api_key_;
};

// ---------------------------------------------------------------------------
// Client.

// Enforces a minimum interval between request starts across all callers.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second) {
    if (requests_per_second > 0.0) {
      interval_ = std::chrono::duration_cast<Clock::duration>(
          std::chrono::duration<double>(1.0 / requests_per_second));
    }
  }

  void acquire() {
    if (interval_ == Clock::duration::zero()) return;
    Clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      const auto now = Clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::mutex mu_;
  Clock::duration interval_ = Clock::duration::zero();
  Clock::time_point next_{};
};

class LlmClient {
 public:
  LlmClient(std::unique_ptr<CompletionBackend> backend, BackendConfig config,
            std::shared_ptr<ReplayRecorder> recorder = nullptr)
      : backend_(std::move(backend)),
        config_(std::move(config)),
        limiter_(config_.rate_limit_rps),
        recorder_(std::move(recorder)) {}

  const BackendConfig& config() const { return config_; }

  // Retries retryable failures with exponential backoff; every success is
  // appended to the replay log when one is attached.
  std::string complete(const CompletionRequest& request) {
    request.validate();
    auto backoff = config_.retry.initial_backoff;
    for (int attempt = 1;; ++attempt) {
      limiter_.acquire();
      try {
        Completion c = backend_->complete(request);
        if (recorder_) {
          recorder_->append({sha256_hex(request.prompt), request.prompt, c.text,
                             request.model.empty() ? config_.model : request.model,
                             c.timestamp.value_or(utc_timestamp())});
        }
        return std::move(c.text);
      } catch (const BackendError& e) {
        if (!e.retryable() || attempt >= config_.retry.max_attempts) throw;
      }
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(backoff.count()) * config_.retry.multiplier));
    }
  }

 private:
  std::unique_ptr<CompletionBackend> backend_;
  BackendConfig config_;
  RateLimiter limiter_;
  std::shared_ptr<ReplayRecorder> recorder_;
};

// Result of one request in a batch: the completion, or the error that
// stopped it.
struct CompletionOutcome {
  std::optional<std::string> text;
  std::string error;

  bool ok() const { return text.has_value(); }
};

// Runs `requests` on `parallelism` worker threads. Results are aligned with
// the requests; a failure only affects its own slot.
inline std::vector<CompletionOutcome> batch_complete(std::span<const CompletionRequest> requests,
                                                     LlmClient& client, std::size_t parallelism) {
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  std::vector<CompletionOutcome> out(requests.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < requests.size(); i = next++) {
      try {
        out[i].text = client.complete(requests[i]);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const std::size_t n_threads = std::min(parallelism, std::max<std::size_t>(requests.size(), 1));
  if (n_threads == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return out;
}

}  // namespace mqmkit
