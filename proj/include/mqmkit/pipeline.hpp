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

// Run orchestration behind the command-line tool. Each command takes a
// RunConfig and writes plain JSON / JSONL / CSV files; every file carries
// the config hash and seed.
//
// The config hash covers what determines the outputs: the command, prompt
// and sampling settings, the model name and the contents of the input
// files. Backend transport (oracle, replay, endpoint) and output paths are
// left out, so a replayed run reproduces the original byte for byte.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mqmkit/completion.hpp"
#include "mqmkit/error.hpp"
#include "mqmkit/hash.hpp"
#include "mqmkit/icl_sampler.hpp"
#include "mqmkit/json_io.hpp"
#include "mqmkit/llm_backend.hpp"
#include "mqmkit/loaders.hpp"
#include "mqmkit/meta_eval.hpp"
#include "mqmkit/mqm.hpp"
#include "mqmkit/prompting.hpp"
#include "mqmkit/span_metrics.hpp"

namespace mqmkit {

enum class Sampling { kUniform, kStratified, kStratifiedRejection };

inline std::string_view to_string(Sampling s) {
  switch (s) {
    case Sampling::kUniform:
      return "uniform";
    case Sampling::kStratified:
      return "stratified";
    case Sampling::kStratifiedRejection:
      return "stratified_rejection";
  }
  return "uniform";
}

inline Sampling parse_sampling(std::string_view s) {
  if (s == "uniform") return Sampling::kUniform;
  if (s == "stratified") return Sampling::kStratified;
  if (s == "stratified_rejection") return Sampling::kStratifiedRejection;
  throw ConfigError("unknown sampling '" + std::string(s) + "'");
}

inline PromptMode parse_mode(std::string_view s) {
  if (s == "score") return PromptMode::kScoreSqm;
  if (s == "automqm") return PromptMode::kAutoMqm;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

struct RunConfig {
  std::string command = "evaluate";
  PromptMode mode = PromptMode::kAutoMqm;
  bool with_reference = true;
  std::size_t k = 4;
  Sampling sampling = Sampling::kStratifiedRejection;
  std::uint64_t seed = 0;
  RejectionConfig rejection;
  std::size_t max_attempts = kDefaultMaxAttempts;
  std::size_t n_buckets = kDefaultBucketCount;
  BackendConfig backend;
  std::size_t parallelism = 1;

  std::string segments_path;
  std::string pool_path;
  std::string assessments_path;
  std::string gold_path;
  std::string gold_format = "mqm";  // mqm | da | jsonl
  std::string lp;                   // language pair of MQM / word-tag TSVs
  bool per_segment = false;         // span-eval: emit per-segment rows
  Averaging averaging = Averaging::kMicro;
  BinSpec bins;
  std::string out;

  void validate() const {
    if (mode == PromptMode::kAutoMqm && k < 1) {
      throw ConfigError("automqm mode is few-shot only: --k must be >= 1");
    }
    if (sampling == Sampling::kStratifiedRejection && mode != PromptMode::kAutoMqm) {
      throw ConfigError("stratified_rejection sampling applies to automqm mode only");
    }
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (n_buckets < 1) throw ConfigError("bucket count must be >= 1");
    if (max_attempts < 1) throw ConfigError("max attempts must be >= 1");
    if (gold_format != "mqm" && gold_format != "da" && gold_format != "jsonl") {
      throw ConfigError("unknown gold format '" + gold_format + "'");
    }
    rejection.validate();
  }

  // Hashed fields. Input files enter through their SHA-256.
  Json hashed_json() const {
    Json j;
    j["command"] = command;
    j["mode"] = to_string(mode);
    j["with_reference"] = with_reference;
    j["k"] = k;
    j["sampling"] = to_string(sampling);
    j["seed"] = seed;
    j["rejection"] = {{"min_errors", rejection.min_errors},
                      {"majmin_threshold", rejection.majmin_threshold},
                      {"cat_diversity", rejection.cat_diversity},
                      {"min_clen", rejection.min_clen},
                      {"max_clen", rejection.max_clen}};
    j["max_attempts"] = max_attempts;
    j["n_buckets"] = n_buckets;
    j["model"] = backend.model;
    j["gold_format"] = gold_format;
    j["lp"] = lp;
    j["per_segment"] = per_segment;
    j["averaging"] = averaging == Averaging::kMicro ? "micro" : "macro";
    j["bins"] = {{"start", bins.start}, {"width", bins.width}, {"count", bins.count}};
    Json inputs = Json::object();
    auto add = [&](const char* name, const std::string& path) {
      if (!path.empty()) inputs[name] = file_sha256(path);
    };
    add("segments", segments_path);
    add("pool", pool_path);
    add("assessments", assessments_path);
    if (command != "evaluate") add("gold", gold_path);
    j["inputs"] = std::move(inputs);
    return j;
  }

  std::string hash() const { return sha256_hex(hashed_json().dump()); }

  Json to_json() const {
    Json j = hashed_json();
    j["config_hash"] = hash();
    j["backend"] = backend.to_json();
    j["gold"] = gold_path;
    j["parallelism"] = parallelism;
    return j;
  }

  static std::string file_sha256(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read input file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
  }
};

// ---------------------------------------------------------------------------
// Input helpers.

struct GoldData {
  std::vector<SegmentAssessment> assessments;
  std::vector<Segment> segments;  // MQM TSV only
};

inline GoldData load_gold(const std::string& path, const std::string& format,
                          const std::string& lp) {
  if (path.empty()) throw ConfigError("gold file is required");
  if (format == "mqm") {
    if (lp.empty()) throw ConfigError("--lp is required for MQM TSV gold");
    auto corpus = load_mqm_corpus(path, lp);
    return {std::move(corpus.assessments), std::move(corpus.segments)};
  }
  if (format == "da") return {load_da_scores(path), {}};
  if (format == "jsonl") return {load_assessments_jsonl(path), {}};
  throw ConfigError("unknown gold format '" + format + "'");
}

inline std::vector<Segment> load_run_segments(const RunConfig& config, const GoldData* gold) {
  if (!config.segments_path.empty()) return load_segments_jsonl(config.segments_path);
  if (gold && !gold->segments.empty()) return gold->segments;
  throw ConfigError("--segments is required unless the gold file is an MQM TSV");
}

inline std::unique_ptr<CompletionBackend> make_backend(const BackendConfig& config,
                                                       std::span<const Segment> segments) {
  config.validate();
  switch (config.kind) {
    case BackendKind::kHttpGeneric:
      return std::make_unique<HttpBackend>(config);
    case BackendKind::kReplay:
      return std::make_unique<ReplayBackend>(config.replay_path);
    case BackendKind::kOracle: {
      auto gold = load_gold(config.gold_path, config.gold_format, config.gold_lp);
      return std::make_unique<OracleBackend>(OracleStore::build(segments, gold.assessments));
    }
  }
  throw ConfigError("unknown backend kind");
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  if (!out) throw ConfigError("failed writing " + path.string());
}

inline Json provenance(const RunConfig& config) {
  return {{"config_hash", config.hash()}, {"seed", config.seed}};
}

// ---------------------------------------------------------------------------
// sample-icl

inline std::vector<ICLExample> sample_icl(const RunConfig& config) {
  if (config.pool_path.empty()) throw ConfigError("--pool is required");
  auto pool = ExamplePool::with_equal_width_buckets(load_pool_jsonl(config.pool_path),
                                                    config.n_buckets);
  switch (config.sampling) {
    case Sampling::kUniform:
      return sample_uniform(pool, config.k, config.seed);
    case Sampling::kStratified:
      return sample_stratified(pool, config.k, config.seed);
    case Sampling::kStratifiedRejection:
      return sample_automqm_set(pool, config.k, config.rejection, config.seed,
                                config.max_attempts);
  }
  return {};
}

inline Json example_set_json(const RunConfig& config, std::span<const ICLExample> examples) {
  Json j = provenance(config);
  j["sampling"] = to_string(config.sampling);
  j["k"] = config.k;
  Json arr = Json::array();
  for (const auto& ex : examples) arr.push_back(to_json(ex));
  j["examples"] = std::move(arr);
  return j;
}

inline Json cmd_sample_icl(const RunConfig& config) {
  config.validate();
  auto j = example_set_json(config, sample_icl(config));
  if (!config.out.empty()) write_text_file(config.out, j.dump(2) + "\n");
  return j;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateSummary {
  std::size_t n_segments = 0;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
  std::size_t n_backend_errors = 0;
};

// Prompts the backend for every segment and writes, under `config.out`:
//   assessments.jsonl   parsed completions with derived scores
//   diagnostics.json    parse diagnostics
//   replay.jsonl        every prompt / completion pair
//   icl_examples.json   the in-context examples used
//   run_config.json     the full configuration
inline EvaluateSummary cmd_evaluate(const RunConfig& config) {
  config.validate();
  if (config.out.empty()) throw ConfigError("--out is required");
  std::optional<GoldData> gold;
  if (config.segments_path.empty() && !config.gold_path.empty()) {
    gold = load_gold(config.gold_path, config.gold_format, config.lp);
  }
  const auto segments = load_run_segments(config, gold ? &*gold : nullptr);

  std::vector<ICLExample> examples;
  if (config.k > 0) examples = sample_icl(config);

  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);
  const Json prov = provenance(config);

  BackendConfig backend_config = config.backend;
  if (backend_config.kind == BackendKind::kOracle && backend_config.gold_path.empty()) {
    backend_config.gold_path = config.gold_path;
    backend_config.gold_format = config.gold_format;
    backend_config.gold_lp = config.lp;
  }
  auto recorder = std::make_shared<ReplayRecorder>((dir / "replay.jsonl").string(), prov);
  LlmClient client(make_backend(backend_config, segments), backend_config, recorder);

  const auto tmpl = PromptTemplate::make(config.mode, config.with_reference);
  std::vector<CompletionRequest> requests;
  requests.reserve(segments.size());
  for (const auto& s : segments) {
    CompletionRequest r;
    r.prompt = render_prompt(tmpl, examples, s);
    r.max_tokens = config.mode == PromptMode::kAutoMqm ? kAutoMqmMaxTokens : kScoreMaxTokens;
    r.model = backend_config.model;
    requests.push_back(std::move(r));
  }
  const auto outcomes = batch_complete(requests, client, config.parallelism);

  EvaluateSummary summary;
  summary.n_segments = segments.size();
  std::string assessments;
  ParseDiagnostics totals;
  Json per_segment = Json::array();
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    SegmentAssessment a;
    a.key = seg.key();
    a.rater_id = backend_config.model.empty() ? "llm" : backend_config.model;
    Json row;
    row["lp"] = a.key.lp;
    row["system_id"] = a.key.system_id;
    row["seg_id"] = a.key.seg_id;
    if (!outcomes[i].ok()) {
      ++summary.n_backend_errors;
      a.warnings.push_back("backend error: " + outcomes[i].error);
      row["kind"] = "backend_error";
      row["error"] = outcomes[i].error;
    } else {
      ParsedCompletion parsed = config.mode == PromptMode::kAutoMqm
                                    ? parse_automqm_completion(*outcomes[i].text, seg)
                                    : parse_score_completion(*outcomes[i].text);
      row["kind"] = to_string(parsed.kind);
      const auto& d = parsed.diagnostics;
      totals.items_total += d.items_total;
      totals.items_dropped += d.items_dropped;
      totals.unlocated_spans += d.unlocated_spans;
      totals.ambiguous_spans += d.ambiguous_spans;
      if (!d.dropped_items.empty()) row["dropped_items"] = d.dropped_items;
      if (!d.warnings.empty()) row["warnings"] = d.warnings;
      a.warnings = d.warnings;
      if (!parsed.valid()) {
        ++summary.n_invalid;
        a.warnings.push_back("unparseable completion");
      } else {
        ++summary.n_valid;
        if (config.mode == PromptMode::kAutoMqm) {
          a.annotations.assign(parsed.errors().begin(), parsed.errors().end());
          a.derived_score = score_annotations(a.annotations);
        } else {
          a.raw_score = parsed.numeric_score();
        }
      }
    }
    Json line = to_json(a);
    for (const auto& [k, v] : prov.items()) line[k] = v;
    assessments += line.dump() + "\n";
    per_segment.push_back(std::move(row));
  }
  write_text_file(dir / "assessments.jsonl", assessments);

  Json diag = prov;
  diag["n_segments"] = summary.n_segments;
  diag["n_valid"] = summary.n_valid;
  diag["n_invalid"] = summary.n_invalid;
  diag["n_backend_errors"] = summary.n_backend_errors;
  diag["items_total"] = totals.items_total;
  diag["items_dropped"] = totals.items_dropped;
  diag["unlocated_spans"] = totals.unlocated_spans;
  diag["ambiguous_spans"] = totals.ambiguous_spans;
  diag["segments"] = std::move(per_segment);
  write_text_file(dir / "diagnostics.json", diag.dump(2) + "\n");
  write_text_file(dir / "icl_examples.json", example_set_json(config, examples).dump(2) + "\n");
  write_text_file(dir / "run_config.json", config.to_json().dump(2) + "\n");
  return summary;
}

// ---------------------------------------------------------------------------
// meta-eval

inline Json cmd_meta_eval(const RunConfig& config) {
  config.validate();
  if (config.assessments_path.empty()) throw ConfigError("--assessments is required");
  const auto metric = load_assessments_jsonl(config.assessments_path);
  const auto gold = load_gold(config.gold_path, config.gold_format, config.lp);
  const auto report = build_report(metric, gold.assessments);

  Json j = provenance(config);
  j["n_entries"] = report.entries().size();
  j["n_excluded"] = report.exclusions().size();
  Json per_lp = Json::object();
  for (const auto& lp : report.lps()) {
    Json row;
    row["n_segments"] = report.entries_for(lp).size();
    try {
      row["pearson"] = text::round4(pearson(report, lp));
    } catch (const DataError& e) {
      row["pearson"] = nullptr;
      row["pearson_error"] = e.what();
    }
    try {
      const auto acc = pairwise_accuracy_star(report, lp);
      row["acc_star"] = text::round4(acc.acc_star);
      row["epsilon"] = acc.epsilon;
      row["n_pairs"] = acc.n_pairs;
    } catch (const DataError& e) {
      row["acc_star"] = nullptr;
      row["acc_star_error"] = e.what();
    }
    per_lp[lp] = std::move(row);
  }
  j["segment_level"] = std::move(per_lp);
  try {
    const auto sys = system_accuracy(report, {});
    j["system_accuracy"] = text::round4(sys.accuracy);
    j["system_pairs"] = sys.n_pairs;
    j["system_gold_ties"] = sys.n_gold_ties;
  } catch (const DataError& e) {
    j["system_accuracy"] = nullptr;
    j["system_accuracy_error"] = e.what();
  }
  Json excl = Json::array();
  for (const auto& e : report.exclusions()) {
    excl.push_back({{"key", e.key.to_string()}, {"reason", e.reason}});
  }
  j["exclusions"] = std::move(excl);
  if (!config.out.empty()) write_text_file(config.out, j.dump(2) + "\n");
  return j;
}

// ---------------------------------------------------------------------------
// span-eval

// Predicted spans are compared with the first gold rater (by rater id) of
// each segment. Segments without gold are skipped and counted.
inline Json cmd_span_eval(const RunConfig& config) {
  config.validate();
  if (config.assessments_path.empty()) throw ConfigError("--assessments is required");
  const auto pred = load_assessments_jsonl(config.assessments_path);
  const auto gold = load_gold(config.gold_path, config.gold_format, config.lp);
  const auto segments = load_run_segments(config, &gold);

  std::map<SegmentKey, const Segment*> seg_by_key;
  for (const auto& s : segments) seg_by_key[s.key()] = &s;
  std::map<SegmentKey, const SegmentAssessment*> gold_by_key;
  for (const auto& g : gold.assessments) {
    auto [it, inserted] = gold_by_key.try_emplace(g.key, &g);
    if (!inserted && g.rater_id < it->second->rater_id) it->second = &g;
  }

  SpanEvaluator eval;
  std::size_t no_gold = 0;
  std::set<SegmentKey> seen;
  for (const auto& p : pred) {
    if (!seen.insert(p.key).second) continue;
    auto g = gold_by_key.find(p.key);
    auto s = seg_by_key.find(p.key);
    if (g == gold_by_key.end() || s == seg_by_key.end()) {
      ++no_gold;
      continue;
    }
    eval.add(p.annotations, g->second->annotations, s->second->candidate, p.key);
  }
  Json j = provenance(config);
  const Json result = eval.result(config.averaging, config.per_segment).to_json();
  for (const auto& [k, v] : result.items()) j[k] = v;
  j["n_without_gold"] = no_gold;
  if (!config.out.empty()) write_text_file(config.out, j.dump(2) + "\n");
  return j;
}

// ---------------------------------------------------------------------------
// report

// Histogram of the assessment scores (raw score, else derived penalty) as
// CSV, preceded by a `#` provenance line.
inline std::string cmd_report(const RunConfig& config) {
  config.validate();
  if (config.assessments_path.empty()) throw ConfigError("--assessments is required");
  std::vector<double> scores;
  for (const auto& a : load_assessments_jsonl(config.assessments_path)) {
    if (auto s = a.score()) scores.push_back(*s);
  }
  const auto hist = score_histogram(scores, config.bins);
  std::string csv = "# config_hash=" + config.hash() + " seed=" + std::to_string(config.seed) +
                    " below_range=" + std::to_string(hist.below_range) +
                    " above_range=" + std::to_string(hist.above_range) +
                    " non_finite=" + std::to_string(hist.non_finite) + "\n" + hist.to_csv();
  if (!config.out.empty()) write_text_file(config.out, csv);
  return csv;
}

}  // namespace mqmkit
