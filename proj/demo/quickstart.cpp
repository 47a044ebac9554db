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


// Walks through the library on the bundled en-de sample: score gold MQM
// annotations, build an AutoMQM prompt, run the oracle backend end to end
// and meta-evaluate the result.
//
//   quickstart [data_dir] [out_dir]

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>

#include "mqmkit/mqmkit.hpp"

int main(int argc, char** argv) try {
  namespace fs = std::filesystem;
  using namespace mqmkit;

  const std::string data = argc > 1 ? argv[1] : MQMKIT_DEMO_DATA;
  const std::string out =
      argc > 2 ? argv[2] : (fs::temp_directory_path() / "mqmkit-quickstart").string();

  // Gold annotations and their MQM scores.
  const auto gold = load_mqm_tsv(data + "/gold_mqm.tsv", "en-de");
  std::map<std::string, double> penalty;
  for (const auto& a : gold) penalty[a.key.system_id] += *a.derived_score;
  std::cout << "gold MQM penalty per system (lower is better)\n";
  for (const auto& [system, total] : penalty) {
    std::cout << "  " << system << "  " << std::fixed << std::setprecision(1) << total << "\n";
  }

  // A three-shot AutoMQM prompt without references.
  const auto pool = ExamplePool::with_equal_width_buckets(load_pool_jsonl(data + "/pool.jsonl"));
  const auto shots = sample_automqm_set(pool, 3, {}, /*seed=*/7);
  const auto segments = load_segments_jsonl(data + "/segments.jsonl");
  const auto tmpl = PromptTemplate::make(PromptMode::kAutoMqm, /*with_reference=*/false);
  std::cout << "\nprompt for " << segments.back().key().to_string() << ":\n"
            << render_prompt(tmpl, shots, segments.back()) << "\n";

  // The oracle backend answers with the gold errors, so the run reproduces
  // the gold scores exactly.
  RunConfig run;
  run.segments_path = data + "/segments.jsonl";
  run.pool_path = data + "/pool.jsonl";
  run.gold_path = data + "/gold_mqm.tsv";
  run.lp = "en-de";
  run.with_reference = false;
  run.k = 3;
  run.seed = 7;
  run.backend.kind = BackendKind::kOracle;
  run.out = out;
  const auto summary = cmd_evaluate(run);
  std::cout << "\nevaluated " << summary.n_segments << " segments, " << summary.n_valid
            << " valid completions, written to " << out << "\n";

  RunConfig meta = run;
  meta.assessments_path = out + "/assessments.jsonl";
  meta.out.clear();
  std::cout << "meta-eval: " << cmd_meta_eval(meta).dump(2) << "\n";
  std::cout << "span-eval: " << cmd_span_eval(meta).dump(2) << "\n";
  return 0;
} catch (const mqmkit::Error& e) {
  std::cerr << "quickstart: " << e.what() << "\n";
  return 1;
}
