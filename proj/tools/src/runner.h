// Copyright 2026 The tprnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Executes one training run: corpus loading, manifest, metrics files and
// checkpoint output.

#ifndef TPRNN_TOOLS_RUNNER_H_
#define TPRNN_TOOLS_RUNNER_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "run_config.h"
#include "tprnn/btprop.h"
#include "tprnn/data.h"
#include "tprnn/metrics.h"

namespace tprnn::cli {

using Json = nlohmann::ordered_json;

std::string Version();

struct Corpus {
  Vocab vocab;
  TokenStream train;
  TokenStream valid;
  std::string checksum;  // FNV-1a 64 of the corpus bytes, hex
};

Corpus LoadCorpus(const RunConfig& config);
std::string ChecksumHex(std::string_view bytes);

void SaveVocab(const Vocab& vocab, const std::string& path);
Vocab LoadVocab(const std::string& path);
// Vocab file written next to a checkpoint.
std::string VocabPathFor(const std::string& checkpoint);

// Explicit manifest path, else <metrics>.manifest.json, else empty.
std::string ManifestPathFor(const RunConfig& config);
Json MakeManifest(const RunConfig& config, const std::string& corpus_checksum);
RunConfig ConfigFromManifest(const Json& manifest);
Json ReadJsonFile(const std::string& path);

// Deterministic per-epoch record; wall-clock time goes to the timing file.
Json MetricsRecord(const EpochMetrics& m);
std::string TimingPathFor(const std::string& metrics);

struct RunResult {
  std::vector<EpochMetrics> history;
  double unigram_ppl = 0.0;
  double best_ppl = 0.0;
  double final_ppl = 0.0;
  std::size_t vocab_size = 0;
  std::size_t train_tokens = 0;
  std::size_t valid_tokens = 0;
};

struct RunHooks {
  std::function<void(std::size_t, const ParamSet&, const TPropProblem&, const GradSet&)>
      on_theta_gradient;
  std::ostream* progress = nullptr;
};

RunResult ExecuteRun(const RunConfig& config, const RunHooks& hooks = {});
Json ResultJson(const RunConfig& config, const RunResult& result);

// Re-executes the run recorded in a manifest, writing metrics to
// metrics_path. Throws FormatError if the corpus no longer matches.
RunResult Replay(const std::string& manifest_path, const std::string& metrics_path,
                 const RunHooks& hooks = {});

}  // namespace tprnn::cli

#endif  // TPRNN_TOOLS_RUNNER_H_
