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


#include "runner.h"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "tprnn/checkpoint.h"
#include "tprnn/errors.h"
#include "tprnn/eval.h"
#include "tprnn/random.h"

#ifndef TPRNN_VERSION_STRING
#define TPRNN_VERSION_STRING "unknown"
#endif

namespace tprnn::cli {
namespace {

std::string UtcNow() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out << text;
  if (!out) throw FormatError("write failed: " + path);
}

std::string Dump(const Json& j, int indent = -1) {
  try {
    return j.dump(indent);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("json: ") + e.what());
  }
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path) {
    if (path.empty()) return;
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw FormatError("cannot write " + path);
  }
  void Write(const Json& j) {
    if (!out_.is_open()) return;
    out_ << Dump(j) << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace

std::string Version() { return TPRNN_VERSION_STRING; }

std::string ChecksumHex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(bytes)));
  return buf;
}

Corpus LoadCorpus(const RunConfig& config) {
  const std::string text = ReadTextFile(config.corpus);
  Vocab vocab = config.vocab.empty()
                    ? Vocab::Build(text, config.tokens,
                                   config.max_vocab == 0
                                       ? std::nullopt
                                       : std::optional<std::size_t>(config.max_vocab))
                    : LoadVocab(config.vocab);
  if (vocab.mode() != config.tokens) {
    throw ConfigError("vocab file tokenization does not match 'tokens'");
  }
  TokenStream all = vocab.Encode(text);
  if (config.max_tokens != 0 && config.max_tokens < all.ids.size()) {
    all.ids.resize(config.max_tokens);
  }
  auto [train, valid] = SplitTrainValid(all, config.valid_frac);
  return {std::move(vocab), std::move(train), std::move(valid), ChecksumHex(text)};
}

void SaveVocab(const Vocab& vocab, const std::string& path) {
  Json j;
  j["format"] = "tprnn-vocab";
  j["version"] = 1;
  j["tokens"] = std::string(TokenModeName(vocab.mode()));
  j["known"] = vocab.known_tokens();
  WriteText(path, Dump(j, 1) + "\n");
}

Vocab LoadVocab(const std::string& path) {
  const Json j = ReadJsonFile(path);
  try {
    if (j.at("format") != "tprnn-vocab") throw FormatError(path + ": not a vocab file");
    return Vocab::FromTokens(ParseTokenMode(j.at("tokens").get<std::string>()),
                             j.at("known").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string VocabPathFor(const std::string& checkpoint) { return checkpoint + ".vocab"; }

std::string ManifestPathFor(const RunConfig& config) {
  if (!config.manifest.empty()) return config.manifest;
  if (!config.metrics.empty()) return config.metrics + ".manifest.json";
  return {};
}

std::string TimingPathFor(const std::string& metrics) {
  return metrics.empty() ? std::string() : metrics + ".timing.jsonl";
}

Json MakeManifest(const RunConfig& config, const std::string& corpus_checksum) {
  Json j;
  j["format"] = "tprnn-manifest";
  j["version"] = Version();
  j["method"] = std::string(MethodName(config.method));
  j["seed"] = config.seed;
  j["start_time"] = UtcNow();
  j["corpus_checksum"] = corpus_checksum;
  Json cfg = Json::object();
  for (const auto& [k, v] : Serialize(config)) cfg[k] = v;
  j["config"] = std::move(cfg);
  return j;
}

RunConfig ConfigFromManifest(const Json& manifest) {
  try {
    if (manifest.at("format") != "tprnn-manifest") throw FormatError("not a run manifest");
    RunConfig config;
    config.method = ParseMethod(manifest.at("method").get<std::string>());
    for (const auto& [k, v] : manifest.at("config").items()) {
      SetKey(config, k, v.get<std::string>());
    }
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

Json MetricsRecord(const EpochMetrics& m) {
  Json j;
  j["epoch"] = m.epoch;
  j["train_loss"] = m.train_loss;
  j["valid_ppl"] = m.valid_ppl;
  if (m.residual) {
    j["residual"] = *m.residual;
    j["backtracks"] = m.backtracks;
  }
  return j;
}

RunResult ExecuteRun(const RunConfig& config, const RunHooks& hooks) {
  config.Validate();
  const Corpus corpus = LoadCorpus(config);
  const std::size_t embed = config.embed == 0 ? config.hidden : config.embed;
  ParamSet theta(config.cell, {corpus.vocab.size(), embed, config.hidden});
  theta.InitRandom(DeriveSeed(config.seed, "init"), config.init_scale);

  if (const std::string path = ManifestPathFor(config); !path.empty()) {
    WriteText(path, Dump(MakeManifest(config, corpus.checksum), 2) + "\n");
  }
  JsonlWriter metrics(config.metrics);
  JsonlWriter timing(TimingPathFor(config.metrics));

  RunResult result;
  result.vocab_size = corpus.vocab.size();
  result.train_tokens = corpus.train.size();
  result.valid_tokens = corpus.valid.size();
  result.unigram_ppl =
      UnigramPerplexity(corpus.train.span(), corpus.valid.span(), corpus.vocab.size());

  auto on_epoch = [&](const EpochMetrics& m) {
    metrics.Write(MetricsRecord(m));
    Json t;
    t["epoch"] = m.epoch;
    t["seconds"] = m.seconds;
    timing.Write(t);
    if (hooks.progress != nullptr) {
      *hooks.progress << MethodName(config.method) << " epoch " << m.epoch
                      << " loss " << m.train_loss << " ppl " << m.valid_ppl;
      if (m.residual) *hooks.progress << " residual " << *m.residual;
      *hooks.progress << " (" << m.seconds << " s)" << std::endl;
    }
  };

  if (config.method == Method::kBptt) {
    result.history = TrainBptt(theta, corpus.train, corpus.valid, config.ToBptt(), on_epoch);
  } else {
    TPropCallbacks callbacks;
    callbacks.on_epoch = on_epoch;
    callbacks.on_theta_gradient = hooks.on_theta_gradient;
    result.history = TrainBtprop(theta, corpus.train, corpus.valid, config.ToTProp(),
                                 config.threads, callbacks);
  }

  result.best_ppl = std::numeric_limits<double>::infinity();
  for (const EpochMetrics& m : result.history) {
    result.best_ppl = std::min(result.best_ppl, m.valid_ppl);
  }
  result.final_ppl = result.history.back().valid_ppl;

  if (!config.checkpoint.empty()) {
    SaveCheckpoint(theta, config.checkpoint);
    SaveVocab(corpus.vocab, VocabPathFor(config.checkpoint));
  }
  return result;
}

Json ResultJson(const RunConfig& config, const RunResult& result) {
  Json j;
  j["method"] = std::string(MethodName(config.method));
  j["epochs"] = result.history.size();
  j["vocab"] = result.vocab_size;
  j["train_tokens"] = result.train_tokens;
  j["valid_tokens"] = result.valid_tokens;
  j["unigram_ppl"] = result.unigram_ppl;
  j["final_valid_ppl"] = result.final_ppl;
  j["best_valid_ppl"] = result.best_ppl;
  return j;
}

RunResult Replay(const std::string& manifest_path, const std::string& metrics_path,
                 const RunHooks& hooks) {
  const Json manifest = ReadJsonFile(manifest_path);
  RunConfig config = ConfigFromManifest(manifest);
  const std::string recorded = manifest.value("corpus_checksum", "");
  const std::string actual = ChecksumHex(ReadTextFile(config.corpus));
  if (recorded != actual) {
    throw FormatError("corpus checksum mismatch: manifest " + recorded + ", file " + actual);
  }
  config.metrics = metrics_path;
  config.manifest.clear();
  config.checkpoint.clear();
  return ExecuteRun(config, hooks);
}

}  // namespace tprnn::cli
