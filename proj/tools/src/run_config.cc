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


#include "run_config.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tprnn/errors.h"

namespace tprnn::cli {
namespace {

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void Bad(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) +
                    " (expected " + std::string(want) + ")");
}

std::uint64_t ParseU64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) {
    Bad(key, v, "a non-negative integer");
  }
  return out;
}

double ParseDouble(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    Bad(key, v, "a finite number");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view v) {
  std::string s(v);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  Bad(key, v, "true|false");
}

template <typename F>
auto ParseEnum(std::string_view key, std::string_view v, F parse) {
  try {
    return parse(v);
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

std::string FormatDouble(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, p);
}

template <typename T>
ConfigKey SizeKey(std::string name, KeyScope scope, T RunConfig::*field, std::string help) {
  return {name, std::move(help), scope,
          [name, field](RunConfig& c, std::string_view v) {
            c.*field = static_cast<T>(ParseU64(name, v));
          },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

ConfigKey DoubleKey(std::string name, KeyScope scope, double RunConfig::*field,
                    std::string help) {
  return {name, std::move(help), scope,
          [name, field](RunConfig& c, std::string_view v) { c.*field = ParseDouble(name, v); },
          [field](const RunConfig& c) { return FormatDouble(c.*field); }};
}

ConfigKey StringKey(std::string name, KeyScope scope, std::string RunConfig::*field,
                    std::string help) {
  return {name, std::move(help), scope,
          [field](RunConfig& c, std::string_view v) { c.*field = std::string(v); },
          [field](const RunConfig& c) { return c.*field; }};
}

template <typename E, typename Parse, typename Name>
ConfigKey EnumKey(std::string name, KeyScope scope, E RunConfig::*field, Parse parse,
                  Name to_name, std::string help) {
  return {name, std::move(help), scope,
          [name, field, parse](RunConfig& c, std::string_view v) {
            c.*field = ParseEnum(name, v, parse);
          },
          [field, to_name](const RunConfig& c) { return std::string(to_name(c.*field)); }};
}

std::vector<ConfigKey> BuildKeys() {
  using K = KeyScope;
  std::vector<ConfigKey> k;
  k.push_back(StringKey("corpus", K::kCommon, &RunConfig::corpus, "text corpus path"));
  k.push_back(EnumKey("tokens", K::kCommon, &RunConfig::tokens, ParseTokenMode, TokenModeName,
                      "tokenization: char|word"));
  k.push_back(DoubleKey("valid-frac", K::kCommon, &RunConfig::valid_frac,
                        "fraction of the stream held out for validation"));
  k.push_back(SizeKey("max-vocab", K::kCommon, &RunConfig::max_vocab,
                      "keep the most frequent tokens only (0 = all)"));
  k.push_back(SizeKey("max-tokens", K::kCommon, &RunConfig::max_tokens,
                      "use only the first N corpus tokens (0 = all)"));
  k.push_back(StringKey("vocab", K::kCommon, &RunConfig::vocab, "vocabulary file to load"));
  k.push_back(EnumKey("cell", K::kCommon, &RunConfig::cell, ParseCellKind, CellKindName,
                      "recurrent cell: elman|gru"));
  k.push_back(SizeKey("hidden", K::kCommon, &RunConfig::hidden, "hidden size"));
  k.push_back(SizeKey("embed", K::kCommon, &RunConfig::embed, "embedding size (0 = hidden size)"));
  k.push_back(DoubleKey("init-scale", K::kCommon, &RunConfig::init_scale,
                        "weights start uniform in [-s, s]"));
  k.push_back(SizeKey("seed", K::kCommon, &RunConfig::seed, "root random seed"));
  k.push_back(SizeKey("epochs", K::kCommon, &RunConfig::epochs, "training epochs"));
  k.push_back(EnumKey("regime", K::kCommon, &RunConfig::regime, ParseRegime, RegimeName,
                      "batch|minibatch"));
  k.push_back(EnumKey("optimizer", K::kCommon, &RunConfig::optimizer, ParseOptimizerKind,
                      OptimizerKindName, "parameter optimizer: sgd|adagrad"));
  k.push_back(DoubleKey("lr", K::kCommon, &RunConfig::lr, "parameter learning rate"));
  k.push_back(SizeKey("window", K::kBptt, &RunConfig::window, "truncation window K"));
  k.push_back(SizeKey("block", K::kBtprop, &RunConfig::block, "block size B"));
  k.push_back(EnumKey("schedule", K::kBtprop, &RunConfig::schedule, ParseSchedule,
                      ScheduleName, "pm|alm|admm"));
  k.push_back(DoubleKey("lambda", K::kBtprop, &RunConfig::lambda, "penalty weight"));
  k.push_back(DoubleKey("alpha-u", K::kBtprop, &RunConfig::alpha_u, "dual step size"));
  k.push_back(DoubleKey("lr-h", K::kBtprop, &RunConfig::lr_h, "free-state learning rate"));
  k.push_back(SizeKey("h-steps", K::kBtprop, &RunConfig::h_steps, "free-state steps"));
  k.push_back(SizeKey("theta-steps", K::kBtprop, &RunConfig::theta_steps,
                      "parameter steps per outer iteration"));
  k.push_back(SizeKey("minibatch-blocks", K::kBtprop, &RunConfig::minibatch_blocks,
                      "blocks per minibatch segment"));
  k.push_back(EnumKey("h-optimizer", K::kBtprop, &RunConfig::h_optimizer, ParseOptimizerKind,
                      OptimizerKindName, "free-state optimizer: sgd|adagrad"));
  k.push_back({"h-reinit", "batch regime: re-initialize free states every epoch",
               K::kBtprop,
               [](RunConfig& c, std::string_view v) { c.h_reinit = ParseBool("h-reinit", v); },
               [](const RunConfig& c) { return std::string(c.h_reinit ? "true" : "false"); }});
  k.push_back(SizeKey("threads", K::kBtprop, &RunConfig::threads, "block worker threads"));
  k.push_back(StringKey("metrics", K::kCommon, &RunConfig::metrics, "metrics JSONL output"));
  k.push_back(StringKey("checkpoint", K::kCommon, &RunConfig::checkpoint,
                        "checkpoint output"));
  k.push_back(StringKey("manifest", K::kCommon, &RunConfig::manifest,
                        "manifest output (default: <metrics>.manifest.json)"));
  return k;
}

}  // namespace

std::string_view MethodName(Method method) {
  return method == Method::kBptt ? "bptt" : "btprop";
}

Method ParseMethod(std::string_view name) {
  if (name == "bptt") return Method::kBptt;
  if (name == "btprop") return Method::kBtprop;
  throw ConfigError("unknown method '" + std::string(name) + "' (expected bptt|btprop)");
}

BpttConfig RunConfig::ToBptt() const {
  BpttConfig c;
  c.window = window;
  c.optimizer = optimizer;
  c.lr = lr;
  c.epochs = epochs;
  c.regime = regime;
  return c;
}

TPropConfig RunConfig::ToTProp() const {
  TPropConfig c;
  c.lambda = lambda;
  c.alpha_u = alpha_u;
  c.lr_h = lr_h;
  c.lr_theta = lr;
  c.h_steps = h_steps;
  c.theta_steps = theta_steps;
  c.block_size = block;
  c.schedule = schedule;
  c.regime = regime;
  c.minibatch_blocks = minibatch_blocks;
  c.epochs = epochs;
  c.theta_optimizer = optimizer;
  c.h_optimizer = h_optimizer;
  c.h_reinit_each_epoch = h_reinit;
  return c;
}

void RunConfig::Validate() const {
  if (corpus.empty()) throw ConfigError("corpus is required");
  if (!(valid_frac > 0.0 && valid_frac < 1.0)) {
    throw ConfigError("valid-frac must lie in (0, 1)");
  }
  if (hidden == 0) throw ConfigError("hidden must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("init-scale must be >= 0");
  if (threads == 0) throw ConfigError("threads must be >= 1");
  if (method == Method::kBptt) {
    ToBptt().Validate();
  } else {
    ToTProp().Validate();
  }
}

const std::vector<ConfigKey>& ConfigKeys() {
  static const std::vector<ConfigKey> keys = BuildKeys();
  return keys;
}

const ConfigKey* FindKey(std::string_view name) {
  const std::string n = NormalizeKey(name);
  for (const ConfigKey& k : ConfigKeys()) {
    if (k.name == n) return &k;
  }
  return nullptr;
}

bool KeyApplies(const ConfigKey& key, Method method) {
  switch (key.scope) {
    case KeyScope::kCommon:
      return true;
    case KeyScope::kBptt:
      return method == Method::kBptt;
    case KeyScope::kBtprop:
      return method == Method::kBtprop;
  }
  return false;
}

std::string NormalizeKey(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    out.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string EnvName(std::string_view key) {
  std::string out = "TPRNN_";
  for (char c : key) {
    out.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  return out;
}

void SetKey(RunConfig& config, std::string_view key, std::string_view value) {
  const ConfigKey* k = FindKey(key);
  if (k == nullptr) throw ConfigError("unknown config key '" + std::string(key) + "'");
  k->set(config, value);
}

std::map<std::string, std::string> ParseConfigText(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = Trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = NormalizeKey(Trim(std::string_view(t).substr(0, eq)));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    out[key] = Trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> ReadConfigFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfigText(ss.str());
}

std::vector<std::pair<std::string, std::string>> Serialize(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const ConfigKey& k : ConfigKeys()) {
    if (KeyApplies(k, config.method)) out.emplace_back(k.name, k.get(config));
  }
  return out;
}

std::optional<std::string> ProcessEnv(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

RunConfig Resolve(Method method, const std::optional<std::string>& config_file,
                  const std::map<std::string, std::string>& flags, const EnvLookup& env) {
  RunConfig config;
  config.method = method;
  if (config_file) {
    for (const auto& [key, value] : ReadConfigFile(*config_file)) SetKey(config, key, value);
  }
  if (env) {
    for (const ConfigKey& k : ConfigKeys()) {
      if (auto v = env(EnvName(k.name))) k.set(config, *v);
    }
  }
  for (const auto& [key, value] : flags) SetKey(config, key, value);
  return config;
}

}  // namespace tprnn::cli
