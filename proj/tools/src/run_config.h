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


// Run configuration for the command-line tool.
//
// Every setting is a named key with a string form. Values are layered as
// defaults < config file < TPRNN_* environment variables < flags, and the
// fully resolved key set is what a run manifest records.

#ifndef TPRNN_TOOLS_RUN_CONFIG_H_
#define TPRNN_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tprnn/btprop.h"
#include "tprnn/bptt.h"
#include "tprnn/data.h"
#include "tprnn/model.h"

namespace tprnn::cli {

enum class Method { kBptt, kBtprop };

std::string_view MethodName(Method method);
Method ParseMethod(std::string_view name);

struct RunConfig {
  Method method = Method::kBptt;

  std::string corpus;
  TokenMode tokens = TokenMode::kChar;
  double valid_frac = 0.05;
  std::size_t max_vocab = 0;   // 0 keeps every token
  std::size_t max_tokens = 0;  // 0 uses the whole corpus
  std::string vocab;           // optional vocab file; built from the corpus otherwise

  CellKind cell = CellKind::kGru;
  std::size_t hidden = 64;
  std::size_t embed = 0;  // 0 = same as hidden
  double init_scale = 0.1;
  std::uint64_t seed = 1;

  std::size_t epochs = 5;
  Regime regime = Regime::kMinibatch;
  OptimizerKind optimizer = OptimizerKind::kAdagrad;
  double lr = 0.1;
  std::size_t window = 10;

  std::size_t block = 10;
  Schedule schedule = Schedule::kAdmm;
  double lambda = 0.1;
  double alpha_u = 0.1;
  double lr_h = 0.1;
  std::size_t h_steps = 1;
  std::size_t theta_steps = 1;
  std::size_t minibatch_blocks = 4;
  OptimizerKind h_optimizer = OptimizerKind::kSgd;
  bool h_reinit = false;
  std::size_t threads = 1;

  std::string metrics;
  std::string checkpoint;
  std::string manifest;

  BpttConfig ToBptt() const;
  TPropConfig ToTProp() const;
  // Throws ConfigError on inconsistent settings.
  void Validate() const;
};

enum class KeyScope { kCommon, kBptt, kBtprop };

struct ConfigKey {
  std::string name;  // flag spelling, e.g. "lr-h"
  std::string help;
  KeyScope scope;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigKey>& ConfigKeys();
const ConfigKey* FindKey(std::string_view name);
bool KeyApplies(const ConfigKey& key, Method method);

// "lr_h" and "LR-H" both name the key "lr-h".
std::string NormalizeKey(std::string_view name);
// "lr-h" -> "TPRNN_LR_H".
std::string EnvName(std::string_view key);

// Sets one key; throws ConfigError for unknown keys or unparsable values.
void SetKey(RunConfig& config, std::string_view key, std::string_view value);

// key=value lines; '#' starts a comment; blank lines are ignored.
std::map<std::string, std::string> ParseConfigText(std::string_view text);
std::map<std::string, std::string> ReadConfigFile(const std::string& path);

// Every key that applies to the config's method, in table order.
std::vector<std::pair<std::string, std::string>> Serialize(const RunConfig& config);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
std::optional<std::string> ProcessEnv(const std::string& name);

// Layers config file, environment and flags over the defaults for method.
RunConfig Resolve(Method method, const std::optional<std::string>& config_file,
                  const std::map<std::string, std::string>& flags,
                  const EnvLookup& env = ProcessEnv);

}  // namespace tprnn::cli

#endif  // TPRNN_TOOLS_RUN_CONFIG_H_
