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


#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include "gtest/gtest.h"
#include "run_config.h"
#include "tprnn/errors.h"

namespace tprnn::cli {
namespace {

EnvLookup FakeEnv(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

EnvLookup NoEnv() { return FakeEnv({}); }

std::string WriteTemp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path, std::ios::binary) << text;
  return path.string();
}

TEST(ConfigKeyTest, NamesAndLookup) {
  EXPECT_EQ(NormalizeKey("LR_H"), "lr-h");
  EXPECT_EQ(NormalizeKey("minibatch_blocks"), "minibatch-blocks");
  EXPECT_EQ(EnvName("lr-h"), "TPRNN_LR_H");
  EXPECT_EQ(EnvName("alpha-u"), "TPRNN_ALPHA_U");
  ASSERT_NE(FindKey("alpha_u"), nullptr);
  EXPECT_EQ(FindKey("alpha_u")->name, "alpha-u");
  EXPECT_EQ(FindKey("no-such-key"), nullptr);
  EXPECT_FALSE(KeyApplies(*FindKey("lambda"), Method::kBptt));
  EXPECT_TRUE(KeyApplies(*FindKey("lambda"), Method::kBtprop));
  EXPECT_FALSE(KeyApplies(*FindKey("window"), Method::kBtprop));
  EXPECT_TRUE(KeyApplies(*FindKey("hidden"), Method::kBptt));
}

TEST(ConfigKeyTest, SetKeyParsesAndRejects) {
  RunConfig c;
  SetKey(c, "lr", "0.25");
  SetKey(c, "cell", "elman");
  SetKey(c, "h_reinit", "yes");
  SetKey(c, "schedule", "pm");
  EXPECT_EQ(c.lr, 0.25);
  EXPECT_EQ(c.cell, CellKind::kElman);
  EXPECT_TRUE(c.h_reinit);
  EXPECT_EQ(c.schedule, Schedule::kPm);
  EXPECT_THROW(SetKey(c, "lr", "fast"), ConfigError);
  EXPECT_THROW(SetKey(c, "lr", "inf"), ConfigError);
  EXPECT_THROW(SetKey(c, "hidden", "-3"), ConfigError);
  EXPECT_THROW(SetKey(c, "hidden", "12abc"), ConfigError);
  EXPECT_THROW(SetKey(c, "cell", "lstm"), ConfigError);
  EXPECT_THROW(SetKey(c, "h-reinit", "maybe"), ConfigError);
  EXPECT_THROW(SetKey(c, "colour", "red"), ConfigError);
}

TEST(ConfigFileTest, ParsesCommentsAndWhitespace) {
  const auto kv = ParseConfigText(
      "# header\n"
      "lr = 0.5   # trailing comment\n"
      "\n"
      "  LR_H=0.01\n"
      "cell=gru\n");
  EXPECT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv.at("lr"), "0.5");
  EXPECT_EQ(kv.at("lr-h"), "0.01");
  EXPECT_EQ(kv.at("cell"), "gru");
  EXPECT_THROW(ParseConfigText("lr 0.5\n"), ConfigError);
  EXPECT_THROW(ParseConfigText("=3\n"), ConfigError);
  EXPECT_THROW(ReadConfigFile("/nonexistent/tprnn.conf"), ConfigError);
}

TEST(ResolveTest, Defaults) {
  const RunConfig c = Resolve(Method::kBtprop, std::nullopt, {}, NoEnv());
  EXPECT_EQ(c.method, Method::kBtprop);
  EXPECT_EQ(c.cell, CellKind::kGru);
  EXPECT_EQ(c.hidden, 64u);
  EXPECT_EQ(c.embed, 0u);
  EXPECT_EQ(c.block, 10u);
  EXPECT_EQ(c.schedule, Schedule::kAdmm);
  EXPECT_EQ(c.lambda, 0.1);
  EXPECT_EQ(c.h_steps, 1u);
  EXPECT_EQ(c.regime, Regime::kMinibatch);
  EXPECT_EQ(c.optimizer, OptimizerKind::kAdagrad);
}

TEST(ResolveTest, PrecedenceFileEnvFlags) {
  const std::string file = WriteTemp("tprnn_precedence.conf",
                                     "lr=0.5\nhidden=16\nlambda=1\nseed=3\n");
  const auto env = FakeEnv({{"TPRNN_HIDDEN", "24"}, {"TPRNN_LAMBDA", "0.01"}});
  const RunConfig c = Resolve(Method::kBtprop, file, {{"lambda", "0.3"}}, env);
  EXPECT_EQ(c.lr, 0.5);        // file over default
  EXPECT_EQ(c.seed, 3u);       // file over default
  EXPECT_EQ(c.hidden, 24u);    // env over file
  EXPECT_EQ(c.lambda, 0.3);    // flag over env
  EXPECT_EQ(c.window, 10u);    // untouched default
  std::filesystem::remove(file);
}

TEST(ResolveTest, BadEnvValueIsConfigError) {
  EXPECT_THROW(Resolve(Method::kBptt, std::nullopt, {}, FakeEnv({{"TPRNN_LR", "x"}})),
               ConfigError);
}

TEST(ValidateTest, RejectsInconsistentSettings) {
  RunConfig c = Resolve(Method::kBtprop, std::nullopt, {{"corpus", "x.txt"}}, NoEnv());
  EXPECT_NO_THROW(c.Validate());
  auto bad = [&](const char* key, const char* value) {
    RunConfig x = c;
    SetKey(x, key, value);
    EXPECT_THROW(x.Validate(), ConfigError) << key << "=" << value;
  };
  bad("lr", "-0.1");
  bad("lambda", "-1");
  bad("block", "0");
  bad("minibatch-blocks", "0");
  bad("epochs", "0");
  bad("hidden", "0");
  bad("threads", "0");
  bad("valid-frac", "1");
  RunConfig none = c;
  none.corpus.clear();
  EXPECT_THROW(none.Validate(), ConfigError);
}

TEST(ValidateTest, ConversionCarriesFields) {
  const RunConfig c = Resolve(
      Method::kBtprop, std::nullopt,
      {{"lambda", "0.5"}, {"alpha-u", "0.2"}, {"lr-h", "0.03"}, {"lr", "0.07"},
       {"h-steps", "5"}, {"block", "7"}, {"schedule", "alm"}, {"regime", "batch"},
       {"minibatch-blocks", "3"}, {"epochs", "9"}, {"h-reinit", "true"}, {"window", "4"}},
      NoEnv());
  const TPropConfig t = c.ToTProp();
  EXPECT_EQ(t.lambda, 0.5);
  EXPECT_EQ(t.alpha_u, 0.2);
  EXPECT_EQ(t.lr_h, 0.03);
  EXPECT_EQ(t.lr_theta, 0.07);
  EXPECT_EQ(t.h_steps, 5u);
  EXPECT_EQ(t.block_size, 7u);
  EXPECT_EQ(t.schedule, Schedule::kAlm);
  EXPECT_EQ(t.regime, Regime::kBatch);
  EXPECT_EQ(t.minibatch_blocks, 3u);
  EXPECT_EQ(t.epochs, 9u);
  EXPECT_TRUE(t.h_reinit_each_epoch);
  const BpttConfig b = c.ToBptt();
  EXPECT_EQ(b.window, 4u);
  EXPECT_EQ(b.lr, 0.07);
  EXPECT_EQ(b.regime, Regime::kBatch);
}

TEST(SerializeTest, RoundTripsThroughSetKey) {
  RunConfig c = Resolve(Method::kBtprop, std::nullopt,
                        {{"lr-h", "0.001"}, {"lambda", "0.1"}, {"corpus", "a b.txt"}},
                        NoEnv());
  RunConfig back;
  back.method = Method::kBtprop;
  for (const auto& [k, v] : Serialize(c)) SetKey(back, k, v);
  EXPECT_EQ(Serialize(back), Serialize(c));
  EXPECT_EQ(back.lr_h, 0.001);
  // Method-specific keys only appear for their method.
  for (const auto& [k, v] : Serialize(c)) EXPECT_NE(k, "window");
}

}  // namespace
}  // namespace tprnn::cli
