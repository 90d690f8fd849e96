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


#include <string>

#include "gtest/gtest.h"
#include "tprnn/data.h"
#include "tprnn/errors.h"

namespace tprnn {
namespace {

TEST(TokenizeTest, WordAndCharModes) {
  EXPECT_EQ(Tokenize("  a b\n\ta ", TokenMode::kWord),
            (std::vector<std::string>{"a", "b", "a"}));
  EXPECT_EQ(Tokenize("ab", TokenMode::kChar), (std::vector<std::string>{"a", "b"}));
  // Multi-byte scalar values stay whole.
  EXPECT_EQ(Tokenize("a\xC3\xA9\xE2\x82\xAC", TokenMode::kChar),
            (std::vector<std::string>{"a", "\xC3\xA9", "\xE2\x82\xAC"}));
  EXPECT_THROW(Tokenize("a\xC3", TokenMode::kChar), ArgumentError);
  EXPECT_THROW(Tokenize("\xFF", TokenMode::kChar), ArgumentError);
}

TEST(VocabTest, WordModeFirstOccurrenceIds) {
  const Vocab v = Vocab::Build("a b a", TokenMode::kWord);
  EXPECT_EQ(v.known_size(), 2u);
  EXPECT_EQ(v.size(), 3u);  // plus the reserved unknown id
  EXPECT_EQ(v.Id("a"), 0u);
  EXPECT_EQ(v.Id("b"), 1u);
  EXPECT_EQ(v.Id("zzz"), v.unknown_id());
  EXPECT_EQ(v.Token(v.unknown_id()), "<unk>");
}

TEST(VocabTest, CharMode) {
  const Vocab v = Vocab::Build("ab", TokenMode::kChar);
  EXPECT_EQ(v.known_size(), 2u);
  EXPECT_EQ(v.Encode("ba").ids, (std::vector<TokenId>{1, 0}));
}

TEST(VocabTest, EmptyCorpusThrows) {
  EXPECT_THROW(Vocab::Build("", TokenMode::kWord), ArgumentError);
  EXPECT_THROW(Vocab::Build(" \n ", TokenMode::kWord), ArgumentError);
}

TEST(VocabTest, LiteralUnkMapsToUnknownId) {
  const Vocab v = Vocab::Build("the <unk> cat <unk> sat", TokenMode::kWord);
  EXPECT_EQ(v.known_size(), 3u);
  const TokenStream s = v.Encode("the <unk> dog");
  EXPECT_EQ(s.ids, (std::vector<TokenId>{0, v.unknown_id(), v.unknown_id()}));
}

TEST(VocabTest, MaxSizeKeepsMostFrequent) {
  const Vocab v = Vocab::Build("c a b b a b d", TokenMode::kWord, 2);
  EXPECT_EQ(v.known_size(), 2u);
  // First-occurrence order among the kept tokens: a before b.
  EXPECT_EQ(v.Id("a"), 0u);
  EXPECT_EQ(v.Id("b"), 1u);
  EXPECT_EQ(v.Id("c"), v.unknown_id());
  // Frequency ties are broken by first occurrence.
  const Vocab t = Vocab::Build("x y z", TokenMode::kWord, 2);
  EXPECT_EQ(t.Id("x"), 0u);
  EXPECT_EQ(t.Id("y"), 1u);
  EXPECT_EQ(t.Id("z"), t.unknown_id());
}

TEST(VocabTest, EncodeDecode) {
  const Vocab v = Vocab::Build("a b a", TokenMode::kWord);
  const TokenStream s = v.Encode("a b a");
  EXPECT_EQ(s.ids, (std::vector<TokenId>{0, 1, 0}));
  EXPECT_EQ(v.Decode(s.ids), "a b a");
  EXPECT_EQ(v.Decode(v.Encode("a\n  b\ta").ids), "a b a");
  const Vocab c = Vocab::Build("hello, world", TokenMode::kChar);
  EXPECT_EQ(c.Decode(c.Encode("hello, world").ids), "hello, world");
}

TEST(VocabTest, StreamLengthEqualsTokenCount) {
  const std::string text = "one two  three\nfour five\n\nsix";
  std::size_t words = 0;
  bool in_word = false;
  for (char ch : text) {
    const bool space = ch == ' ' || ch == '\n' || ch == '\t';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  EXPECT_EQ(Vocab::Build(text, TokenMode::kWord).Encode(text).size(), words);
  EXPECT_EQ(Vocab::Build(text, TokenMode::kChar).Encode(text).size(), text.size());
}

TEST(VocabTest, DeterministicAndInRange) {
  const std::string text = "the quick brown fox jumps over the lazy dog; the end.";
  for (TokenMode mode : {TokenMode::kWord, TokenMode::kChar}) {
    const Vocab a = Vocab::Build(text, mode), b = Vocab::Build(text, mode);
    EXPECT_EQ(a.known_tokens(), b.known_tokens());
    const TokenStream s = a.Encode(text);
    EXPECT_EQ(s.ids, b.Encode(text).ids);
    for (TokenId id : s.ids) EXPECT_LT(id, a.size());
  }
}

TEST(VocabTest, FromTokensRejectsDuplicates) {
  EXPECT_THROW(Vocab::FromTokens(TokenMode::kWord, {"a", "a"}), ArgumentError);
  const Vocab v = Vocab::FromTokens(TokenMode::kWord, {"x", "y"});
  EXPECT_EQ(v.Id("y"), 1u);
}

TEST(SplitTest, ByPosition) {
  TokenStream all;
  for (TokenId i = 0; i < 100; ++i) all.ids.push_back(i);
  const auto [train, valid] = SplitTrainValid(all, 0.05);
  EXPECT_EQ(train.size(), 95u);
  EXPECT_EQ(valid.size(), 5u);
  EXPECT_EQ(valid.ids.front(), 95u);
  EXPECT_EQ(train.role, StreamRole::kTrain);
  EXPECT_EQ(valid.role, StreamRole::kValid);
  EXPECT_THROW(SplitTrainValid(all, 0.01), ArgumentError);
  EXPECT_THROW(SplitTrainValid(all, 1.5), ArgumentError);
}

TEST(TokenModeTest, Parse) {
  EXPECT_EQ(ParseTokenMode("word"), TokenMode::kWord);
  EXPECT_EQ(ParseTokenMode(TokenModeName(TokenMode::kChar)), TokenMode::kChar);
  EXPECT_THROW(ParseTokenMode("bpe"), ArgumentError);
}

}  // namespace
}  // namespace tprnn
