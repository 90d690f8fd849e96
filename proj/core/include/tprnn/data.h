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

#ifndef TPRNN_DATA_H_
#define TPRNN_DATA_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tprnn/model.h"

namespace tprnn {

enum class TokenMode { kWord, kChar };

std::string_view TokenModeName(TokenMode mode);
TokenMode ParseTokenMode(std::string_view name);

enum class StreamRole { kTrain, kValid };

struct TokenStream {
  std::vector<TokenId> ids;
  StreamRole role = StreamRole::kTrain;

  std::size_t size() const { return ids.size(); }
  std::span<const TokenId> span() const { return ids; }
};

// Word mode splits on ASCII whitespace; char mode yields one token per
// Unicode scalar value (UTF-8 encoded). Throws ArgumentError on invalid UTF-8.
std::vector<std::string> Tokenize(std::string_view text, TokenMode mode);

// Token <-> id map. Known tokens take ids 0..known_size()-1 in order of first
// occurrence; the unknown token is always reserved as the last id.
class Vocab {
 public:
  static constexpr std::string_view kUnknown = "<unk>";

  // With max_size, keeps the max_size most frequent tokens (frequency ties
  // broken by first occurrence); the rest map to the unknown id. A literal
  // "<unk>" in the corpus is the unknown token, never a known one.
  static Vocab Build(std::string_view text, TokenMode mode,
                     std::optional<std::size_t> max_size = std::nullopt);
  static Vocab FromTokens(TokenMode mode, std::vector<std::string> known);

  TokenMode mode() const { return mode_; }
  std::size_t size() const { return known_.size() + 1; }
  std::size_t known_size() const { return known_.size(); }
  TokenId unknown_id() const { return static_cast<TokenId>(known_.size()); }
  const std::vector<std::string>& known_tokens() const { return known_; }

  TokenId Id(std::string_view token) const;
  const std::string& Token(TokenId id) const;

  TokenStream Encode(std::string_view text, StreamRole role = StreamRole::kTrain) const;
  // Word mode joins with single spaces; char mode concatenates.
  std::string Decode(std::span<const TokenId> ids) const;

 private:
  Vocab(TokenMode mode, std::vector<std::string> known);

  TokenMode mode_;
  std::vector<std::string> known_;
  std::unordered_map<std::string, TokenId> index_;
  std::string unknown_{kUnknown};
};

// Splits by position: the final valid_frac of the stream is validation.
// Both halves must hold at least two tokens.
std::pair<TokenStream, TokenStream> SplitTrainValid(const TokenStream& all,
                                                    double valid_frac);

std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace tprnn

#endif  // TPRNN_DATA_H_
