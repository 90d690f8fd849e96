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

#include "tprnn/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tprnn/errors.h"

namespace tprnn {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Length in bytes of the UTF-8 sequence starting at text[i].
std::size_t Utf8Length(std::string_view text, std::size_t i) {
  const auto lead = static_cast<unsigned char>(text[i]);
  std::size_t len;
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0 && lead >= 0xC2) {
    len = 2;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
  } else if ((lead & 0xF8) == 0xF0 && lead <= 0xF4) {
    len = 4;
  } else {
    throw ArgumentError("invalid UTF-8 lead byte at offset " + std::to_string(i));
  }
  if (i + len > text.size()) {
    throw ArgumentError("truncated UTF-8 sequence at offset " + std::to_string(i));
  }
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
      throw ArgumentError("invalid UTF-8 continuation byte at offset " +
                          std::to_string(i + k));
    }
  }
  return len;
}

}  // namespace

std::string_view TokenModeName(TokenMode mode) {
  return mode == TokenMode::kChar ? "char" : "word";
}

TokenMode ParseTokenMode(std::string_view name) {
  if (name == "word") return TokenMode::kWord;
  if (name == "char") return TokenMode::kChar;
  throw ArgumentError("unknown token mode '" + std::string(name) +
                      "' (expected word|char)");
}

std::vector<std::string> Tokenize(std::string_view text, TokenMode mode) {
  std::vector<std::string> out;
  if (mode == TokenMode::kChar) {
    for (std::size_t i = 0; i < text.size();) {
      const std::size_t len = Utf8Length(text, i);
      out.emplace_back(text.substr(i, len));
      i += len;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !IsSpace(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

Vocab::Vocab(TokenMode mode, std::vector<std::string> known)
    : mode_(mode), known_(std::move(known)) {
  for (std::size_t i = 0; i < known_.size(); ++i) {
    if (known_[i] == kUnknown) {
      throw ArgumentError("vocabulary may not list the unknown token explicitly");
    }
    if (!index_.emplace(known_[i], static_cast<TokenId>(i)).second) {
      throw ArgumentError("duplicate vocabulary token '" + known_[i] + "'");
    }
  }
}

Vocab Vocab::FromTokens(TokenMode mode, std::vector<std::string> known) {
  return Vocab(mode, std::move(known));
}

Vocab Vocab::Build(std::string_view text, TokenMode mode,
                   std::optional<std::size_t> max_size) {
  if (text.empty()) throw ArgumentError("build_vocab: empty corpus");
  const std::vector<std::string> tokens = Tokenize(text, mode);
  if (tokens.empty()) throw ArgumentError("build_vocab: corpus has no tokens");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> counts;
  for (const std::string& tok : tokens) {
    if (tok == kUnknown) continue;
    auto [it, inserted] = counts.emplace(tok, 0);
    if (inserted) order.push_back(tok);
    ++it->second;
  }

  if (max_size && order.size() > *max_size) {
    std::vector<std::size_t> rank(order.size());
    std::iota(rank.begin(), rank.end(), 0);
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
      return counts[order[a]] > counts[order[b]];
    });
    rank.resize(*max_size);
    std::sort(rank.begin(), rank.end());
    std::vector<std::string> kept;
    kept.reserve(rank.size());
    for (std::size_t r : rank) kept.push_back(order[r]);
    order = std::move(kept);
  }
  return Vocab(mode, std::move(order));
}

TokenId Vocab::Id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? unknown_id() : it->second;
}

const std::string& Vocab::Token(TokenId id) const {
  if (id == unknown_id()) return unknown_;
  if (id > unknown_id()) {
    throw IndexError("token id " + std::to_string(id) + " out of range");
  }
  return known_[id];
}

TokenStream Vocab::Encode(std::string_view text, StreamRole role) const {
  TokenStream s;
  s.role = role;
  for (const std::string& tok : Tokenize(text, mode_)) s.ids.push_back(Id(tok));
  return s;
}

std::string Vocab::Decode(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (mode_ == TokenMode::kWord && i > 0) out.push_back(' ');
    out += Token(ids[i]);
  }
  return out;
}

std::pair<TokenStream, TokenStream> SplitTrainValid(const TokenStream& all,
                                                    double valid_frac) {
  if (!(valid_frac > 0.0 && valid_frac < 1.0)) {
    throw ArgumentError("valid fraction must lie in (0, 1)");
  }
  const auto n_valid = static_cast<std::size_t>(
      std::floor(static_cast<double>(all.size()) * valid_frac));
  const std::size_t n_train = all.size() - n_valid;
  if (n_valid < 2 || n_train < 2) {
    throw ArgumentError("corpus too small to split: " + std::to_string(all.size()) +
                        " tokens");
  }
  TokenStream train, valid;
  train.role = StreamRole::kTrain;
  valid.role = StreamRole::kValid;
  train.ids.assign(all.ids.begin(), all.ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  valid.ids.assign(all.ids.begin() + static_cast<std::ptrdiff_t>(n_train), all.ids.end());
  return {std::move(train), std::move(valid)};
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open corpus " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tprnn
