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

#include "tprnn/eval.h"

#include <cmath>
#include <vector>

#include "tprnn/errors.h"

namespace tprnn {

EvalResult Evaluate(const ParamSet& theta, std::span<const TokenId> stream) {
  if (stream.size() < 2) {
    throw ArgumentError("evaluate: stream needs at least two tokens");
  }
  const Tensor h0(theta.dims().hidden);
  const double total = ForwardLoss(theta, stream, h0.span());
  EvalResult r;
  r.tokens = stream.size() - 1;
  r.mean_nll = total / static_cast<double>(r.tokens);
  r.perplexity = std::exp(r.mean_nll);
  return r;
}

double UnigramPerplexity(std::span<const TokenId> train,
                         std::span<const TokenId> valid, std::size_t vocab) {
  if (valid.size() < 2) throw ArgumentError("unigram: validation stream too short");
  std::vector<double> counts(vocab, 1.0);
  for (TokenId t : train) {
    if (t >= vocab) throw IndexError("unigram: token id out of range");
    counts[t] += 1.0;
  }
  const double denom = static_cast<double>(train.size() + vocab);
  double nll = 0.0;
  for (std::size_t i = 1; i < valid.size(); ++i) {
    if (valid[i] >= vocab) throw IndexError("unigram: token id out of range");
    nll -= std::log(counts[valid[i]] / denom);
  }
  return std::exp(nll / static_cast<double>(valid.size() - 1));
}

}  // namespace tprnn
