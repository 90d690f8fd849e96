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

#ifndef TPRNN_EVAL_H_
#define TPRNN_EVAL_H_

#include <cstddef>
#include <span>

#include "tprnn/model.h"

namespace tprnn {

struct EvalResult {
  std::size_t tokens = 0;  // number of scored (next-token) predictions
  double mean_nll = 0.0;   // nats per token
  double perplexity = 0.0;
};

// Frozen-parameter perplexity: one sequential pass of the plain recurrence
// from h = 0 over the whole stream, no truncation, no free variables.
EvalResult Evaluate(const ParamSet& theta, std::span<const TokenId> stream);

// Perplexity of the add-one smoothed unigram model fit on train, scored on
// the same positions Evaluate scores (valid[1..]).
double UnigramPerplexity(std::span<const TokenId> train,
                         std::span<const TokenId> valid, std::size_t vocab);

}  // namespace tprnn

#endif  // TPRNN_EVAL_H_
