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

// Truncated back-propagation through time.
//
// A stream of n tokens has n - 1 prediction steps. Window w covers the K
// steps starting at position s = w * K: it consumes tokens s..s+K-1 and is
// scored against s+1..s+K, so consecutive windows share one boundary token
// (the last target of one is the first input of the next) while their steps
// do not overlap. The state after a window's last step is carried into the
// next window as a constant.

#ifndef TPRNN_BPTT_H_
#define TPRNN_BPTT_H_

#include <cstddef>
#include <span>
#include <vector>

#include "tprnn/data.h"
#include "tprnn/metrics.h"
#include "tprnn/model.h"
#include "tprnn/optim.h"

namespace tprnn {

struct Window {
  std::size_t start = 0;  // first input position
  std::size_t steps = 0;  // tokens [start, start + steps] are involved
};

// Windows of `window` steps covering all n - 1 steps; the final window may be
// shorter but always has at least one step.
std::vector<Window> PlanWindows(std::size_t stream_tokens, std::size_t window);

inline std::span<const TokenId> WindowTokens(std::span<const TokenId> stream,
                                             const Window& w) {
  return stream.subspan(w.start, w.steps + 1);
}

struct WindowResult {
  double loss = 0.0;
  Tensor h_out;  // carry for the next window
};

// Loss and theta gradient of one window with h_carry held constant.
WindowResult BpttWindowGrad(const ParamSet& theta, std::span<const TokenId> window_tokens,
                            const Tensor& h_carry, GradSet& dtheta);

// Sum of window gradients over `tokens` at fixed theta, starting from
// h_start. Returns the summed loss; the final carry goes to h_end if non-null.
double TruncatedGradient(const ParamSet& theta, std::span<const TokenId> tokens,
                         std::size_t window, const Tensor& h_start, GradSet& dtheta,
                         Tensor* h_end = nullptr);

struct BpttConfig {
  std::size_t window = 10;
  OptimizerKind optimizer = OptimizerKind::kAdagrad;
  double lr = 0.1;
  std::size_t epochs = 5;
  Regime regime = Regime::kMinibatch;

  // Throws ConfigError on an unusable configuration.
  void Validate() const;
};

// Minibatch: one optimizer step per window, carry passed along the stream.
// Batch: gradients of all windows summed, one step per epoch. The carry is
// reset to zero at the start of every epoch.
std::vector<EpochMetrics> TrainBptt(ParamSet& theta, const TokenStream& train,
                                    const TokenStream& valid, const BpttConfig& config,
                                    const MetricsCallback& on_epoch = {});

}  // namespace tprnn

#endif  // TPRNN_BPTT_H_
