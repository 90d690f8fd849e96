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

#include "tprnn/bptt.h"

#include <chrono>
#include <string>

#include "tprnn/errors.h"
#include "tprnn/eval.h"

namespace tprnn {

std::string_view RegimeName(Regime regime) {
  return regime == Regime::kBatch ? "batch" : "minibatch";
}

Regime ParseRegime(std::string_view name) {
  if (name == "batch") return Regime::kBatch;
  if (name == "minibatch") return Regime::kMinibatch;
  throw ArgumentError("unknown regime '" + std::string(name) +
                      "' (expected batch|minibatch)");
}

std::vector<Window> PlanWindows(std::size_t stream_tokens, std::size_t window) {
  if (window == 0) throw ConfigError("window size must be positive");
  std::vector<Window> out;
  if (stream_tokens < 2) return out;
  const std::size_t steps = stream_tokens - 1;
  for (std::size_t s = 0; s < steps; s += window) {
    out.push_back({s, std::min(window, steps - s)});
  }
  return out;
}

WindowResult BpttWindowGrad(const ParamSet& theta, std::span<const TokenId> window_tokens,
                            const Tensor& h_carry, GradSet& dtheta) {
  if (window_tokens.size() < 2) {
    throw ArgumentError("BPTT window needs at least two tokens");
  }
  SeqResult r = SeqForwardBackward(theta, window_tokens, h_carry, dtheta,
                                   /*treat_h_init_as_constant=*/true);
  return {r.loss, std::move(r.h_final)};
}

double TruncatedGradient(const ParamSet& theta, std::span<const TokenId> tokens,
                         std::size_t window, const Tensor& h_start, GradSet& dtheta,
                         Tensor* h_end) {
  Tensor carry = h_start;
  double loss = 0.0;
  for (const Window& w : PlanWindows(tokens.size(), window)) {
    WindowResult r = BpttWindowGrad(theta, WindowTokens(tokens, w), carry, dtheta);
    loss += r.loss;
    carry = std::move(r.h_out);
  }
  if (h_end != nullptr) *h_end = std::move(carry);
  return loss;
}

void BpttConfig::Validate() const {
  if (window == 0) throw ConfigError("BPTT window K must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
}

std::vector<EpochMetrics> TrainBptt(ParamSet& theta, const TokenStream& train,
                                    const TokenStream& valid, const BpttConfig& config,
                                    const MetricsCallback& on_epoch) {
  config.Validate();
  if (train.size() < 2) throw ArgumentError("training stream needs at least two tokens");
  const std::vector<Window> windows = PlanWindows(train.size(), config.window);
  const double scored = static_cast<double>(train.size() - 1);
  Optimizer opt(config.optimizer, config.lr);
  std::vector<EpochMetrics> history;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Tensor carry(theta.dims().hidden);
    double loss = 0.0;
    theta.ZeroGrad();
    for (const Window& w : windows) {
      WindowResult r = BpttWindowGrad(theta, WindowTokens(train.span(), w), carry,
                                      theta.grads());
      loss += r.loss;
      carry = std::move(r.h_out);
      if (config.regime == Regime::kMinibatch) {
        opt.Step(theta.tensors(), theta.grads().tensors());
        theta.ZeroGrad();
      }
    }
    if (config.regime == Regime::kBatch) {
      opt.Step(theta.tensors(), theta.grads().tensors());
      theta.ZeroGrad();
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss / scored;
    m.valid_ppl = Evaluate(theta, valid.span()).perplexity;
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return history;
}

}  // namespace tprnn
