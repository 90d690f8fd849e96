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

#ifndef TPRNN_METRICS_H_
#define TPRNN_METRICS_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>

namespace tprnn {

enum class Regime { kBatch, kMinibatch };

std::string_view RegimeName(Regime regime);
Regime ParseRegime(std::string_view name);

// One record per epoch (minibatch) or outer iteration (batch).
struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;  // nats per scored token
  double valid_ppl = 0.0;
  // Mean boundary residual ||h - h_hat||_2; target-propagation runs only.
  std::optional<double> residual;
  std::size_t backtracks = 0;  // H-steps retried at half rate
  double seconds = 0.0;        // wall clock for this epoch
};

using MetricsCallback = std::function<void(const EpochMetrics&)>;

}  // namespace tprnn

#endif  // TPRNN_METRICS_H_
