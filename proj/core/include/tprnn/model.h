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

// Recurrent language model: an Elman or GRU cell g(x_t, h_{t-1}) over token
// embeddings, and a linear head whose logits feed a softmax cross-entropy.
//
// GRU convention (reset applied before the candidate's recurrent matmul):
//
//   z = sigmoid(W_z e + U_z h + b_z)
//   r = sigmoid(W_r e + U_r h + b_r)
//   c = tanh(W_c e + U_c (r * h) + b_c)
//   h' = (1 - z) * h + z * c
//
// Elman: h' = sigmoid(W_x e + W_h h + b). In both cells e is the embedding
// row of the input token.

#ifndef TPRNN_MODEL_H_
#define TPRNN_MODEL_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tprnn/tensor.h"

namespace tprnn {

using TokenId = std::uint32_t;

enum class CellKind { kElman = 0, kGru = 1 };

std::string_view CellKindName(CellKind cell);
// Accepts "elman" or "gru"; throws ArgumentError otherwise.
CellKind ParseCellKind(std::string_view name);

struct ModelDims {
  std::size_t vocab = 0;
  std::size_t input = 0;
  std::size_t hidden = 0;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

enum class Slot : int {
  kEmbedding,
  kWx, kWh, kB,                      // Elman
  kWz, kWr, kWc, kUz, kUr, kUc,      // GRU
  kBz, kBr, kBc,
  kWy, kBy,                          // head
  kCount
};

// A list of tensors laid out like a ParamSet; used for gradients.
class GradSet {
 public:
  GradSet() = default;
  explicit GradSet(std::vector<Tensor> tensors) : tensors_(std::move(tensors)) {}

  std::size_t size() const { return tensors_.size(); }
  Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  void SetZero();
  // Elementwise this += other; layouts must match.
  void Add(const GradSet& other);
  double MaxAbsDiff(const GradSet& other) const;

  friend bool operator==(const GradSet&, const GradSet&) = default;

 private:
  std::vector<Tensor> tensors_;
};

// Model parameters theta with a mirrored gradient buffer.
class ParamSet {
 public:
  ParamSet(CellKind cell, ModelDims dims, bool use_bias = true);

  CellKind cell() const { return cell_; }
  const ModelDims& dims() const { return dims_; }
  bool use_bias() const { return use_bias_; }

  std::size_t num_tensors() const { return tensors_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  Tensor& tensor(std::size_t i) { return tensors_[i]; }
  const Tensor& tensor(std::size_t i) const { return tensors_[i]; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  bool has(Slot s) const { return slot_index_[static_cast<int>(s)] >= 0; }
  std::size_t index(Slot s) const;
  Tensor& operator[](Slot s) { return tensors_[index(s)]; }
  const Tensor& operator[](Slot s) const { return tensors_[index(s)]; }

  GradSet& grads() { return grads_; }
  const GradSet& grads() const { return grads_; }
  void ZeroGrad() { grads_.SetZero(); }
  // A fresh zero buffer with this set's layout, for per-worker accumulation.
  GradSet ZeroGradSet() const;

  // Weights uniform in [-scale, scale], biases zero. Each tensor draws from
  // its own stream derived from (seed, tensor name).
  void InitRandom(std::uint64_t seed, double scale);
  std::size_t NumScalars() const;

  // Index of the tensor by name, or num_tensors() if absent.
  std::size_t Find(std::string_view name) const;

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    return a.cell_ == b.cell_ && a.dims_ == b.dims_ &&
           a.use_bias_ == b.use_bias_ && a.names_ == b.names_ &&
           a.tensors_ == b.tensors_;
  }

 private:
  void AddTensor(Slot slot, std::string name, Tensor t);

  CellKind cell_;
  ModelDims dims_;
  bool use_bias_;
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::array<int, static_cast<int>(Slot::kCount)> slot_index_{};
  GradSet grads_;
};

// Saved activations of one executed cell step.
struct StepContext {
  TokenId token = 0;
  Tensor h_prev;
  Tensor h;
  // GRU only.
  Tensor z;
  Tensor r;
  Tensor c;
  Tensor rh;
};

// One recurrence step; fills ctx (reusing its buffers) and returns ctx.h.
const Tensor& CellForward(const ParamSet& theta, TokenId token,
                          std::span<const double> h_prev, StepContext& ctx);
StepContext CellForward(const ParamSet& theta, TokenId token, const Tensor& h_prev);

// Given dL/dh' for the step in ctx, accumulates dL/dtheta (skipped when
// dtheta is null) and dL/dh_prev.
void CellBackward(const ParamSet& theta, const StepContext& ctx,
                  std::span<const double> dh, GradSet* dtheta,
                  std::span<double> dh_prev);

// logits = W_y h + b_y
Tensor Predict(const ParamSet& theta, const Tensor& h);
void PredictInto(const ParamSet& theta, std::span<const double> h,
                 std::span<double> logits);
void PredictBackward(const ParamSet& theta, std::span<const double> h,
                     std::span<const double> dlogits, GradSet* dtheta,
                     std::span<double> dh);

// Forward pass over tokens t_0..t_n that keeps what backward needs.
// Step i consumes t_i and is scored against t_{i+1}; the loss is the sum of
// the n per-step cross-entropies.
class Unroll {
 public:
  double Forward(const ParamSet& theta, std::span<const TokenId> tokens,
                 std::span<const double> h_init);

  std::size_t steps() const { return n_; }
  const Tensor& final_state() const;
  const StepContext& step(std::size_t i) const { return steps_[i]; }

  // dh_final is an extra upstream gradient on the final state (may be
  // empty). Accumulates into dtheta (if non-null) and dh_init. With
  // with_prediction false the per-step losses are left out, so only dh_final
  // is propagated.
  void Backward(const ParamSet& theta, std::span<const double> dh_final,
                GradSet* dtheta, std::span<double> dh_init,
                bool with_prediction = true) const;

 private:
  std::vector<StepContext> steps_;
  std::vector<Tensor> dlogits_;
  std::size_t n_ = 0;
  bool ran_ = false;
};

// Loss of the same n-step unroll without saving contexts. Writes the final
// state to h_final when non-null.
double ForwardLoss(const ParamSet& theta, std::span<const TokenId> tokens,
                   std::span<const double> h_init, Tensor* h_final = nullptr);

struct SeqResult {
  double loss = 0.0;
  Tensor h_final;
  Tensor dh_init;
};

// Sum of next-token losses over tokens, the accumulated theta gradient, and
// the gradient with respect to h_init. dh_init is always computed;
// treat_h_init_as_constant only records whether the caller will consume it.
SeqResult SeqForwardBackward(const ParamSet& theta, std::span<const TokenId> tokens,
                             const Tensor& h_init, GradSet& dtheta,
                             bool treat_h_init_as_constant = true);

}  // namespace tprnn

#endif  // TPRNN_MODEL_H_
