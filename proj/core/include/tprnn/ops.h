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

// Forward kernels and their analytic vector-Jacobian products.
//
// Two layers live here. The span kernels (MatVecAdd, OuterAdd, ...) are the
// raw loops the recurrent cells are written against. The *Op classes wrap
// each differentiable operation with its saved forward context so that every
// backward rule can be exercised and finite-difference checked in isolation.
// Backward calls accumulate into their output gradients.

#ifndef TPRNN_OPS_H_
#define TPRNN_OPS_H_

#include <cstddef>
#include <optional>
#include <span>

#include "tprnn/tensor.h"

namespace tprnn {

// out += W * v
void MatVecAdd(const Tensor& w, std::span<const double> v, std::span<double> out);
// out += W^T * g
void MatTVecAdd(const Tensor& w, std::span<const double> g, std::span<double> out);
// W_grad += g * v^T
void OuterAdd(Tensor& w_grad, std::span<const double> g, std::span<const double> v);

Tensor MatVec(const Tensor& w, const Tensor& v);

// Logistic function, evaluated through exp(-|x|) so neither branch overflows.
double Sigmoid(double x);

Tensor Sigmoid(const Tensor& v);
Tensor Tanh(const Tensor& v);
Tensor Hadamard(const Tensor& a, const Tensor& b);
Tensor Add(const Tensor& a, const Tensor& b);

Tensor Softmax(const Tensor& logits);

struct XentResult {
  double loss = 0.0;
  Tensor dlogits;
};

// -log softmax(logits)[target] and its gradient softmax(logits) - onehot.
XentResult SoftmaxXent(const Tensor& logits, std::size_t target);

// Allocation-free variant for inner loops; writes the gradient to dlogits.
double SoftmaxXentInto(std::span<const double> logits, std::size_t target,
                       std::span<double> dlogits);

class MatVecOp {
 public:
  Tensor Forward(const Tensor& w, const Tensor& v);
  void Backward(const Tensor& upstream, Grad& dw, Grad& dv) const;

 private:
  std::optional<Tensor> w_;
  std::optional<Tensor> v_;
};

class SigmoidOp {
 public:
  Tensor Forward(const Tensor& x);
  void Backward(const Tensor& upstream, Grad& dx) const;

 private:
  std::optional<Tensor> out_;
};

class TanhOp {
 public:
  Tensor Forward(const Tensor& x);
  void Backward(const Tensor& upstream, Grad& dx) const;

 private:
  std::optional<Tensor> out_;
};

class HadamardOp {
 public:
  Tensor Forward(const Tensor& a, const Tensor& b);
  void Backward(const Tensor& upstream, Grad& da, Grad& db) const;

 private:
  std::optional<Tensor> a_;
  std::optional<Tensor> b_;
};

class AddOp {
 public:
  Tensor Forward(const Tensor& a, const Tensor& b);
  void Backward(const Tensor& upstream, Grad& da, Grad& db) const;

 private:
  bool ran_ = false;
};

class SoftmaxXentOp {
 public:
  double Forward(const Tensor& logits, std::size_t target);
  // upstream is d(objective)/d(loss).
  void Backward(double upstream, Grad& dlogits) const;

 private:
  std::optional<Tensor> dlogits_;
};

}  // namespace tprnn

#endif  // TPRNN_OPS_H_
