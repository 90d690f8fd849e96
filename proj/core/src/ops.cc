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

#include "tprnn/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "tprnn/errors.h"

namespace tprnn {
namespace {

void CheckMatVec(const Tensor& w, std::size_t v_len, std::size_t out_len,
                 const char* what) {
  if (w.rank() != 2 || w.cols() != v_len || w.rows() != out_len) {
    throw DimensionError(std::string(what) + ": matrix " + w.ShapeString() +
                         " incompatible with vector [" + std::to_string(v_len) +
                         "] -> [" + std::to_string(out_len) + "]");
  }
}

void RequireForward(bool ran, const char* op) {
  if (!ran) {
    throw StateError(std::string(op) + "::Backward called before Forward");
  }
}

}  // namespace

void MatVecAdd(const Tensor& w, std::span<const double> v, std::span<double> out) {
  CheckMatVec(w, v.size(), out.size(), "MatVecAdd");
  const std::size_t n = w.cols();
  const double* row = w.data();
  for (std::size_t i = 0; i < out.size(); ++i, row += n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      s0 += row[j] * v[j];
      s1 += row[j + 1] * v[j + 1];
      s2 += row[j + 2] * v[j + 2];
      s3 += row[j + 3] * v[j + 3];
    }
    for (; j < n; ++j) s0 += row[j] * v[j];
    out[i] += (s0 + s1) + (s2 + s3);
  }
}

void MatTVecAdd(const Tensor& w, std::span<const double> g, std::span<double> out) {
  CheckMatVec(w, out.size(), g.size(), "MatTVecAdd");
  const std::size_t n = w.cols();
  const double* row = w.data();
  double* o = out.data();
  for (std::size_t i = 0; i < g.size(); ++i, row += n) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) o[j] += gi * row[j];
  }
}

void OuterAdd(Tensor& w_grad, std::span<const double> g, std::span<const double> v) {
  CheckMatVec(w_grad, v.size(), g.size(), "OuterAdd");
  const std::size_t n = w_grad.cols();
  double* row = w_grad.data();
  const double* vp = v.data();
  for (std::size_t i = 0; i < g.size(); ++i, row += n) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) row[j] += gi * vp[j];
  }
}

Tensor MatVec(const Tensor& w, const Tensor& v) {
  if (w.rank() != 2 || v.rank() != 1 || w.cols() != v.size()) {
    throw DimensionError("MatVec: " + w.ShapeString() + " * " + v.ShapeString());
  }
  Tensor out(w.rows());
  MatVecAdd(w, v.span(), out.span());
  return out;
}

double Sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor Sigmoid(const Tensor& v) {
  Tensor out = v;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = Sigmoid(v[i]);
  return out;
}

Tensor Tanh(const Tensor& v) {
  Tensor out = v;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

Tensor Hadamard(const Tensor& a, const Tensor& b) {
  CheckSameShape(a, b, "Hadamard");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor Add(const Tensor& a, const Tensor& b) {
  CheckSameShape(a, b, "Add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor Softmax(const Tensor& logits) {
  Tensor out = logits;
  if (out.empty()) return out;
  const double m = *std::max_element(logits.data(), logits.data() + logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= z;
  return out;
}

double SoftmaxXentInto(std::span<const double> logits, std::size_t target,
                       std::span<double> dlogits) {
  if (target >= logits.size()) {
    throw IndexError("SoftmaxXent: target " + std::to_string(target) +
                     " out of range for " + std::to_string(logits.size()) +
                     " classes");
  }
  if (dlogits.size() != logits.size()) {
    throw DimensionError("SoftmaxXent: gradient buffer has wrong length");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    dlogits[i] = std::exp(logits[i] - m);
    z += dlogits[i];
  }
  const double inv_z = 1.0 / z;
  for (double& p : dlogits) p *= inv_z;
  dlogits[target] -= 1.0;
  // -log p_target = log z - (x_target - m)
  return std::log(z) - (logits[target] - m);
}

XentResult SoftmaxXent(const Tensor& logits, std::size_t target) {
  XentResult r;
  r.dlogits = Tensor(logits.size());
  r.loss = SoftmaxXentInto(logits.span(), target, r.dlogits.span());
  return r;
}

Tensor MatVecOp::Forward(const Tensor& w, const Tensor& v) {
  Tensor out = MatVec(w, v);
  w_ = w;
  v_ = v;
  return out;
}

void MatVecOp::Backward(const Tensor& upstream, Grad& dw, Grad& dv) const {
  RequireForward(w_.has_value(), "MatVecOp");
  CheckSameShape(dw, *w_, "MatVecOp::Backward dw");
  CheckSameShape(dv, *v_, "MatVecOp::Backward dv");
  OuterAdd(dw, upstream.span(), v_->span());
  MatTVecAdd(*w_, upstream.span(), dv.span());
}

Tensor SigmoidOp::Forward(const Tensor& x) {
  out_ = Sigmoid(x);
  return *out_;
}

void SigmoidOp::Backward(const Tensor& upstream, Grad& dx) const {
  RequireForward(out_.has_value(), "SigmoidOp");
  CheckSameShape(upstream, *out_, "SigmoidOp::Backward");
  CheckSameShape(dx, *out_, "SigmoidOp::Backward");
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double s = (*out_)[i];
    dx[i] += upstream[i] * s * (1.0 - s);
  }
}

Tensor TanhOp::Forward(const Tensor& x) {
  out_ = Tanh(x);
  return *out_;
}

void TanhOp::Backward(const Tensor& upstream, Grad& dx) const {
  RequireForward(out_.has_value(), "TanhOp");
  CheckSameShape(upstream, *out_, "TanhOp::Backward");
  CheckSameShape(dx, *out_, "TanhOp::Backward");
  for (std::size_t i = 0; i < dx.size(); ++i) {
    const double t = (*out_)[i];
    dx[i] += upstream[i] * (1.0 - t * t);
  }
}

Tensor HadamardOp::Forward(const Tensor& a, const Tensor& b) {
  Tensor out = Hadamard(a, b);
  a_ = a;
  b_ = b;
  return out;
}

void HadamardOp::Backward(const Tensor& upstream, Grad& da, Grad& db) const {
  RequireForward(a_.has_value(), "HadamardOp");
  CheckSameShape(upstream, *a_, "HadamardOp::Backward");
  CheckSameShape(da, *a_, "HadamardOp::Backward da");
  CheckSameShape(db, *b_, "HadamardOp::Backward db");
  for (std::size_t i = 0; i < upstream.size(); ++i) {
    da[i] += upstream[i] * (*b_)[i];
    db[i] += upstream[i] * (*a_)[i];
  }
}

Tensor AddOp::Forward(const Tensor& a, const Tensor& b) {
  Tensor out = Add(a, b);
  ran_ = true;
  return out;
}

void AddOp::Backward(const Tensor& upstream, Grad& da, Grad& db) const {
  RequireForward(ran_, "AddOp");
  AddScaled(da, upstream);
  AddScaled(db, upstream);
}

double SoftmaxXentOp::Forward(const Tensor& logits, std::size_t target) {
  XentResult r = SoftmaxXent(logits, target);
  dlogits_ = std::move(r.dlogits);
  return r.loss;
}

void SoftmaxXentOp::Backward(double upstream, Grad& dlogits) const {
  RequireForward(dlogits_.has_value(), "SoftmaxXentOp");
  AddScaled(dlogits, *dlogits_, upstream);
}

}  // namespace tprnn
