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

#include "tprnn/model.h"

#include <algorithm>
#include <cmath>

#include "tprnn/errors.h"
#include "tprnn/ops.h"
#include "tprnn/random.h"

namespace tprnn {
namespace {

bool IsBias(Slot s) {
  return s == Slot::kB || s == Slot::kBz || s == Slot::kBr || s == Slot::kBc ||
         s == Slot::kBy;
}

void Resize(Tensor& t, std::size_t n) {
  if (t.size() != n || t.rank() != 1) t = Tensor(n);
}

void CheckToken(const ParamSet& theta, TokenId token) {
  if (token >= theta.dims().vocab) {
    throw IndexError("token id " + std::to_string(token) +
                     " out of range for vocabulary of " +
                     std::to_string(theta.dims().vocab));
  }
}

void CheckHidden(const ParamSet& theta, std::size_t n, const char* what) {
  if (n != theta.dims().hidden) {
    throw DimensionError(std::string(what) + ": hidden state of length " +
                         std::to_string(n) + ", model expects " +
                         std::to_string(theta.dims().hidden));
  }
}

void AddBias(const ParamSet& theta, Slot s, std::span<double> out) {
  if (!theta.has(s)) return;
  const Tensor& b = theta[s];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
}

void AddBiasGrad(const ParamSet& theta, Slot s, std::span<const double> g,
                 GradSet& dtheta) {
  if (!theta.has(s)) return;
  Tensor& db = dtheta[theta.index(s)];
  for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i];
}

}  // namespace

std::string_view CellKindName(CellKind cell) {
  return cell == CellKind::kGru ? "gru" : "elman";
}

CellKind ParseCellKind(std::string_view name) {
  if (name == "elman") return CellKind::kElman;
  if (name == "gru") return CellKind::kGru;
  throw ArgumentError("unknown cell kind '" + std::string(name) +
                      "' (expected elman|gru)");
}

void GradSet::SetZero() {
  for (Tensor& t : tensors_) t.SetZero();
}

void GradSet::Add(const GradSet& other) {
  if (other.size() != size()) {
    throw DimensionError("GradSet::Add: " + std::to_string(size()) + " vs " +
                         std::to_string(other.size()) + " tensors");
  }
  for (std::size_t i = 0; i < size(); ++i) AddScaled(tensors_[i], other[i]);
}

double GradSet::MaxAbsDiff(const GradSet& other) const {
  if (other.size() != size()) {
    throw DimensionError("GradSet::MaxAbsDiff: layout mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    m = std::max(m, tprnn::MaxAbsDiff(tensors_[i], other[i]));
  }
  return m;
}

ParamSet::ParamSet(CellKind cell, ModelDims dims, bool use_bias)
    : cell_(cell), dims_(dims), use_bias_(use_bias) {
  if (dims.vocab == 0 || dims.input == 0 || dims.hidden == 0) {
    throw ArgumentError("ParamSet: vocab, input and hidden sizes must be positive");
  }
  slot_index_.fill(-1);
  const std::size_t v = dims.vocab, e = dims.input, h = dims.hidden;
  AddTensor(Slot::kEmbedding, "embedding", Tensor(v, e));
  if (cell == CellKind::kElman) {
    AddTensor(Slot::kWx, "W_x", Tensor(h, e));
    AddTensor(Slot::kWh, "W_h", Tensor(h, h));
    if (use_bias) AddTensor(Slot::kB, "b", Tensor(h));
  } else {
    AddTensor(Slot::kWz, "W_z", Tensor(h, e));
    AddTensor(Slot::kWr, "W_r", Tensor(h, e));
    AddTensor(Slot::kWc, "W_c", Tensor(h, e));
    AddTensor(Slot::kUz, "U_z", Tensor(h, h));
    AddTensor(Slot::kUr, "U_r", Tensor(h, h));
    AddTensor(Slot::kUc, "U_c", Tensor(h, h));
    if (use_bias) {
      AddTensor(Slot::kBz, "b_z", Tensor(h));
      AddTensor(Slot::kBr, "b_r", Tensor(h));
      AddTensor(Slot::kBc, "b_c", Tensor(h));
    }
  }
  AddTensor(Slot::kWy, "W_y", Tensor(v, h));
  if (use_bias) AddTensor(Slot::kBy, "b_y", Tensor(v));
  grads_ = ZeroGradSet();
}

void ParamSet::AddTensor(Slot slot, std::string name, Tensor t) {
  slot_index_[static_cast<int>(slot)] = static_cast<int>(tensors_.size());
  names_.push_back(std::move(name));
  tensors_.push_back(std::move(t));
}

std::size_t ParamSet::index(Slot s) const {
  const int i = slot_index_[static_cast<int>(s)];
  if (i < 0) throw StateError("ParamSet: requested slot absent for this cell");
  return static_cast<std::size_t>(i);
}

GradSet ParamSet::ZeroGradSet() const {
  std::vector<Tensor> zeros;
  zeros.reserve(tensors_.size());
  for (const Tensor& t : tensors_) {
    Tensor z = t;
    z.SetZero();
    zeros.push_back(std::move(z));
  }
  return GradSet(std::move(zeros));
}

void ParamSet::InitRandom(std::uint64_t seed, double scale) {
  for (int s = 0; s < static_cast<int>(Slot::kCount); ++s) {
    const int i = slot_index_[s];
    if (i < 0) continue;
    Tensor& t = tensors_[i];
    if (IsBias(static_cast<Slot>(s))) {
      t.SetZero();
      continue;
    }
    Rng rng(DeriveSeed(seed, "init/" + names_[i]));
    rng.FillUniform(t, -scale, scale);
  }
}

std::size_t ParamSet::NumScalars() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += t.size();
  return n;
}

std::size_t ParamSet::Find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return names_.size();
}

const Tensor& CellForward(const ParamSet& theta, TokenId token,
                          std::span<const double> h_prev, StepContext& ctx) {
  CheckToken(theta, token);
  CheckHidden(theta, h_prev.size(), "CellForward");
  const std::size_t d = theta.dims().hidden;
  const auto e = theta[Slot::kEmbedding].row(token);

  ctx.token = token;
  Resize(ctx.h_prev, d);
  std::copy(h_prev.begin(), h_prev.end(), ctx.h_prev.data());
  Resize(ctx.h, d);

  if (theta.cell() == CellKind::kElman) {
    ctx.h.SetZero();
    MatVecAdd(theta[Slot::kWx], e, ctx.h.span());
    MatVecAdd(theta[Slot::kWh], h_prev, ctx.h.span());
    AddBias(theta, Slot::kB, ctx.h.span());
    for (std::size_t i = 0; i < d; ++i) ctx.h[i] = Sigmoid(ctx.h[i]);
    return ctx.h;
  }

  Resize(ctx.z, d);
  Resize(ctx.r, d);
  Resize(ctx.c, d);
  Resize(ctx.rh, d);
  ctx.z.SetZero();
  ctx.r.SetZero();
  ctx.c.SetZero();
  MatVecAdd(theta[Slot::kWz], e, ctx.z.span());
  MatVecAdd(theta[Slot::kUz], h_prev, ctx.z.span());
  AddBias(theta, Slot::kBz, ctx.z.span());
  MatVecAdd(theta[Slot::kWr], e, ctx.r.span());
  MatVecAdd(theta[Slot::kUr], h_prev, ctx.r.span());
  AddBias(theta, Slot::kBr, ctx.r.span());
  for (std::size_t i = 0; i < d; ++i) {
    ctx.z[i] = Sigmoid(ctx.z[i]);
    ctx.r[i] = Sigmoid(ctx.r[i]);
    ctx.rh[i] = ctx.r[i] * h_prev[i];
  }
  MatVecAdd(theta[Slot::kWc], e, ctx.c.span());
  MatVecAdd(theta[Slot::kUc], ctx.rh.span(), ctx.c.span());
  AddBias(theta, Slot::kBc, ctx.c.span());
  for (std::size_t i = 0; i < d; ++i) {
    ctx.c[i] = std::tanh(ctx.c[i]);
    ctx.h[i] = (1.0 - ctx.z[i]) * h_prev[i] + ctx.z[i] * ctx.c[i];
  }
  return ctx.h;
}

StepContext CellForward(const ParamSet& theta, TokenId token, const Tensor& h_prev) {
  StepContext ctx;
  CellForward(theta, token, h_prev.span(), ctx);
  return ctx;
}

void CellBackward(const ParamSet& theta, const StepContext& ctx,
                  std::span<const double> dh, GradSet* dtheta,
                  std::span<double> dh_prev) {
  const std::size_t d = theta.dims().hidden;
  CheckHidden(theta, dh.size(), "CellBackward dh");
  CheckHidden(theta, dh_prev.size(), "CellBackward dh_prev");
  if (ctx.h.size() != d) throw StateError("CellBackward: empty step context");
  const auto e = theta[Slot::kEmbedding].row(ctx.token);
  std::vector<double> de(theta.dims().input, 0.0);

  if (theta.cell() == CellKind::kElman) {
    std::vector<double> da(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double s = ctx.h[i];
      da[i] = dh[i] * s * (1.0 - s);
    }
    MatTVecAdd(theta[Slot::kWh], da, dh_prev);
    if (dtheta != nullptr) {
      GradSet& g = *dtheta;
      OuterAdd(g[theta.index(Slot::kWx)], da, e);
      OuterAdd(g[theta.index(Slot::kWh)], da, ctx.h_prev.span());
      AddBiasGrad(theta, Slot::kB, da, g);
      MatTVecAdd(theta[Slot::kWx], da, de);
      auto demb = g[theta.index(Slot::kEmbedding)].row(ctx.token);
      for (std::size_t j = 0; j < de.size(); ++j) demb[j] += de[j];
    }
    return;
  }

  std::vector<double> da_z(d), da_r(d), da_c(d), drh(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double z = ctx.z[i], c = ctx.c[i], hp = ctx.h_prev[i];
    da_z[i] = dh[i] * (c - hp) * z * (1.0 - z);
    da_c[i] = dh[i] * z * (1.0 - c * c);
    dh_prev[i] += dh[i] * (1.0 - z);
  }
  MatTVecAdd(theta[Slot::kUc], da_c, drh);
  for (std::size_t i = 0; i < d; ++i) {
    const double r = ctx.r[i], hp = ctx.h_prev[i];
    dh_prev[i] += drh[i] * r;
    da_r[i] = drh[i] * hp * r * (1.0 - r);
  }
  MatTVecAdd(theta[Slot::kUz], da_z, dh_prev);
  MatTVecAdd(theta[Slot::kUr], da_r, dh_prev);

  if (dtheta == nullptr) return;
  GradSet& g = *dtheta;
  OuterAdd(g[theta.index(Slot::kWz)], da_z, e);
  OuterAdd(g[theta.index(Slot::kWr)], da_r, e);
  OuterAdd(g[theta.index(Slot::kWc)], da_c, e);
  OuterAdd(g[theta.index(Slot::kUz)], da_z, ctx.h_prev.span());
  OuterAdd(g[theta.index(Slot::kUr)], da_r, ctx.h_prev.span());
  OuterAdd(g[theta.index(Slot::kUc)], da_c, ctx.rh.span());
  AddBiasGrad(theta, Slot::kBz, da_z, g);
  AddBiasGrad(theta, Slot::kBr, da_r, g);
  AddBiasGrad(theta, Slot::kBc, da_c, g);
  MatTVecAdd(theta[Slot::kWz], da_z, de);
  MatTVecAdd(theta[Slot::kWr], da_r, de);
  MatTVecAdd(theta[Slot::kWc], da_c, de);
  auto demb = g[theta.index(Slot::kEmbedding)].row(ctx.token);
  for (std::size_t j = 0; j < de.size(); ++j) demb[j] += de[j];
}

Tensor Predict(const ParamSet& theta, const Tensor& h) {
  Tensor logits(theta.dims().vocab);
  PredictInto(theta, h.span(), logits.span());
  return logits;
}

void PredictInto(const ParamSet& theta, std::span<const double> h,
                 std::span<double> logits) {
  CheckHidden(theta, h.size(), "Predict");
  std::fill(logits.begin(), logits.end(), 0.0);
  MatVecAdd(theta[Slot::kWy], h, logits);
  AddBias(theta, Slot::kBy, logits);
}

void PredictBackward(const ParamSet& theta, std::span<const double> h,
                     std::span<const double> dlogits, GradSet* dtheta,
                     std::span<double> dh) {
  MatTVecAdd(theta[Slot::kWy], dlogits, dh);
  if (dtheta == nullptr) return;
  OuterAdd((*dtheta)[theta.index(Slot::kWy)], dlogits, h);
  AddBiasGrad(theta, Slot::kBy, dlogits, *dtheta);
}

double Unroll::Forward(const ParamSet& theta, std::span<const TokenId> tokens,
                       std::span<const double> h_init) {
  if (tokens.size() < 2) {
    throw ArgumentError("Unroll: need at least two tokens (one transition)");
  }
  n_ = tokens.size() - 1;
  if (steps_.size() < n_) steps_.resize(n_);
  if (dlogits_.size() < n_) dlogits_.resize(n_);
  const std::size_t v = theta.dims().vocab;
  std::vector<double> logits(v);
  double loss = 0.0;
  std::span<const double> h = h_init;
  for (std::size_t t = 0; t < n_; ++t) {
    const Tensor& h_next = CellForward(theta, tokens[t], h, steps_[t]);
    PredictInto(theta, h_next.span(), logits);
    Resize(dlogits_[t], v);
    loss += SoftmaxXentInto(logits, tokens[t + 1], dlogits_[t].span());
    h = h_next.span();
  }
  ran_ = true;
  return loss;
}

const Tensor& Unroll::final_state() const {
  if (!ran_) throw StateError("Unroll::final_state before Forward");
  return steps_[n_ - 1].h;
}

void Unroll::Backward(const ParamSet& theta, std::span<const double> dh_final,
                      GradSet* dtheta, std::span<double> dh_init,
                      bool with_prediction) const {
  if (!ran_) throw StateError("Unroll::Backward before Forward");
  const std::size_t d = theta.dims().hidden;
  CheckHidden(theta, dh_init.size(), "Unroll::Backward dh_init");
  std::vector<double> dh(d, 0.0), dh_prev(d);
  if (!dh_final.empty()) {
    CheckHidden(theta, dh_final.size(), "Unroll::Backward dh_final");
    std::copy(dh_final.begin(), dh_final.end(), dh.begin());
  }
  for (std::size_t t = n_; t-- > 0;) {
    const StepContext& ctx = steps_[t];
    if (with_prediction) {
      PredictBackward(theta, ctx.h.span(), dlogits_[t].span(), dtheta, dh);
    }
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    CellBackward(theta, ctx, dh, dtheta, dh_prev);
    dh.swap(dh_prev);
  }
  for (std::size_t i = 0; i < d; ++i) dh_init[i] += dh[i];
}

double ForwardLoss(const ParamSet& theta, std::span<const TokenId> tokens,
                   std::span<const double> h_init, Tensor* h_final) {
  if (tokens.size() < 2) {
    throw ArgumentError("ForwardLoss: need at least two tokens (one transition)");
  }
  const std::size_t v = theta.dims().vocab;
  std::vector<double> logits(v), scratch(v);
  StepContext a, b;
  StepContext* cur = &a;
  StepContext* prev = &b;
  double loss = 0.0;
  std::span<const double> h = h_init;
  for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
    const Tensor& h_next = CellForward(theta, tokens[t], h, *cur);
    PredictInto(theta, h_next.span(), logits);
    loss += SoftmaxXentInto(logits, tokens[t + 1], scratch);
    h = h_next.span();
    std::swap(cur, prev);
  }
  if (h_final != nullptr) *h_final = Tensor::Vector(h);
  return loss;
}

SeqResult SeqForwardBackward(const ParamSet& theta, std::span<const TokenId> tokens,
                             const Tensor& h_init, GradSet& dtheta,
                             bool /*treat_h_init_as_constant*/) {
  if (tokens.empty()) throw ArgumentError("SeqForwardBackward: empty sequence");
  Unroll unroll;
  SeqResult r;
  r.loss = unroll.Forward(theta, tokens, h_init.span());
  r.h_final = unroll.final_state();
  r.dh_init = Tensor(theta.dims().hidden);
  unroll.Backward(theta, {}, &dtheta, r.dh_init.span());
  return r;
}

}  // namespace tprnn
