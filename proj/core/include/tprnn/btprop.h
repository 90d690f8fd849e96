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

// Blocked target propagation.
//
// The prediction steps of a token span are cut into blocks of B steps (same
// token convention as bptt.h). Only the state at each block junction is a free
// variable; inside a block the recurrence is unrolled as usual. Free variable
// b is the state that ends block b and starts block b+1, so a span with N
// blocks has N free variables and block 0 starts from a constant state.
//
// Block b contributes
//
//   sum_t loss(f(h_t), x_{t+1})  +  lambda/2 * ||H_b - hhat_b + u_b||^2
//
// where the unroll starts from H_{b-1} (or the constant start state),
// hhat_b is the unroll's final state and u_b is the dual for junction b. With
// B = 1 every step gets a free variable and a penalty.
//
// The augmented objective is minimized by alternating gradient steps on the
// free variables (H-step), on theta (theta-step), and dual ascent on u
// (dual-step). Block work units are independent given theta and their two
// adjacent free variables, so they run on a thread pool; their partial
// results are reduced in a fixed order that does not depend on the thread
// count.

#ifndef TPRNN_BTPROP_H_
#define TPRNN_BTPROP_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tprnn/data.h"
#include "tprnn/metrics.h"
#include "tprnn/model.h"
#include "tprnn/optim.h"
#include "tprnn/thread_pool.h"

namespace tprnn {

enum class Schedule { kPm, kAlm, kAdmm };

std::string_view ScheduleName(Schedule schedule);
Schedule ParseSchedule(std::string_view name);

struct Block {
  std::size_t index = 0;
  std::size_t start = 0;  // first input position within the span
  std::size_t steps = 0;  // tokens [start, start + steps]
};

class BlockPlan {
 public:
  BlockPlan() = default;
  // Blocks of block_size steps over the stream_tokens - 1 steps of a span;
  // the last block may be shorter but has at least one step.
  BlockPlan(std::size_t stream_tokens, std::size_t block_size);

  std::size_t block_size() const { return block_size_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  std::size_t num_free_variables() const { return blocks_.size(); }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(std::size_t b) const { return blocks_[b]; }

  // Free variable that starts block b; empty for block 0.
  std::optional<std::size_t> initial_free_variable(std::size_t b) const;
  // Free variable that block b's penalty ties its final state to.
  std::size_t terminal_free_variable(std::size_t b) const { return b; }

  std::span<const TokenId> BlockTokens(std::span<const TokenId> span,
                                       std::size_t b) const;

 private:
  std::size_t block_size_ = 0;
  std::vector<Block> blocks_;
};

// Free junction states H with their gradient buffers.
struct HiddenStore {
  std::vector<Tensor> values;
  std::vector<Tensor> grads;
};

// Dual variables u, indexed like HiddenStore.
struct DualStore {
  std::vector<Tensor> values;
};

struct PenaltyResult {
  double value = 0.0;
  Tensor d_next;  // lambda * r
  Tensor d_hat;   // -lambda * r
  Tensor d_u;     // lambda * r
};

// lambda/2 * ||h_next - h_hat + u||^2 with r = h_next - h_hat + u.
PenaltyResult BoundaryPenalty(const Tensor& h_next, const Tensor& h_hat,
                              const Tensor& u, double lambda);

// Selects which parts of a block's objective are included.
struct BlockTerms {
  bool prediction = true;
  bool penalty = true;
};

struct BlockResult {
  double prediction_loss = 0.0;
  double penalty = 0.0;
  Tensor h_boundary;   // final predicted state of the block
  Tensor dh_in;        // d/d(start state)
  Tensor dh_next;      // d/d(terminal free variable)
  Tensor dh_boundary;  // d/d(h_boundary), penalty part only

  double loss() const { return prediction_loss + penalty; }
};

// Objective of one block and its gradients. Accumulates the theta gradient
// into dtheta when non-null.
BlockResult BlockForwardBackward(const ParamSet& theta, std::span<const TokenId> tokens,
                                 const Tensor& h_in, const Tensor& h_next,
                                 const Tensor& u, double lambda, GradSet* dtheta,
                                 BlockTerms terms = {});

// Objective only; writes the final predicted state to h_boundary if non-null.
double BlockForward(const ParamSet& theta, std::span<const TokenId> tokens,
                    const Tensor& h_in, const Tensor& h_next, const Tensor& u,
                    double lambda, Tensor* h_boundary = nullptr, BlockTerms terms = {});

// One contiguous span of blocks optimized jointly: its constant start state,
// free variables and duals.
struct TPropProblem {
  std::span<const TokenId> tokens;
  BlockPlan plan;
  Tensor h_start;
  double lambda = 0.0;
  HiddenStore hidden;
  DualStore duals;

  // Plan over tokens, zero start state, zero free variables and duals.
  static TPropProblem Create(std::span<const TokenId> tokens, std::size_t block_size,
                             std::size_t hidden_size, double lambda);

  // Sets every free variable to the prediction of the plain recurrence under
  // theta (so all residuals vanish) and zeroes the duals. Returns the
  // prediction loss of that sequential pass.
  double InitializeFromForward(const ParamSet& theta);
};

struct AugmentedValue {
  double prediction = 0.0;
  double penalty = 0.0;
  double total() const { return prediction + penalty; }
};

// Block-parallel evaluation of the augmented objective and its gradients.
//
// Blocks are grouped into at most kMaxChunks contiguous chunks whose size
// depends only on the number of blocks. Each chunk accumulates its blocks'
// theta gradients in block order into its own buffer; chunk buffers are then
// added to the output in chunk order. Results are therefore bit-identical for
// any thread count.
class BlockEngine {
 public:
  static constexpr std::size_t kMaxChunks = 64;

  explicit BlockEngine(std::size_t threads = 1);

  std::size_t threads() const { return pool_.threads(); }

  // Objective value; per-junction predicted states go to h_hat if non-null.
  AugmentedValue Evaluate(const ParamSet& theta, const TPropProblem& problem,
                          std::vector<Tensor>* h_hat = nullptr);

  // Objective plus gradients. dtheta (if non-null) is accumulated into; dh (if
  // non-null) is overwritten with one gradient per free variable.
  AugmentedValue Gradients(const ParamSet& theta, const TPropProblem& problem,
                           GradSet* dtheta, std::vector<Tensor>* dh,
                           std::vector<Tensor>* h_hat = nullptr);

 private:
  ThreadPool pool_;
  std::vector<GradSet> chunk_grads_;
};

struct TPropConfig {
  double lambda = 0.1;
  double alpha_u = 0.1;   // dual step size
  double lr_h = 0.1;      // H-step rate
  double lr_theta = 0.1;  // theta-step rate
  std::size_t h_steps = 1;
  std::size_t theta_steps = 1;
  std::size_t block_size = 10;
  Schedule schedule = Schedule::kAdmm;
  Regime regime = Regime::kMinibatch;
  std::size_t minibatch_blocks = 4;
  std::size_t epochs = 5;
  OptimizerKind theta_optimizer = OptimizerKind::kAdagrad;
  OptimizerKind h_optimizer = OptimizerKind::kSgd;
  bool h_reinit_each_epoch = false;  // batch regime only

  void Validate() const;
};

struct HStepReport {
  std::size_t backtracks = 0;
  AugmentedValue first;  // objective before the first round
  AugmentedValue last;   // objective after the last round
};

// h_steps rounds of simultaneous descent on all free variables. A round that
// increases the objective is redone once at half the rate.
HStepReport HStep(const ParamSet& theta, TPropProblem& problem, const TPropConfig& config,
                  Optimizer& h_optimizer, BlockEngine& engine);

// theta_steps optimizer steps on the augmented objective with H and u fixed.
// Returns the objective at the first step. The optional hook sees each
// theta gradient before it is applied.
using ThetaGradientHook =
    std::function<void(const ParamSet&, const TPropProblem&, const GradSet&)>;
AugmentedValue ThetaStep(ParamSet& theta, const TPropProblem& problem,
                         const TPropConfig& config, Optimizer& theta_optimizer,
                         BlockEngine& engine, const ThetaGradientHook& hook = {});

// u <- u + alpha_u * lambda * (H - hhat + u) at every junction, with hhat
// taken under the current theta. Returns the mean residual ||H - hhat||_2
// measured before the update. Throws ConfigError under the penalty method.
double DualStep(const ParamSet& theta, TPropProblem& problem, const TPropConfig& config,
                BlockEngine& engine);

double MeanResidual(const ParamSet& theta, const TPropProblem& problem,
                    BlockEngine& engine);

struct OuterIterationReport {
  AugmentedValue first;   // objective at the first gradient evaluation
  double residual = 0.0;  // mean junction residual after the iteration
  std::size_t backtracks = 0;
};

// One iteration of the configured schedule:
//   PM:   H-step, theta-step
//   ADMM: H-step, theta-step, dual-step
//   ALM:  max(h_steps, theta_steps) simultaneous rounds on (H, theta), then
//         dual-step
OuterIterationReport OuterIteration(ParamSet& theta, TPropProblem& problem,
                                    const TPropConfig& config, Optimizer& theta_optimizer,
                                    Optimizer& h_optimizer, BlockEngine& engine,
                                    const ThetaGradientHook& hook = {});

struct TPropCallbacks {
  MetricsCallback on_epoch;
  // Called with (segment index within the epoch, theta, problem, gradient).
  std::function<void(std::size_t, const ParamSet&, const TPropProblem&, const GradSet&)>
      on_theta_gradient;
};

// Batch regime: one problem over the whole stream; every epoch is one outer
// iteration and the free variables persist across epochs unless
// h_reinit_each_epoch is set.
//
// Minibatch regime: the stream is cut into segments of minibatch_blocks
// blocks visited in order. Each segment starts from the carried state,
// re-initializes its free variables from the forward pass, resets its duals,
// runs one outer iteration and hands its last free variable on as the next
// segment's constant start state.
std::vector<EpochMetrics> TrainBtprop(ParamSet& theta, const TokenStream& train,
                                      const TokenStream& valid, const TPropConfig& config,
                                      std::size_t threads = 1,
                                      const TPropCallbacks& callbacks = {});

}  // namespace tprnn

#endif  // TPRNN_BTPROP_H_
