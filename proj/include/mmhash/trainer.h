// Copyright 2026 The mmhash Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef MMHASH_TRAINER_H_
#define MMHASH_TRAINER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmhash/embedding.h"
#include "mmhash/model.h"

namespace mmhash {

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  size_t bits = 16;
  // Accept code lengths outside {16, 32, 64, 128}.
  bool allow_any_bits = false;
  int epochs = 30;
  size_t batch_size = 32;
  double learning_rate = 1e-3;
  double lambda_quant = 0.1;
  bool normalize_inputs = true;
  uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Throws ArgumentError on a non-positive learning rate, negative epochs or
// quantization weight, bad Adam constants or an unsupported code length.
void ValidateConfig(const TrainConfig& config);

struct LossTerms {
  double classification = 0.0;
  double quantization = 0.0;
  double total = 0.0;

  bool operator==(const LossTerms&) const = default;
};

struct LossResult {
  LossTerms terms;
  ModelGradients grads;
};

// Loss over a batch of concatenated features (rows of x) with multi-hot
// labels (rows of `labels`, 0/1):
//
//   classification = mean over samples and categories of
//                    BCE(sigmoid(head_W * relaxed + head_b), label)
//   quantization   = mean over samples of (1/k) * sum_i (1 - relaxed_i^2)
//   total          = classification + lambda_quant * quantization
//
// Gradients of `total` for every tensor. `ids`, when given, names the rows
// in the NumericError raised for a non-finite per-sample loss.
LossResult ComputeLoss(const ModelParams& params, const Matrix& x,
                       const Matrix& labels, double lambda_quant,
                       std::span<const uint64_t> ids = {});

// Loss terms only, evaluated in fixed-size chunks.
LossTerms EvaluateLoss(const ModelParams& params, const Matrix& x,
                       const Matrix& labels, double lambda_quant);

struct OptimizerState {
  uint64_t step = 0;
  std::vector<Vector> first_moment;
  std::vector<Vector> second_moment;
};

// SGD: p -= lr * g. Adam: bias-corrected moment update. Updates `params`
// and `state` in place.
void OptimizerStep(ModelParams& params, const ModelGradients& grads,
                   OptimizerState& state, const TrainConfig& config);

struct EpochLog {
  int epoch = 0;
  LossTerms terms;

  bool operator==(const EpochLog&) const = default;
};

struct TrainResult {
  ModelParams params;
  // Full training-set loss before training (epoch 0) and after each epoch.
  std::vector<EpochLog> log;
};

// Deterministic in (split, config): batches follow a per-epoch permutation
// seeded from (seed, epoch); the final partial batch is kept.
TrainResult Train(const DatasetSplit& split, const TrainConfig& config);

// Label rows of a labeled set as a (samples x categories) 0/1 matrix.
Matrix LabelMatrix(const EmbeddingSet& set);

// One "epoch\tclassification\tquantization\ttotal" line per entry.
std::string FormatTrainLog(const std::vector<EpochLog>& log);

// Compares every analytic gradient entry of the total loss on a random
// instance (input dim n <= 8, k <= 4 bits) with central differences of step
// 1e-5 and returns the largest relative error
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
// With constant_loss the loss is replaced by a constant (all gradients 0).
double FiniteDiffCheck(size_t input_dim, size_t bits, size_t categories,
                       uint64_t seed, bool constant_loss = false);

}  // namespace mmhash

#endif  // MMHASH_TRAINER_H_
