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


#include "mmhash/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "mmhash/errors.h"
#include "mmhash/rng.h"

namespace mmhash {
namespace {

constexpr Eigen::Index kEvalChunk = 256;
constexpr double kFiniteDiffStep = 1e-5;

// Binary cross-entropy of sigmoid(logit) against target, without overflow.
double BceWithLogit(double logit, double target) {
  return std::max(logit, 0.0) - logit * target +
         std::log1p(std::exp(-std::abs(logit)));
}

struct ForwardLoss {
  BatchTrace trace;
  Matrix logits;
  double classification_sum = 0.0;  // over samples and categories
  double quantization_sum = 0.0;    // over samples of per-sample means
};

ForwardLoss RunForwardLoss(const ModelParams& params, const Matrix& x,
                           const Matrix& labels,
                           std::span<const uint64_t> ids) {
  if (x.rows() == 0) throw ArgumentError("loss needs a non-empty batch");
  if (labels.rows() != x.rows() ||
      static_cast<size_t>(labels.cols()) != params.categories()) {
    throw ShapeError("label matrix does not match batch and category count");
  }
  ForwardLoss out;
  out.trace = BatchForward(params, x);
  out.logits = out.trace.relaxed * params.head.weight.transpose();
  out.logits.rowwise() += params.head.bias.transpose();
  const double k = static_cast<double>(params.bits());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double bce = 0.0;
    for (Eigen::Index c = 0; c < labels.cols(); ++c) {
      bce += BceWithLogit(out.logits(i, c), labels(i, c));
    }
    const double quant =
        (1.0 - out.trace.relaxed.row(i).array().square()).sum() / k;
    // tanh saturates infinities to +-1, so check the pre-activations too.
    if (!std::isfinite(bce) || !std::isfinite(quant) ||
        !out.trace.pre_tanh.row(i).allFinite()) {
      const std::string who =
          static_cast<size_t>(i) < ids.size()
              ? "sample id " + std::to_string(ids[static_cast<size_t>(i)])
              : "batch row " + std::to_string(i);
      throw NumericError("non-finite loss at " + who);
    }
    out.classification_sum += bce;
    out.quantization_sum += quant;
  }
  return out;
}

LossTerms MakeTerms(double classification, double quantization,
                    double lambda_quant) {
  return {classification, quantization,
          classification + lambda_quant * quantization};
}

Vector RandomVector(Eigen::Index size, double scale, Rng& rng) {
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = scale * rng.Normal();
  return v;
}

}  // namespace

void ValidateConfig(const TrainConfig& config) {
  if (config.bits == 0) throw ArgumentError("code length must be positive");
  if (!config.allow_any_bits && !IsStandardCodeLength(config.bits)) {
    throw ArgumentError("code length " + std::to_string(config.bits) +
                        " is not one of 16, 32, 64, 128");
  }
  if (config.epochs < 0) throw ArgumentError("epochs must be >= 0");
  if (config.batch_size == 0) throw ArgumentError("batch size must be >= 1");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ArgumentError("learning rate must be positive");
  }
  if (!(config.lambda_quant >= 0.0) || !std::isfinite(config.lambda_quant)) {
    throw ArgumentError("lambda_quant must be >= 0");
  }
  if (config.optimizer == OptimizerKind::kAdam &&
      (!(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
       !(config.beta2 >= 0.0 && config.beta2 < 1.0) ||
       !(config.epsilon > 0.0))) {
    throw ArgumentError("Adam needs beta1, beta2 in [0, 1) and epsilon > 0");
  }
}

LossResult ComputeLoss(const ModelParams& params, const Matrix& x,
                       const Matrix& labels, double lambda_quant,
                       std::span<const uint64_t> ids) {
  ForwardLoss fwd = RunForwardLoss(params, x, labels, ids);
  const double batch = static_cast<double>(x.rows());
  const double cells = batch * static_cast<double>(labels.cols());
  const double k = static_cast<double>(params.bits());

  LossResult result;
  result.terms = MakeTerms(fwd.classification_sum / cells,
                           fwd.quantization_sum / batch, lambda_quant);
  result.grads = ZerosLike(params);

  const Matrix d_logits =
      (fwd.logits.unaryExpr(&StableSigmoid) - labels) / cells;
  result.grads.head.weight.noalias() = d_logits.transpose() * fwd.trace.relaxed;
  result.grads.head.bias = d_logits.colwise().sum().transpose();

  Matrix d_relaxed = d_logits * params.head.weight;
  d_relaxed -= (2.0 * lambda_quant / (batch * k)) * fwd.trace.relaxed;
  BatchBackward(params, fwd.trace, d_relaxed, result.grads);
  return result;
}

LossTerms EvaluateLoss(const ModelParams& params, const Matrix& x,
                       const Matrix& labels, double lambda_quant) {
  double classification = 0.0;
  double quantization = 0.0;
  for (Eigen::Index start = 0; start < x.rows(); start += kEvalChunk) {
    const Eigen::Index rows = std::min(kEvalChunk, x.rows() - start);
    const ForwardLoss fwd = RunForwardLoss(
        params, x.middleRows(start, rows), labels.middleRows(start, rows), {});
    classification += fwd.classification_sum;
    quantization += fwd.quantization_sum;
  }
  const double batch = static_cast<double>(x.rows());
  return MakeTerms(classification / (batch * static_cast<double>(labels.cols())),
                   quantization / batch, lambda_quant);
}

void OptimizerStep(ModelParams& params, const ModelGradients& grads,
                   OptimizerState& state, const TrainConfig& config) {
  auto values = TensorViews(params);
  const auto gradients = TensorViews(grads);
  if (values.size() != gradients.size()) {
    throw ShapeError("gradient tensor count differs from parameters");
  }
  for (size_t t = 0; t < values.size(); ++t) {
    if (values[t].size() != gradients[t].size()) {
      throw ShapeError("gradient tensor " + std::to_string(t) +
                       " has the wrong size");
    }
  }
  ++state.step;
  if (config.optimizer == OptimizerKind::kSgd) {
    for (size_t t = 0; t < values.size(); ++t) {
      values[t] -= config.learning_rate * gradients[t];
    }
    return;
  }

  if (state.first_moment.empty()) {
    for (const auto& g : gradients) {
      state.first_moment.push_back(Vector::Zero(g.size()));
      state.second_moment.push_back(Vector::Zero(g.size()));
    }
  }
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (size_t i = 0; i < values.size(); ++i) {
    Vector& m = state.first_moment[i];
    Vector& v = state.second_moment[i];
    if (m.size() != gradients[i].size()) {
      throw ShapeError("optimizer state does not match the parameters");
    }
    m = config.beta1 * m + (1.0 - config.beta1) * gradients[i];
    v = config.beta2 * v +
        (1.0 - config.beta2) * gradients[i].array().square().matrix();
    values[i].array() -=
        config.learning_rate * (m.array() / correction1) /
        ((v.array() / correction2).sqrt() + config.epsilon);
  }
}

Matrix LabelMatrix(const EmbeddingSet& set) {
  Matrix labels(set.sample_count(), set.category_count);
  for (size_t i = 0; i < set.sample_count(); ++i) {
    const auto row = set.Labels(i);
    for (size_t c = 0; c < row.size(); ++c) {
      labels(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          row[c];
    }
  }
  return labels;
}

TrainResult Train(const DatasetSplit& split, const TrainConfig& config) {
  ValidateConfig(config);
  ValidateSplit(split);
  const EmbeddingSet& train = split.train;
  if (train.sample_count() == 0) {
    throw ArgumentError("training set is empty");
  }
  if (config.batch_size > train.sample_count()) {
    throw ArgumentError("batch size " + std::to_string(config.batch_size) +
                        " exceeds training set size " +
                        std::to_string(train.sample_count()));
  }

  const Matrix x = ConcatAll(train, config.normalize_inputs);
  const Matrix labels = LabelMatrix(train);
  TrainResult result;
  result.params = InitParams(train.concat_dim(), config.bits,
                             split.category_count, config.seed,
                             config.normalize_inputs);
  result.log.push_back(
      {0, EvaluateLoss(result.params, x, labels, config.lambda_quant)});

  const size_t count = train.sample_count();
  std::vector<Eigen::Index> order(count);
  std::vector<uint64_t> batch_ids;
  OptimizerState state;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng shuffle(config.seed ^ Mix(static_cast<uint64_t>(epoch)));
    shuffle.Shuffle(std::span<Eigen::Index>(order));

    size_t batch_index = 0;
    for (size_t start = 0; start < count;
         start += config.batch_size, ++batch_index) {
      const size_t rows = std::min(config.batch_size, count - start);
      const std::span<const Eigen::Index> members(order.data() + start, rows);
      const Matrix batch_x = x(members, Eigen::all);
      const Matrix batch_labels = labels(members, Eigen::all);
      batch_ids.clear();
      for (Eigen::Index row : members) {
        batch_ids.push_back(train.ids[static_cast<size_t>(row)]);
      }
      try {
        const LossResult loss = ComputeLoss(result.params, batch_x,
                                            batch_labels, config.lambda_quant,
                                            batch_ids);
        OptimizerStep(result.params, loss.grads, state, config);
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(batch_index) + ": " + e.what());
      }
    }
    try {
      result.log.push_back(
          {epoch, EvaluateLoss(result.params, x, labels, config.lambda_quant)});
    } catch (const NumericError& e) {
      throw NumericError("epoch " + std::to_string(epoch) +
                         " evaluation: " + e.what());
    }
  }
  return result;
}

std::string FormatTrainLog(const std::vector<EpochLog>& log) {
  std::string out;
  char line[128];
  for (const EpochLog& entry : log) {
    std::snprintf(line, sizeof(line), "%d\t%.9f\t%.9f\t%.9f\n", entry.epoch,
                  entry.terms.classification, entry.terms.quantization,
                  entry.terms.total);
    out += line;
  }
  return out;
}

double FiniteDiffCheck(size_t input_dim, size_t bits, size_t categories,
                       uint64_t seed, bool constant_loss) {
  if (input_dim == 0 || input_dim > 8 || bits == 0 || bits > 4 ||
      categories == 0) {
    throw ArgumentError("finite-difference check needs 1 <= n <= 8, "
                        "1 <= k <= 4 and categories >= 1");
  }
  constexpr Eigen::Index kBatch = 3;
  constexpr double kLambda = 0.5;
  Rng rng(Mix(seed) ^ 0x5eedULL);
  ModelParams params = InitParams(input_dim, bits, categories, seed);
  // Non-zero biases so every branch of the sigmoid/tanh paths is exercised.
  params.gating.bias = RandomVector(params.gating.bias.size(), 0.5, rng);
  params.hash.bias = RandomVector(params.hash.bias.size(), 0.5, rng);
  params.head.bias = RandomVector(params.head.bias.size(), 0.5, rng);

  Matrix x(kBatch, static_cast<Eigen::Index>(input_dim));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
  Matrix labels = Matrix::Zero(kBatch, static_cast<Eigen::Index>(categories));
  for (Eigen::Index i = 0; i < kBatch; ++i) {
    for (Eigen::Index c = 0; c < labels.cols(); ++c) {
      labels(i, c) = static_cast<double>(rng.Below(2));
    }
    labels(i, static_cast<Eigen::Index>(rng.Below(categories))) = 1.0;
  }

  auto total_loss = [&](const ModelParams& p) {
    if (constant_loss) return 1.0;
    return ComputeLoss(p, x, labels, kLambda).terms.total;
  };
  const ModelGradients analytic =
      constant_loss ? ZerosLike(params)
                    : ComputeLoss(params, x, labels, kLambda).grads;

  double worst = 0.0;
  ModelParams probe = params;
  auto probe_views = TensorViews(probe);
  const auto analytic_views = TensorViews(analytic);
  for (size_t t = 0; t < probe_views.size(); ++t) {
    for (Eigen::Index i = 0; i < probe_views[t].size(); ++i) {
      const double saved = probe_views[t][i];
      probe_views[t][i] = saved + kFiniteDiffStep;
      const double plus = total_loss(probe);
      probe_views[t][i] = saved - kFiniteDiffStep;
      const double minus = total_loss(probe);
      probe_views[t][i] = saved;
      const double numeric = (plus - minus) / (2.0 * kFiniteDiffStep);
      const double exact = analytic_views[t][i];
      const double scale =
          std::max({std::abs(exact), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(exact - numeric) / scale);
    }
  }
  return worst;
}

}  // namespace mmhash
