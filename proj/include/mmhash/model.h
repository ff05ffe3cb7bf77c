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


// Gated fusion of concatenated modality features followed by a tanh hash
// layer:
//
//   gate     = sigmoid(W_f x + b_f)          (n)
//   fused    = gate .* x                     (n)
//   pre_tanh = W_h fused + b_h               (k)
//   relaxed  = tanh(pre_tanh)                (k), code bit = [pre_tanh >= 0]
//
// plus a linear classification head (categories x k) used only by the
// training loss. All numerics are double precision.

#ifndef MMHASH_MODEL_H_
#define MMHASH_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mmhash {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct GatingParams {
  Matrix weight;  // n x n
  Vector bias;    // n
};

struct HashParams {
  Matrix weight;  // k x n
  Vector bias;    // k

  size_t bits() const { return static_cast<size_t>(bias.size()); }
};

struct LossHead {
  Matrix weight;  // categories x k
  Vector bias;    // categories
};

struct ModelParams {
  GatingParams gating;
  HashParams hash;
  LossHead head;
  uint64_t seed = 0;
  // Inputs are L2-normalized per modality before concatenation.
  bool normalize_inputs = true;

  size_t input_dim() const { return static_cast<size_t>(gating.bias.size()); }
  size_t bits() const { return hash.bits(); }
  size_t categories() const { return static_cast<size_t>(head.bias.size()); }

  bool operator==(const ModelParams& other) const;
};

// Gradients share the parameter layout; seed and flags are unused.
using ModelGradients = ModelParams;

// Throws ShapeError unless every tensor agrees with (n, k, categories) and
// FormatError(kNonFiniteValue) on NaN/Inf entries.
void ValidateParams(const ModelParams& params);

// A zero-filled ModelParams with the shapes of `like`.
ModelParams ZerosLike(const ModelParams& like);

// Mutable and read-only flat views over the six tensors in declaration
// order: W_f, b_f, W_h, b_h, head weight, head bias.
std::vector<Eigen::Map<Vector>> TensorViews(ModelParams& params);
std::vector<Eigen::Map<const Vector>> TensorViews(const ModelParams& params);

inline bool IsStandardCodeLength(size_t bits) {
  return bits == 16 || bits == 32 || bits == 64 || bits == 128;
}

// Glorot-uniform weights, bound sqrt(6 / (fan_in + fan_out)) per matrix;
// zero biases. Deterministic in seed.
ModelParams InitParams(size_t input_dim, size_t bits, size_t categories,
                       uint64_t seed, bool normalize_inputs = true);

// sigmoid with separate branches for positive and negative arguments.
double StableSigmoid(double z);

struct GateOutput {
  Vector gate;
  Vector fused;
};

struct HashOutput {
  Vector pre_tanh;
  Vector relaxed;
};

GateOutput GateForward(const GatingParams& params, const Vector& x);
HashOutput HashForward(const HashParams& params, const Vector& fused);

struct ForwardTrace {
  Vector x_concat;
  Vector gate;
  Vector x_fusion;
  Vector pre_tanh;
  Vector relaxed_code;
};

ForwardTrace Forward(const ModelParams& params, const Vector& x);

// Code bits: bit i is 1 iff value i >= 0 (so 0 maps to 1). Applying it to
// pre-activations or to their tanh gives the same bits. Throws NumericError
// on non-finite input.
std::vector<uint8_t> Binarize(std::span<const double> values);
inline std::vector<uint8_t> Binarize(const Vector& values) {
  return Binarize(std::span<const double>(values.data(), values.size()));
}

// Gradients of the sgn-free map x -> relaxed_code with respect to the gating
// and hash parameters, given dL/d(relaxed_code). The head gradients in the
// result are zero.
ModelGradients ModelBackward(const ModelParams& params,
                             const ForwardTrace& trace,
                             const Vector& upstream);

// Row-per-sample variants used by the trainer.
struct BatchTrace {
  Matrix x;
  Matrix gate;
  Matrix fused;
  Matrix pre_tanh;
  Matrix relaxed;
};

BatchTrace BatchForward(const ModelParams& params, const Matrix& x);

// Sums per-sample gradients over the batch. `upstream` is batch x k.
// Accumulates into grads' gating and hash tensors.
void BatchBackward(const ModelParams& params, const BatchTrace& trace,
                   const Matrix& upstream, ModelGradients& grads);

// Checkpoint "CMHW" (little-endian):
//   "CMHW" | u32 version (=1) | u32 n | u32 k | u32 categories | u64 seed
//   | u32 flags (bit 0: normalize_inputs)
//   | f64 tensors, each row-major: W_f, b_f, W_h, b_h, head W, head b
inline constexpr uint32_t kCheckpointVersion = 1;

std::vector<char> EncodeCheckpoint(const ModelParams& params);
ModelParams DecodeCheckpoint(std::vector<char> bytes);
void WriteCheckpoint(const ModelParams& params, const std::string& path);
ModelParams ReadCheckpoint(const std::string& path);

}  // namespace mmhash

#endif  // MMHASH_MODEL_H_
