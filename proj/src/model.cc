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


#include "mmhash/model.h"

#include <cmath>

#include "binary_io.h"
#include "mmhash/errors.h"
#include "mmhash/rng.h"

namespace mmhash {
namespace {

constexpr char kCheckpointMagic[] = "CMHW";
constexpr uint32_t kFlagNormalize = 1u << 0;

template <typename A, typename B>
bool SameTensor(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

void FillGlorot(Matrix& m, Rng& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rng.Uniform(-bound, bound);
    }
  }
}

void PutMatrix(internal::ByteWriter& w, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.Put<double>(m(r, c));
  }
}

void PutVector(internal::ByteWriter& w, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) w.Put<double>(v[i]);
}

void GetMatrix(internal::ByteReader& r, Matrix& m) {
  r.Require(static_cast<size_t>(m.size()) * sizeof(double), "tensor payload");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = r.Get<double>("tensor payload");
    }
  }
}

void GetVector(internal::ByteReader& r, Vector& v) {
  r.Require(static_cast<size_t>(v.size()) * sizeof(double), "tensor payload");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v[i] = r.Get<double>("tensor payload");
  }
}

void CheckDim(Eigen::Index got, size_t want, const char* what) {
  if (static_cast<size_t>(got) != want) {
    throw ShapeError(std::string(what) + ": expected " + std::to_string(want) +
                     ", got " + std::to_string(got));
  }
}

}  // namespace

bool ModelParams::operator==(const ModelParams& other) const {
  return seed == other.seed && normalize_inputs == other.normalize_inputs &&
         SameTensor(gating.weight, other.gating.weight) &&
         SameTensor(gating.bias, other.gating.bias) &&
         SameTensor(hash.weight, other.hash.weight) &&
         SameTensor(hash.bias, other.hash.bias) &&
         SameTensor(head.weight, other.head.weight) &&
         SameTensor(head.bias, other.head.bias);
}

void ValidateParams(const ModelParams& params) {
  const size_t n = params.input_dim();
  const size_t k = params.bits();
  const size_t c = params.categories();
  if (n == 0 || k == 0 || c == 0) {
    throw ShapeError("model dimensions must be positive");
  }
  CheckDim(params.gating.weight.rows(), n, "gating weight rows");
  CheckDim(params.gating.weight.cols(), n, "gating weight cols");
  CheckDim(params.hash.weight.rows(), k, "hash weight rows");
  CheckDim(params.hash.weight.cols(), n, "hash weight cols");
  CheckDim(params.head.weight.rows(), c, "head weight rows");
  CheckDim(params.head.weight.cols(), k, "head weight cols");
  for (const auto& view : TensorViews(params)) {
    if (!view.allFinite()) {
      throw FormatError(FormatErrc::kNonFiniteValue,
                        "model tensor holds NaN or Inf");
    }
  }
}

ModelParams ZerosLike(const ModelParams& like) {
  ModelParams zeros;
  zeros.gating.weight = Matrix::Zero(like.gating.weight.rows(),
                                     like.gating.weight.cols());
  zeros.gating.bias = Vector::Zero(like.gating.bias.size());
  zeros.hash.weight =
      Matrix::Zero(like.hash.weight.rows(), like.hash.weight.cols());
  zeros.hash.bias = Vector::Zero(like.hash.bias.size());
  zeros.head.weight =
      Matrix::Zero(like.head.weight.rows(), like.head.weight.cols());
  zeros.head.bias = Vector::Zero(like.head.bias.size());
  return zeros;
}

std::vector<Eigen::Map<Vector>> TensorViews(ModelParams& params) {
  std::vector<Eigen::Map<Vector>> views;
  views.reserve(6);
  views.emplace_back(params.gating.weight.data(), params.gating.weight.size());
  views.emplace_back(params.gating.bias.data(), params.gating.bias.size());
  views.emplace_back(params.hash.weight.data(), params.hash.weight.size());
  views.emplace_back(params.hash.bias.data(), params.hash.bias.size());
  views.emplace_back(params.head.weight.data(), params.head.weight.size());
  views.emplace_back(params.head.bias.data(), params.head.bias.size());
  return views;
}

std::vector<Eigen::Map<const Vector>> TensorViews(const ModelParams& params) {
  std::vector<Eigen::Map<const Vector>> views;
  views.reserve(6);
  views.emplace_back(params.gating.weight.data(), params.gating.weight.size());
  views.emplace_back(params.gating.bias.data(), params.gating.bias.size());
  views.emplace_back(params.hash.weight.data(), params.hash.weight.size());
  views.emplace_back(params.hash.bias.data(), params.hash.bias.size());
  views.emplace_back(params.head.weight.data(), params.head.weight.size());
  views.emplace_back(params.head.bias.data(), params.head.bias.size());
  return views;
}

ModelParams InitParams(size_t input_dim, size_t bits, size_t categories,
                       uint64_t seed, bool normalize_inputs) {
  if (input_dim == 0 || bits == 0 || categories == 0) {
    throw ArgumentError("input_dim, bits and categories must be positive");
  }
  const auto n = static_cast<Eigen::Index>(input_dim);
  const auto k = static_cast<Eigen::Index>(bits);
  const auto c = static_cast<Eigen::Index>(categories);
  ModelParams params;
  params.seed = seed;
  params.normalize_inputs = normalize_inputs;
  params.gating.weight.resize(n, n);
  params.gating.bias = Vector::Zero(n);
  params.hash.weight.resize(k, n);
  params.hash.bias = Vector::Zero(k);
  params.head.weight.resize(c, k);
  params.head.bias = Vector::Zero(c);
  Rng rng(seed);
  FillGlorot(params.gating.weight, rng);
  FillGlorot(params.hash.weight, rng);
  FillGlorot(params.head.weight, rng);
  return params;
}

double StableSigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

GateOutput GateForward(const GatingParams& params, const Vector& x) {
  if (params.weight.rows() != params.weight.cols() ||
      params.bias.size() != params.weight.rows() ||
      x.size() != params.weight.cols()) {
    throw ShapeError("gate input has dim " + std::to_string(x.size()) +
                     ", gating expects " +
                     std::to_string(params.weight.cols()));
  }
  GateOutput out;
  out.gate = (params.weight * x + params.bias).unaryExpr(&StableSigmoid);
  out.fused = out.gate.cwiseProduct(x);
  return out;
}

HashOutput HashForward(const HashParams& params, const Vector& fused) {
  if (params.bias.size() != params.weight.rows() ||
      fused.size() != params.weight.cols()) {
    throw ShapeError("hash input has dim " + std::to_string(fused.size()) +
                     ", hash layer expects " +
                     std::to_string(params.weight.cols()));
  }
  HashOutput out;
  out.pre_tanh = params.weight * fused + params.bias;
  out.relaxed = out.pre_tanh.array().tanh().matrix();
  return out;
}

ForwardTrace Forward(const ModelParams& params, const Vector& x) {
  ForwardTrace trace;
  trace.x_concat = x;
  GateOutput gate = GateForward(params.gating, x);
  HashOutput hash = HashForward(params.hash, gate.fused);
  trace.gate = std::move(gate.gate);
  trace.x_fusion = std::move(gate.fused);
  trace.pre_tanh = std::move(hash.pre_tanh);
  trace.relaxed_code = std::move(hash.relaxed);
  return trace;
}

std::vector<uint8_t> Binarize(std::span<const double> values) {
  std::vector<uint8_t> bits(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NumericError("cannot binarize non-finite value at position " +
                         std::to_string(i));
    }
    bits[i] = values[i] >= 0.0 ? 1 : 0;
  }
  return bits;
}

ModelGradients ModelBackward(const ModelParams& params,
                             const ForwardTrace& trace,
                             const Vector& upstream) {
  const size_t n = params.input_dim();
  const size_t k = params.bits();
  if (static_cast<size_t>(upstream.size()) != k ||
      static_cast<size_t>(trace.relaxed_code.size()) != k ||
      static_cast<size_t>(trace.x_concat.size()) != n ||
      static_cast<size_t>(trace.gate.size()) != n ||
      static_cast<size_t>(trace.x_fusion.size()) != n) {
    throw ShapeError("trace or upstream gradient does not match the model");
  }
  ModelGradients grads = ZerosLike(params);
  const Vector d_pre = upstream.cwiseProduct(
      (1.0 - trace.relaxed_code.array().square()).matrix());
  grads.hash.weight = d_pre * trace.x_fusion.transpose();
  grads.hash.bias = d_pre;
  const Vector d_fused = params.hash.weight.transpose() * d_pre;
  const Vector d_logit =
      (d_fused.array() * trace.x_concat.array() * trace.gate.array() *
       (1.0 - trace.gate.array()))
          .matrix();
  grads.gating.weight = d_logit * trace.x_concat.transpose();
  grads.gating.bias = d_logit;
  return grads;
}

BatchTrace BatchForward(const ModelParams& params, const Matrix& x) {
  if (static_cast<size_t>(x.cols()) != params.input_dim()) {
    throw ShapeError("batch has " + std::to_string(x.cols()) +
                     " features, model expects " +
                     std::to_string(params.input_dim()));
  }
  BatchTrace trace;
  trace.x = x;
  Matrix logits = x * params.gating.weight.transpose();
  logits.rowwise() += params.gating.bias.transpose();
  trace.gate = logits.unaryExpr(&StableSigmoid);
  trace.fused = trace.gate.cwiseProduct(x);
  trace.pre_tanh = trace.fused * params.hash.weight.transpose();
  trace.pre_tanh.rowwise() += params.hash.bias.transpose();
  trace.relaxed = trace.pre_tanh.array().tanh().matrix();
  return trace;
}

void BatchBackward(const ModelParams& params, const BatchTrace& trace,
                   const Matrix& upstream, ModelGradients& grads) {
  if (upstream.rows() != trace.relaxed.rows() ||
      upstream.cols() != trace.relaxed.cols()) {
    throw ShapeError("upstream gradient shape differs from relaxed codes");
  }
  const Matrix d_pre =
      (upstream.array() * (1.0 - trace.relaxed.array().square())).matrix();
  grads.hash.weight.noalias() += d_pre.transpose() * trace.fused;
  grads.hash.bias += d_pre.colwise().sum().transpose();
  const Matrix d_fused = d_pre * params.hash.weight;
  const Matrix d_logit = (d_fused.array() * trace.x.array() *
                          trace.gate.array() * (1.0 - trace.gate.array()))
                             .matrix();
  grads.gating.weight.noalias() += d_logit.transpose() * trace.x;
  grads.gating.bias += d_logit.colwise().sum().transpose();
}

std::vector<char> EncodeCheckpoint(const ModelParams& params) {
  ValidateParams(params);
  internal::ByteWriter w;
  w.Magic(kCheckpointMagic);
  w.Put<uint32_t>(kCheckpointVersion);
  w.Put<uint32_t>(static_cast<uint32_t>(params.input_dim()));
  w.Put<uint32_t>(static_cast<uint32_t>(params.bits()));
  w.Put<uint32_t>(static_cast<uint32_t>(params.categories()));
  w.Put<uint64_t>(params.seed);
  w.Put<uint32_t>(params.normalize_inputs ? kFlagNormalize : 0u);
  PutMatrix(w, params.gating.weight);
  PutVector(w, params.gating.bias);
  PutMatrix(w, params.hash.weight);
  PutVector(w, params.hash.bias);
  PutMatrix(w, params.head.weight);
  PutVector(w, params.head.bias);
  return w.bytes();
}

ModelParams DecodeCheckpoint(std::vector<char> bytes) {
  internal::ByteReader r(std::move(bytes));
  r.ExpectMagic(kCheckpointMagic);
  const auto version = r.Get<uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError(FormatErrc::kVersionMismatch,
                      "CMHW version " + std::to_string(version));
  }
  const auto n = r.Get<uint32_t>("n");
  const auto k = r.Get<uint32_t>("k");
  const auto c = r.Get<uint32_t>("category_count");
  if (n == 0 || k == 0 || c == 0) {
    throw FormatError(FormatErrc::kInconsistentShape,
                      "checkpoint declares a zero dimension");
  }
  ModelParams params;
  params.seed = r.Get<uint64_t>("seed");
  const auto flags = r.Get<uint32_t>("flags");
  if ((flags & ~kFlagNormalize) != 0) {
    throw FormatError(FormatErrc::kInconsistentShape, "unknown flag bits");
  }
  params.normalize_inputs = (flags & kFlagNormalize) != 0;
  // n * n doubles can be large; check before allocating.
  const uint64_t doubles = uint64_t{n} * n + n + uint64_t{k} * n + k +
                           uint64_t{c} * k + c;
  if (doubles > r.remaining() / sizeof(double)) {
    throw FormatError(FormatErrc::kTruncatedPayload,
                      "file ends inside tensor payload");
  }
  params.gating.weight.resize(n, n);
  params.gating.bias.resize(n);
  params.hash.weight.resize(k, n);
  params.hash.bias.resize(k);
  params.head.weight.resize(c, k);
  params.head.bias.resize(c);
  GetMatrix(r, params.gating.weight);
  GetVector(r, params.gating.bias);
  GetMatrix(r, params.hash.weight);
  GetVector(r, params.hash.bias);
  GetMatrix(r, params.head.weight);
  GetVector(r, params.head.bias);
  r.ExpectEnd();
  ValidateParams(params);
  return params;
}

void WriteCheckpoint(const ModelParams& params, const std::string& path) {
  internal::WriteFileBytes(path, EncodeCheckpoint(params));
}

ModelParams ReadCheckpoint(const std::string& path) {
  return DecodeCheckpoint(internal::ReadFileBytes(path));
}

}  // namespace mmhash
