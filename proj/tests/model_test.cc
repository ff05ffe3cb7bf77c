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
#include <cstring>
#include <limits>

#include <gtest/gtest.h>

#include "mmhash/errors.h"
#include "mmhash/rng.h"
#include "oracles.h"
#include "test_util.h"

namespace mmhash {
namespace {

using oracle::MaxRelError;
using oracle::ScalarForward;

ScalarForward ScalarOracle(const Matrix& wf, const Vector& bf, const Matrix& wh,
                           const Vector& bh, const Vector& x) {
  return oracle::Forward(wf, bf, wh, bh, x);
}

Matrix RandomMatrix(long rows, long cols, Rng& rng) {
  Matrix m(rows, cols);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = rng.Normal();
  return m;
}

Vector RandomVec(long size, Rng& rng) { return RandomMatrix(size, 1, rng); }

TEST(GateForwardTest, ZeroParamsHalveTheInput) {
  const GatingParams p{Matrix::Zero(2, 2), Vector::Zero(2)};
  const GateOutput out = GateForward(p, (Vector(2) << 2, -4).finished());
  EXPECT_EQ(out.gate, Vector::Constant(2, 0.5));
  EXPECT_EQ(out.fused, (Vector(2) << 1, -2).finished());
}

TEST(GateForwardTest, ZeroInputGivesZeroFusion) {
  Rng rng(1);
  const GatingParams p{RandomMatrix(5, 5, rng), RandomVec(5, rng)};
  EXPECT_EQ(GateForward(p, Vector::Zero(5)).fused, Vector::Zero(5));
}

TEST(GateForwardTest, MatchesScalarOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const GatingParams p{RandomMatrix(6, 6, rng), RandomVec(6, rng)};
    const Vector x = RandomVec(6, rng);
    const ScalarForward want =
        ScalarOracle(p.weight, p.bias, Matrix::Zero(1, 6), Vector::Zero(1), x);
    const GateOutput got = GateForward(p, x);
    EXPECT_LE(MaxRelError(got.gate, want.gate), 1e-12);
    EXPECT_LE(MaxRelError(got.fused, want.fused), 1e-12);
    for (long i = 0; i < 6; ++i) {
      EXPECT_GT(got.gate[i], 0.0);
      EXPECT_LT(got.gate[i], 1.0);
    }
  }
}

TEST(GateForwardTest, DimensionMismatchThrows) {
  const GatingParams p{Matrix::Zero(3, 3), Vector::Zero(3)};
  EXPECT_THROW(GateForward(p, Vector::Zero(4)), ShapeError);
}

TEST(HashForwardTest, ZeroParamsGiveZeroCode) {
  const HashParams p{Matrix::Zero(4, 3), Vector::Zero(4)};
  const HashOutput out = HashForward(p, Vector::Ones(3));
  EXPECT_EQ(out.relaxed, Vector::Zero(4));
}

TEST(HashForwardTest, LargeBiasSaturates) {
  const HashParams p{Matrix::Zero(4, 3), Vector::Constant(4, 20.0)};
  const HashOutput out = HashForward(p, Vector::Ones(3));
  for (long i = 0; i < 4; ++i) EXPECT_NEAR(out.relaxed[i], 1.0, 1e-8);
}

TEST(HashForwardTest, MatchesScalarOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const HashParams p{RandomMatrix(4, 6, rng), RandomVec(4, rng)};
    const Vector fused = RandomVec(6, rng);
    // With a zero gate weight and a huge gate bias the gate is exactly 1,
    // so the oracle's hash stage sees `fused` unchanged.
    const ScalarForward want = ScalarOracle(
        Matrix::Zero(6, 6), Vector::Constant(6, 800.0), p.weight, p.bias, fused);
    const HashOutput got = HashForward(p, fused);
    EXPECT_LE(MaxRelError(got.pre_tanh, want.pre), 1e-12);
    EXPECT_LE(MaxRelError(got.relaxed, want.relaxed), 1e-12);
  }
}

TEST(HashForwardTest, DimensionMismatchThrows) {
  const HashParams p{Matrix::Zero(4, 3), Vector::Zero(4)};
  EXPECT_THROW(HashForward(p, Vector::Zero(2)), ShapeError);
}

TEST(ForwardTest, IsPure) {
  const ModelParams p = InitParams(12, 16, 3, 5);
  Rng rng(4);
  const Vector x = RandomVec(12, rng);
  const ForwardTrace a = Forward(p, x);
  const ForwardTrace b = Forward(p, x);
  EXPECT_EQ(a.relaxed_code, b.relaxed_code);
  EXPECT_EQ(a.gate, b.gate);
}

TEST(ForwardTest, BatchRowsMatchSingleSample) {
  const ModelParams p = InitParams(10, 8, 3, 6);
  Rng rng(6);
  const Matrix x = RandomMatrix(5, 10, rng);
  const BatchTrace batch = BatchForward(p, x);
  for (long r = 0; r < 5; ++r) {
    const ForwardTrace one = Forward(p, x.row(r).transpose());
    EXPECT_LE((batch.relaxed.row(r).transpose() - one.relaxed_code)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-14);
  }
}

TEST(BinarizeTest, SignRule) {
  EXPECT_EQ(Binarize(Vector((Vector(2) << 0.3, -0.7).finished())),
            (std::vector<uint8_t>{1, 0}));
  EXPECT_EQ(Binarize(Vector::Zero(1)), (std::vector<uint8_t>{1}));
  EXPECT_EQ(Binarize(Vector::Constant(1, -0.0)), (std::vector<uint8_t>{1}));
}

TEST(BinarizeTest, NonFiniteThrows) {
  Vector v = Vector::Zero(3);
  v[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Binarize(v), NumericError);
  v[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Binarize(v), NumericError);
}

TEST(BinarizeTest, TanhPreservesBits) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    Vector z = RandomVec(64, rng) * std::pow(10.0, rng.Uniform(-12, 3));
    if (trial % 7 == 0) z[0] = 0.0;
    EXPECT_EQ(Binarize(Vector(z.array().tanh())), Binarize(z));
  }
}

// Objective u . relaxed(x) evaluated with the scalar oracle.
double ScalarObjective(const ModelParams& p, const Vector& x, const Vector& u) {
  const ScalarForward f =
      ScalarOracle(p.gating.weight, p.gating.bias, p.hash.weight, p.hash.bias, x);
  double s = 0.0;
  for (long i = 0; i < u.size(); ++i) s += u[i] * f.relaxed[i];
  return s;
}

TEST(ModelBackwardTest, ZeroUpstreamGivesZeroGradients) {
  const ModelParams p = InitParams(4, 3, 2, 1);
  Rng rng(1);
  const ForwardTrace t = Forward(p, RandomVec(4, rng));
  const ModelGradients g = ModelBackward(p, t, Vector::Zero(3));
  for (const auto& view : TensorViews(g)) EXPECT_TRUE((view.array() == 0).all());
}

TEST(ModelBackwardTest, MatchesFiniteDifferences) {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    ModelParams p = InitParams(3, 2, 2, 100 + trial);
    p.gating.bias = RandomVec(3, rng) * 0.5;
    p.hash.bias = RandomVec(2, rng) * 0.5;
    const Vector x = RandomVec(3, rng);
    const Vector u = RandomVec(2, rng);
    const ModelGradients g = ModelBackward(p, Forward(p, x), u);

    const double h = 1e-5;
    ModelParams probe = p;
    auto probe_views = TensorViews(probe);
    const auto grad_views = TensorViews(g);
    // Only the gating and hash tensors (first four) feed the relaxed code.
    for (size_t t = 0; t < 4; ++t) {
      for (long i = 0; i < probe_views[t].size(); ++i) {
        const double saved = probe_views[t][i];
        probe_views[t][i] = saved + h;
        const double plus = ScalarObjective(probe, x, u);
        probe_views[t][i] = saved - h;
        const double minus = ScalarObjective(probe, x, u);
        probe_views[t][i] = saved;
        const double numeric = (plus - minus) / (2 * h);
        const double exact = grad_views[t][i];
        const double scale =
            std::max({std::abs(numeric), std::abs(exact), 1e-6});
        EXPECT_LE(std::abs(numeric - exact) / scale, 1e-4)
            << "tensor " << t << " entry " << i;
      }
    }
  }
}

TEST(ModelBackwardTest, GateBiasGradientAtZeroGating) {
  Rng rng(13);
  ModelParams p = InitParams(5, 3, 2, 9);
  p.gating.weight.setZero();
  p.gating.bias.setZero();
  const Vector x = RandomVec(5, rng);
  const Vector u = RandomVec(3, rng);
  const ForwardTrace t = Forward(p, x);
  const Vector through_tanh =
      u.cwiseProduct((1.0 - t.relaxed_code.array().square()).matrix());
  const Vector want =
      0.25 * x.cwiseProduct(p.hash.weight.transpose() * through_tanh);
  const ModelGradients g = ModelBackward(p, t, u);
  EXPECT_LE((g.gating.bias - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ModelBackwardTest, ShapeMismatchThrows) {
  const ModelParams p = InitParams(4, 3, 2, 1);
  const ForwardTrace t = Forward(p, Vector::Ones(4));
  EXPECT_THROW(ModelBackward(p, t, Vector::Zero(2)), ShapeError);
}

TEST(InitParamsTest, DeterministicWithZeroBiases) {
  const ModelParams a = InitParams(20, 16, 4, 99);
  EXPECT_EQ(a, InitParams(20, 16, 4, 99));
  EXPECT_FALSE(a == InitParams(20, 16, 4, 100));
  EXPECT_TRUE((a.gating.bias.array() == 0).all());
  EXPECT_TRUE((a.hash.bias.array() == 0).all());
  EXPECT_TRUE((a.head.bias.array() == 0).all());
}

TEST(InitParamsTest, GlorotBound) {
  const ModelParams p = InitParams(1024, 16, 10, 1);
  // sqrt(6 / (1024 + 16))
  const double bound = 0.075955452531275;
  const double hash_max = p.hash.weight.cwiseAbs().maxCoeff();
  EXPECT_LE(hash_max, bound);
  EXPECT_GT(hash_max, 0.99 * bound);
  EXPECT_LE(p.gating.weight.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 2048));
  EXPECT_LE(p.head.weight.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 26));
  // Uniform on [-a, a] has mean 0 and variance a^2 / 3.
  const double var = p.hash.weight.array().square().mean();
  EXPECT_NEAR(var, bound * bound / 3, 0.05 * bound * bound / 3);
}

TEST(CheckpointTest, RoundTripRandomModels) {
  Rng rng(21);
  testing::TempDir dir;
  for (int trial = 0; trial < 10; ++trial) {
    ModelParams p = InitParams(1 + rng.Below(12), 1 + rng.Below(40),
                               1 + rng.Below(5), rng.NextU64(),
                               rng.Below(2) == 1);
    p.gating.bias = RandomVec(p.gating.bias.size(), rng);
    WriteCheckpoint(p, dir.File("m.cmhw"));
    EXPECT_EQ(ReadCheckpoint(dir.File("m.cmhw")), p);
  }
}

TEST(CheckpointTest, HeaderLayout) {
  const ModelParams p = InitParams(3, 2, 4, 0xABCDEF, true);
  const std::vector<char> bytes = EncodeCheckpoint(p);
  ASSERT_EQ(bytes.size(), 4 + 4 * 4 + 8 + 4 + 8u * (9 + 3 + 6 + 2 + 8 + 4));
  EXPECT_EQ(std::string(bytes.data(), 4), "CMHW");
  uint32_t fields[4];
  std::memcpy(fields, bytes.data() + 4, sizeof(fields));
  EXPECT_EQ(fields[0], 1u);
  EXPECT_EQ(fields[1], 3u);
  EXPECT_EQ(fields[2], 2u);
  EXPECT_EQ(fields[3], 4u);
  uint64_t seed;
  std::memcpy(&seed, bytes.data() + 20, 8);
  EXPECT_EQ(seed, 0xABCDEFu);
  // First tensor value is W_f(0, 0), then W_f(0, 1): row-major.
  double w01;
  std::memcpy(&w01, bytes.data() + 32 + 8, 8);
  EXPECT_EQ(w01, p.gating.weight(0, 1));
}

TEST(CheckpointTest, CorruptFilesAreRejected) {
  const std::vector<char> good = EncodeCheckpoint(InitParams(3, 2, 2, 1));
  std::vector<char> bad = good;
  bad[0] = 'X';
  EXPECT_THROW(DecodeCheckpoint(bad), FormatError);
  bad = good;
  bad[4] = 9;
  EXPECT_THROW(DecodeCheckpoint(bad), FormatError);
  EXPECT_THROW(DecodeCheckpoint({good.begin(), good.end() - 1}), FormatError);
  bad = good;
  bad.push_back(0);
  EXPECT_THROW(DecodeCheckpoint(bad), FormatError);
}

}  // namespace
}  // namespace mmhash
