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


#include "mmhash/encode.h"

#include <algorithm>
#include <span>

#include "mmhash/errors.h"

namespace mmhash {

BinaryCodeMatrix EncodeSet(const ModelParams& params, const EmbeddingSet& set) {
  if (set.concat_dim() != params.input_dim()) {
    throw ShapeError("data has concatenated dim " +
                     std::to_string(set.concat_dim()) + ", model expects " +
                     std::to_string(params.input_dim()));
  }
  constexpr size_t kChunk = 256;
  const auto bits = static_cast<uint32_t>(params.bits());
  BinaryCodeMatrix codes;
  codes.bits = bits;
  codes.ids = set.ids;
  codes.words.assign(set.sample_count() * codes.words_per_code(), 0);
  for (size_t start = 0; start < set.sample_count(); start += kChunk) {
    const size_t rows = std::min(kChunk, set.sample_count() - start);
    Matrix x(rows, params.input_dim());
    for (size_t r = 0; r < rows; ++r) {
      x.row(static_cast<Eigen::Index>(r)) =
          ConcatModalities(set, start + r, params.normalize_inputs)
              .transpose();
    }
    const BatchTrace trace = BatchForward(params, x);
    for (size_t r = 0; r < rows; ++r) {
      const Vector pre = trace.pre_tanh.row(static_cast<Eigen::Index>(r));
      const std::vector<uint8_t> code = Binarize(pre);
      uint64_t* dst = codes.words.data() + (start + r) * codes.words_per_code();
      for (uint32_t i = 0; i < bits; ++i) {
        if (code[i]) dst[i / 64] |= uint64_t{1} << (i % 64);
      }
    }
  }
  return codes;
}

}  // namespace mmhash
