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


#ifndef MMHASH_ENCODE_H_
#define MMHASH_ENCODE_H_

#include "mmhash/embedding.h"
#include "mmhash/hamming.h"
#include "mmhash/model.h"

namespace mmhash {

// Runs every sample of `set` through the model and binarizes the hash-layer
// pre-activations. Input normalization follows params.normalize_inputs.
// Throws ShapeError when the set's concatenated dim differs from the model's.
BinaryCodeMatrix EncodeSet(const ModelParams& params, const EmbeddingSet& set);

}  // namespace mmhash

#endif  // MMHASH_ENCODE_H_
