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


// Embedding data sets, their on-disk EMBX container and train/retrieval/query
// splits.
//
// EMBX layout (all integers and floats little-endian):
//
//   "EMBX" | u32 version (=1) | u64 sample_count | u32 modality_count
//   | u32 dim x modality_count | u32 category_count
//   | f32 features, modality-major then row-major
//   | u8 labels, sample_count x category_count, each 0 or 1
//   | u64 ids x sample_count
//
// A set with category_count == 0 is an unlabeled set.

#ifndef MMHASH_EMBEDDING_H_
#define MMHASH_EMBEDDING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mmhash {

inline constexpr uint32_t kEmbxVersion = 1;

struct EmbeddingSet {
  std::vector<uint32_t> modality_dims;
  // One row-major (sample_count x dim) block per modality.
  std::vector<std::vector<float>> features;
  uint32_t category_count = 0;
  // Row-major (sample_count x category_count), values 0/1.
  std::vector<uint8_t> labels;
  std::vector<uint64_t> ids;

  size_t sample_count() const { return ids.size(); }
  bool unlabeled() const { return category_count == 0; }
  // Sum of the modality dims; the length of a concatenated feature.
  size_t concat_dim() const;

  std::span<const float> Feature(size_t modality, size_t sample) const;
  std::span<const uint8_t> Labels(size_t sample) const;

  bool operator==(const EmbeddingSet&) const = default;
};

// Creates an empty set with the given layout.
EmbeddingSet MakeEmptySet(std::vector<uint32_t> modality_dims,
                          uint32_t category_count);

// Throws FormatError when shapes disagree, a feature is NaN/Inf, a label is
// not 0/1, a labeled row has no set bit or ids repeat.
void ValidateEmbeddingSet(const EmbeddingSet& set);

std::vector<char> EncodeEmbx(const EmbeddingSet& set);
EmbeddingSet DecodeEmbx(std::vector<char> bytes);

EmbeddingSet ReadEmbeddingFile(const std::string& path);
void WriteEmbeddingFile(const EmbeddingSet& set, const std::string& path);

// Modalities of one sample joined in declared order, widened to double.
// With normalize set, each modality is scaled to unit L2 norm first (a zero
// modality vector is left as is).
Eigen::VectorXd ConcatModalities(const EmbeddingSet& set, size_t index,
                                 bool normalize = false);

// Every sample as one row of a (sample_count x concat_dim) matrix.
Eigen::MatrixXd ConcatAll(const EmbeddingSet& set, bool normalize = false);

struct DatasetSplit {
  EmbeddingSet train;
  EmbeddingSet retrieval;
  EmbeddingSet query;
  uint32_t category_count = 0;

  bool operator==(const DatasetSplit&) const = default;
};

// Validates every member set plus the cross-set rules: a shared positive
// category_count, identical modality dims and disjoint query/retrieval ids.
void ValidateSplit(const DatasetSplit& split);

struct SyntheticOptions {
  uint32_t class_count = 10;
  uint32_t per_class = 100;
  std::vector<uint32_t> modality_dims = {512, 512};
  double noise_sigma = 0.05;
  uint64_t seed = 0;
};

// Gaussian blobs around one random unit-norm center per class and modality.
// Per class, a tenth of the samples (at least one) become queries and the
// rest the retrieval set; the training set is the first half of each class
// drawn from the retrieval samples, mirroring benchmarks whose training
// images are a subset of the database.
DatasetSplit GenerateSynthetic(const SyntheticOptions& options);

// Split manifest: a JSON document naming the three EMBX files (relative to
// the manifest's directory) and the category count.
struct SplitManifest {
  std::string train_path;
  std::string retrieval_path;
  std::string query_path;
  uint32_t category_count = 0;
};

SplitManifest ReadSplitManifest(const std::string& path);
void WriteSplitManifest(const SplitManifest& manifest, const std::string& path);

// Writes <prefix>.{train,retrieval,query}.embx plus <prefix>.split.json and
// returns the manifest path.
std::string WriteSplit(const DatasetSplit& split, const std::string& prefix);
DatasetSplit LoadSplit(const std::string& manifest_path);

}  // namespace mmhash

#endif  // MMHASH_EMBEDDING_H_
