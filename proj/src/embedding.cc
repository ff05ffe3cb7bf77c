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


#include "mmhash/embedding.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "binary_io.h"
#include "mmhash/errors.h"
#include "mmhash/rng.h"

namespace mmhash {
namespace {

constexpr char kEmbxMagic[] = "EMBX";

// Multiplies sizes for payload accounting, rejecting overflow.
uint64_t CheckedMul(uint64_t a, uint64_t b) {
  if (a != 0 && b > UINT64_MAX / a) {
    throw FormatError(FormatErrc::kInconsistentShape,
                      "declared payload size overflows");
  }
  return a * b;
}

}  // namespace

size_t EmbeddingSet::concat_dim() const {
  return std::accumulate(modality_dims.begin(), modality_dims.end(),
                         size_t{0});
}

std::span<const float> EmbeddingSet::Feature(size_t modality,
                                             size_t sample) const {
  const size_t dim = modality_dims.at(modality);
  return std::span<const float>(features.at(modality)).subspan(sample * dim,
                                                               dim);
}

std::span<const uint8_t> EmbeddingSet::Labels(size_t sample) const {
  return std::span<const uint8_t>(labels).subspan(sample * category_count,
                                                  category_count);
}

EmbeddingSet MakeEmptySet(std::vector<uint32_t> modality_dims,
                          uint32_t category_count) {
  EmbeddingSet set;
  set.features.resize(modality_dims.size());
  set.modality_dims = std::move(modality_dims);
  set.category_count = category_count;
  return set;
}

void ValidateEmbeddingSet(const EmbeddingSet& set) {
  const size_t count = set.sample_count();
  if (set.modality_dims.empty()) {
    throw FormatError(FormatErrc::kInconsistentShape, "no modalities");
  }
  if (set.features.size() != set.modality_dims.size()) {
    throw FormatError(FormatErrc::kInconsistentShape,
                      "feature block count differs from modality count");
  }
  for (size_t m = 0; m < set.modality_dims.size(); ++m) {
    if (set.modality_dims[m] == 0) {
      throw FormatError(FormatErrc::kInconsistentShape,
                        "modality " + std::to_string(m) + " has dim 0");
    }
    if (set.features[m].size() != count * set.modality_dims[m]) {
      throw FormatError(FormatErrc::kInconsistentShape,
                        "modality " + std::to_string(m) +
                            " does not hold sample_count rows");
    }
    for (size_t i = 0; i < set.features[m].size(); ++i) {
      if (!std::isfinite(set.features[m][i])) {
        throw FormatError(
            FormatErrc::kNonFiniteValue,
            "modality " + std::to_string(m) + " sample id " +
                std::to_string(set.ids[i / set.modality_dims[m]]));
      }
    }
  }
  if (set.labels.size() != count * set.category_count) {
    throw FormatError(FormatErrc::kInconsistentShape,
                      "label matrix is not sample_count x category_count");
  }
  for (size_t i = 0; i < count && !set.unlabeled(); ++i) {
    const auto row = set.Labels(i);
    bool any = false;
    for (uint8_t bit : row) {
      if (bit > 1) {
        throw FormatError(FormatErrc::kInvariantViolation,
                          "label byte other than 0/1");
      }
      any = any || bit == 1;
    }
    if (!any) {
      throw FormatError(FormatErrc::kInvariantViolation,
                        "sample id " + std::to_string(set.ids[i]) +
                            " has no label in a labeled set");
    }
  }
  std::unordered_set<uint64_t> seen;
  seen.reserve(count);
  for (uint64_t id : set.ids) {
    if (!seen.insert(id).second) {
      throw FormatError(FormatErrc::kInvariantViolation,
                        "duplicate id " + std::to_string(id));
    }
  }
}

std::vector<char> EncodeEmbx(const EmbeddingSet& set) {
  ValidateEmbeddingSet(set);
  internal::ByteWriter w;
  w.Magic(kEmbxMagic);
  w.Put<uint32_t>(kEmbxVersion);
  w.Put<uint64_t>(set.sample_count());
  w.Put<uint32_t>(static_cast<uint32_t>(set.modality_dims.size()));
  for (uint32_t dim : set.modality_dims) w.Put<uint32_t>(dim);
  w.Put<uint32_t>(set.category_count);
  for (const auto& block : set.features) {
    w.PutBytes(block.data(), block.size() * sizeof(float));
  }
  w.PutBytes(set.labels.data(), set.labels.size());
  w.PutBytes(set.ids.data(), set.ids.size() * sizeof(uint64_t));
  return w.bytes();
}

EmbeddingSet DecodeEmbx(std::vector<char> bytes) {
  internal::ByteReader r(std::move(bytes));
  r.ExpectMagic(kEmbxMagic);
  const auto version = r.Get<uint32_t>("version");
  if (version != kEmbxVersion) {
    throw FormatError(FormatErrc::kVersionMismatch,
                      "EMBX version " + std::to_string(version));
  }
  const auto count = r.Get<uint64_t>("sample_count");
  const auto modality_count = r.Get<uint32_t>("modality_count");
  if (modality_count == 0) {
    throw FormatError(FormatErrc::kInconsistentShape, "no modalities");
  }
  // Each dim takes four bytes; bound the loop before reading.
  r.Require(CheckedMul(modality_count, 4), "modality dims");
  std::vector<uint32_t> dims(modality_count);
  for (auto& dim : dims) {
    dim = r.Get<uint32_t>("modality dims");
    if (dim == 0) {
      throw FormatError(FormatErrc::kInconsistentShape, "modality dim 0");
    }
  }
  const auto categories = r.Get<uint32_t>("category_count");

  EmbeddingSet set = MakeEmptySet(std::move(dims), categories);
  for (size_t m = 0; m < set.modality_dims.size(); ++m) {
    const uint64_t floats = CheckedMul(count, set.modality_dims[m]);
    r.Require(CheckedMul(floats, sizeof(float)), "feature payload");
    set.features[m].resize(floats);
    r.GetBytes(set.features[m].data(), floats * sizeof(float),
               "feature payload");
  }
  const uint64_t label_bytes = CheckedMul(count, categories);
  r.Require(label_bytes, "label payload");
  set.labels.resize(label_bytes);
  r.GetBytes(set.labels.data(), label_bytes, "label payload");
  r.Require(CheckedMul(count, sizeof(uint64_t)), "id payload");
  set.ids.resize(count);
  r.GetBytes(set.ids.data(), count * sizeof(uint64_t), "id payload");
  r.ExpectEnd();
  ValidateEmbeddingSet(set);
  return set;
}

EmbeddingSet ReadEmbeddingFile(const std::string& path) {
  return DecodeEmbx(internal::ReadFileBytes(path));
}

void WriteEmbeddingFile(const EmbeddingSet& set, const std::string& path) {
  internal::WriteFileBytes(path, EncodeEmbx(set));
}

Eigen::VectorXd ConcatModalities(const EmbeddingSet& set, size_t index,
                                 bool normalize) {
  if (index >= set.sample_count()) {
    throw ArgumentError("sample index " + std::to_string(index) +
                        " out of range for " +
                        std::to_string(set.sample_count()) + " samples");
  }
  Eigen::VectorXd out(set.concat_dim());
  Eigen::Index offset = 0;
  for (size_t m = 0; m < set.modality_dims.size(); ++m) {
    const auto row = set.Feature(m, index);
    auto segment = out.segment(offset, static_cast<Eigen::Index>(row.size()));
    for (size_t j = 0; j < row.size(); ++j) {
      segment[static_cast<Eigen::Index>(j)] = row[j];
    }
    if (normalize) {
      const double norm = segment.norm();
      if (norm > 0.0) segment /= norm;
    }
    offset += static_cast<Eigen::Index>(row.size());
  }
  return out;
}

Eigen::MatrixXd ConcatAll(const EmbeddingSet& set, bool normalize) {
  Eigen::MatrixXd out(set.sample_count(), set.concat_dim());
  for (size_t i = 0; i < set.sample_count(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        ConcatModalities(set, i, normalize).transpose();
  }
  return out;
}

void ValidateSplit(const DatasetSplit& split) {
  if (split.category_count == 0) {
    throw FormatError(FormatErrc::kInvariantViolation,
                      "split needs a positive category_count");
  }
  for (const EmbeddingSet* set :
       {&split.train, &split.retrieval, &split.query}) {
    ValidateEmbeddingSet(*set);
    if (set->category_count != split.category_count) {
      throw FormatError(FormatErrc::kInconsistentShape,
                        "member set category_count differs from split");
    }
    if (set->modality_dims != split.train.modality_dims) {
      throw FormatError(FormatErrc::kInconsistentShape,
                        "member sets disagree on modality dims");
    }
  }
  std::unordered_set<uint64_t> retrieval_ids(split.retrieval.ids.begin(),
                                             split.retrieval.ids.end());
  for (uint64_t id : split.query.ids) {
    if (retrieval_ids.contains(id)) {
      throw FormatError(FormatErrc::kInvariantViolation,
                        "id " + std::to_string(id) +
                            " is in both query and retrieval sets");
    }
  }
}

DatasetSplit GenerateSynthetic(const SyntheticOptions& options) {
  if (options.class_count < 2) {
    throw ArgumentError("synthetic data needs at least 2 classes");
  }
  if (options.per_class < 2) {
    throw ArgumentError("synthetic data needs at least 2 samples per class");
  }
  if (options.modality_dims.empty()) {
    throw ArgumentError("synthetic data needs at least one modality");
  }
  for (uint32_t dim : options.modality_dims) {
    if (dim == 0) throw ArgumentError("modality dim must be positive");
  }
  if (!(options.noise_sigma >= 0.0) || !std::isfinite(options.noise_sigma)) {
    throw ArgumentError("noise_sigma must be a finite non-negative number");
  }

  Rng rng(options.seed);
  const size_t modalities = options.modality_dims.size();
  const uint32_t classes = options.class_count;

  // centers[m][c] is a unit vector of length modality_dims[m].
  std::vector<std::vector<std::vector<double>>> centers(modalities);
  for (size_t m = 0; m < modalities; ++m) {
    centers[m].resize(classes);
    for (auto& center : centers[m]) {
      center.resize(options.modality_dims[m]);
      double norm_sq = 0.0;
      do {
        norm_sq = 0.0;
        for (double& v : center) {
          v = rng.Normal();
          norm_sq += v * v;
        }
      } while (norm_sq == 0.0);
      const double norm = std::sqrt(norm_sq);
      for (double& v : center) v /= norm;
    }
  }

  DatasetSplit split;
  split.category_count = classes;
  split.train = MakeEmptySet(options.modality_dims, classes);
  split.retrieval = MakeEmptySet(options.modality_dims, classes);
  split.query = MakeEmptySet(options.modality_dims, classes);

  const uint32_t per_class = options.per_class;
  const uint32_t query_per_class = std::max<uint32_t>(1, per_class / 10);
  const uint32_t train_per_class =
      std::min(per_class - query_per_class, (per_class + 1) / 2);

  auto append = [&](EmbeddingSet& set, uint64_t id, uint32_t label,
                    const std::vector<std::vector<float>>& sample) {
    for (size_t m = 0; m < modalities; ++m) {
      set.features[m].insert(set.features[m].end(), sample[m].begin(),
                             sample[m].end());
    }
    for (uint32_t c = 0; c < classes; ++c) {
      set.labels.push_back(c == label ? 1 : 0);
    }
    set.ids.push_back(id);
  };

  std::vector<std::vector<std::vector<float>>> samples(per_class);
  std::vector<uint32_t> order(per_class);
  for (uint32_t c = 0; c < classes; ++c) {
    for (uint32_t j = 0; j < per_class; ++j) {
      samples[j].assign(modalities, {});
      for (size_t m = 0; m < modalities; ++m) {
        auto& out = samples[j][m];
        out.resize(options.modality_dims[m]);
        for (size_t d = 0; d < out.size(); ++d) {
          const double noise =
              options.noise_sigma > 0.0 ? options.noise_sigma * rng.Normal()
                                        : 0.0;
          out[d] = static_cast<float>(centers[m][c][d] + noise);
        }
      }
    }
    std::iota(order.begin(), order.end(), 0u);
    rng.Shuffle(std::span<uint32_t>(order));
    std::vector<uint32_t> query_slots(order.begin(),
                                      order.begin() + query_per_class);
    std::vector<uint32_t> retrieval_slots(order.begin() + query_per_class,
                                          order.end());
    std::sort(query_slots.begin(), query_slots.end());
    std::vector<uint32_t> train_slots(
        retrieval_slots.begin(), retrieval_slots.begin() + train_per_class);
    std::sort(retrieval_slots.begin(), retrieval_slots.end());
    std::sort(train_slots.begin(), train_slots.end());

    const uint64_t base = uint64_t{c} * per_class;
    for (uint32_t j : query_slots) append(split.query, base + j, c, samples[j]);
    for (uint32_t j : retrieval_slots) {
      append(split.retrieval, base + j, c, samples[j]);
    }
    for (uint32_t j : train_slots) append(split.train, base + j, c, samples[j]);
  }
  ValidateSplit(split);
  return split;
}

SplitManifest ReadSplitManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatErrc::kIo, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
    SplitManifest manifest;
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const char* key) {
      std::filesystem::path p = doc.at(key).get<std::string>();
      return (p.is_absolute() ? p : base / p).string();
    };
    manifest.train_path = resolve("train");
    manifest.retrieval_path = resolve("retrieval");
    manifest.query_path = resolve("query");
    manifest.category_count = doc.at("category_count").get<uint32_t>();
    return manifest;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatErrc::kInvariantViolation,
                      "malformed split manifest " + path + ": " + e.what());
  }
}

void WriteSplitManifest(const SplitManifest& manifest,
                        const std::string& path) {
  const nlohmann::ordered_json doc = {
      {"format", "mmhash-split"},
      {"version", 1},
      {"category_count", manifest.category_count},
      {"train", manifest.train_path},
      {"retrieval", manifest.retrieval_path},
      {"query", manifest.query_path},
  };
  const std::string text = doc.dump(2) + "\n";
  internal::WriteFileBytes(path, std::vector<char>(text.begin(), text.end()));
}

std::string WriteSplit(const DatasetSplit& split, const std::string& prefix) {
  ValidateSplit(split);
  const std::filesystem::path base(prefix);
  const std::string stem = base.filename().string();
  SplitManifest manifest{stem + ".train.embx", stem + ".retrieval.embx",
                         stem + ".query.embx", split.category_count};
  WriteEmbeddingFile(split.train, prefix + ".train.embx");
  WriteEmbeddingFile(split.retrieval, prefix + ".retrieval.embx");
  WriteEmbeddingFile(split.query, prefix + ".query.embx");
  const std::string manifest_path = prefix + ".split.json";
  WriteSplitManifest(manifest, manifest_path);
  return manifest_path;
}

DatasetSplit LoadSplit(const std::string& manifest_path) {
  const SplitManifest manifest = ReadSplitManifest(manifest_path);
  DatasetSplit split;
  split.train = ReadEmbeddingFile(manifest.train_path);
  split.retrieval = ReadEmbeddingFile(manifest.retrieval_path);
  split.query = ReadEmbeddingFile(manifest.query_path);
  split.category_count = manifest.category_count;
  ValidateSplit(split);
  return split;
}

}  // namespace mmhash
