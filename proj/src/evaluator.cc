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


#include "mmhash/evaluator.h"

#include <cstdio>
#include <unordered_map>

#include "mmhash/errors.h"

namespace mmhash {
namespace {

// Multi-hot rows repacked into 64-bit words so relevance is a word AND.
class LabelBits {
 public:
  LabelBits(std::span<const uint8_t> labels, uint32_t categories)
      : words_per_row_((categories + 63) / 64) {
    const size_t rows = categories == 0 ? 0 : labels.size() / categories;
    bits_.assign(rows * words_per_row_, 0);
    for (size_t r = 0; r < rows; ++r) {
      for (uint32_t c = 0; c < categories; ++c) {
        if (labels[r * categories + c]) {
          bits_[r * words_per_row_ + c / 64] |= uint64_t{1} << (c % 64);
        }
      }
    }
  }

  bool Intersect(const LabelBits& other, size_t row, size_t other_row) const {
    for (size_t w = 0; w < words_per_row_; ++w) {
      if (bits_[row * words_per_row_ + w] &
          other.bits_[other_row * words_per_row_ + w]) {
        return true;
      }
    }
    return false;
  }

 private:
  size_t words_per_row_;
  std::vector<uint64_t> bits_;
};

std::vector<uint8_t> AlignLabels(const EmbeddingSet& set,
                                 const BinaryCodeMatrix& codes,
                                 const char* role) {
  std::unordered_map<uint64_t, size_t> row_of;
  row_of.reserve(set.sample_count());
  for (size_t i = 0; i < set.sample_count(); ++i) row_of[set.ids[i]] = i;
  std::vector<uint8_t> aligned;
  aligned.reserve(codes.count() * set.category_count);
  for (uint64_t id : codes.ids) {
    const auto it = row_of.find(id);
    if (it == row_of.end()) {
      throw EvaluationError(std::string(role) + " code id " +
                            std::to_string(id) + " has no labels");
    }
    const auto row = set.Labels(it->second);
    aligned.insert(aligned.end(), row.begin(), row.end());
  }
  return aligned;
}

}  // namespace

bool Relevant(std::span<const uint8_t> query_labels,
              std::span<const uint8_t> item_labels) {
  if (query_labels.size() != item_labels.size()) {
    throw ShapeError("label rows have different category counts");
  }
  for (size_t c = 0; c < query_labels.size(); ++c) {
    if (query_labels[c] && item_labels[c]) return true;
  }
  return false;
}

double AveragePrecision(std::span<const uint64_t> ranking,
                        const std::unordered_set<uint64_t>& relevant) {
  if (relevant.empty()) {
    throw ArgumentError("average precision needs a relevant item");
  }
  double sum = 0.0;
  size_t hits = 0;
  for (size_t p = 0; p < ranking.size(); ++p) {
    if (relevant.contains(ranking[p])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(p + 1);
    }
  }
  return sum / static_cast<double>(relevant.size());
}

MapReport MeanAveragePrecision(std::span<const uint8_t> query_labels,
                               std::span<const uint8_t> retrieval_labels,
                               uint32_t categories,
                               const BinaryCodeMatrix& query_codes,
                               const BinaryCodeMatrix& retrieval_codes) {
  if (query_codes.bits != retrieval_codes.bits) {
    throw ShapeError("query codes have " + std::to_string(query_codes.bits) +
                     " bits, retrieval codes have " +
                     std::to_string(retrieval_codes.bits));
  }
  if (categories == 0 ||
      query_labels.size() != query_codes.count() * categories ||
      retrieval_labels.size() != retrieval_codes.count() * categories) {
    throw ShapeError("label matrices do not match the code counts");
  }
  const LabelBits query_bits(query_labels, categories);
  const LabelBits item_bits(retrieval_labels, categories);
  const LinearScanIndex index(retrieval_codes);

  MapReport report;
  report.bits = query_codes.bits;
  double ap_sum = 0.0;
  double relevant_sum = 0.0;
  std::vector<uint8_t> is_relevant(retrieval_codes.count());
  for (size_t q = 0; q < query_codes.count(); ++q) {
    size_t relevant_count = 0;
    for (size_t i = 0; i < retrieval_codes.count(); ++i) {
      is_relevant[i] = query_bits.Intersect(item_bits, q, i);
      relevant_count += is_relevant[i];
    }
    if (relevant_count == 0) {
      ++report.excluded_queries;
      continue;
    }
    const std::vector<uint32_t> order =
        index.RankPositions(query_codes.Code(q));
    double precision_sum = 0.0;
    size_t hits = 0;
    for (size_t p = 0; p < order.size() && hits < relevant_count; ++p) {
      if (is_relevant[order[p]]) {
        ++hits;
        precision_sum += static_cast<double>(hits) / static_cast<double>(p + 1);
      }
    }
    ap_sum += precision_sum / static_cast<double>(relevant_count);
    relevant_sum += static_cast<double>(relevant_count);
    ++report.evaluated_queries;
  }
  if (report.evaluated_queries == 0) {
    throw EvaluationError("no query has a relevant retrieval item (" +
                          std::to_string(report.excluded_queries) +
                          " excluded)");
  }
  const auto evaluated = static_cast<double>(report.evaluated_queries);
  report.map = ap_sum / evaluated;
  report.mean_relevant = relevant_sum / evaluated;
  return report;
}

MapReport MeanAveragePrecision(const EmbeddingSet& query_set,
                               const EmbeddingSet& retrieval_set,
                               const BinaryCodeMatrix& query_codes,
                               const BinaryCodeMatrix& retrieval_codes) {
  if (query_set.category_count != retrieval_set.category_count) {
    throw ShapeError("query and retrieval sets disagree on category count");
  }
  if (query_set.unlabeled()) {
    throw EvaluationError("evaluation needs labeled sets");
  }
  return MeanAveragePrecision(
      AlignLabels(query_set, query_codes, "query"),
      AlignLabels(retrieval_set, retrieval_codes, "retrieval"),
      query_set.category_count, query_codes, retrieval_codes);
}

std::string FormatMapReport(const std::vector<MapReport>& reports) {
  std::string out = "bits\tmAP\tqueries\texcluded\tmean_relevant\n";
  char line[160];
  for (const MapReport& r : reports) {
    std::snprintf(line, sizeof(line), "%u\t%.6f\t%zu\t%zu\t%.3f\n", r.bits,
                  r.map, r.evaluated_queries, r.excluded_queries,
                  r.mean_relevant);
    out += line;
  }
  return out;
}

}  // namespace mmhash
