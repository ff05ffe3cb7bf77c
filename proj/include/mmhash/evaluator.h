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


// Mean Average Precision over full Hamming rankings. A retrieval item is
// relevant to a query when their label sets share at least one category.

#ifndef MMHASH_EVALUATOR_H_
#define MMHASH_EVALUATOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "mmhash/embedding.h"
#include "mmhash/hamming.h"

namespace mmhash {

// True iff the two multi-hot rows share a set category. Throws ShapeError on
// a length mismatch.
bool Relevant(std::span<const uint8_t> query_labels,
              std::span<const uint8_t> item_labels);

// AP = (1/|relevant|) * sum over ranks p holding a relevant id of
// (relevant ids within the first p) / p. Throws ArgumentError when
// `relevant` is empty.
double AveragePrecision(std::span<const uint64_t> ranking,
                        const std::unordered_set<uint64_t>& relevant);

struct MapReport {
  uint32_t bits = 0;
  double map = 0.0;
  size_t evaluated_queries = 0;
  // Queries with no relevant retrieval item; left out of the mean.
  size_t excluded_queries = 0;
  double mean_relevant = 0.0;

  bool operator==(const MapReport&) const = default;
};

// Label matrices are row-major (rows x categories), aligned with the code
// rows. Throws EvaluationError when no query has a relevant item.
MapReport MeanAveragePrecision(std::span<const uint8_t> query_labels,
                               std::span<const uint8_t> retrieval_labels,
                               uint32_t categories,
                               const BinaryCodeMatrix& query_codes,
                               const BinaryCodeMatrix& retrieval_codes);

// Matches codes to label rows by id; every code id must exist in its set.
MapReport MeanAveragePrecision(const EmbeddingSet& query_set,
                               const EmbeddingSet& retrieval_set,
                               const BinaryCodeMatrix& query_codes,
                               const BinaryCodeMatrix& retrieval_codes);

// Tab-separated table, one row per report.
std::string FormatMapReport(const std::vector<MapReport>& reports);

}  // namespace mmhash

#endif  // MMHASH_EVALUATOR_H_
