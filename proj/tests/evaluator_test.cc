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

#include <numeric>

#include <gtest/gtest.h>

#include "mmhash/errors.h"
#include "mmhash/rng.h"
#include "oracles.h"

namespace mmhash {
namespace {

using oracle::LabelRows;
using oracle::SignRows;

TEST(RelevanceTest, SharedLabel) {
  EXPECT_TRUE(Relevant(std::vector<uint8_t>{1, 0, 1},
                       std::vector<uint8_t>{0, 0, 1}));
  EXPECT_FALSE(Relevant(std::vector<uint8_t>{1, 0, 0},
                        std::vector<uint8_t>{0, 1, 1}));
  EXPECT_FALSE(Relevant(std::vector<uint8_t>{0, 0, 0},
                        std::vector<uint8_t>{1, 1, 1}));
  EXPECT_THROW(Relevant(std::vector<uint8_t>{1}, std::vector<uint8_t>{1, 0}),
               ShapeError);
}

TEST(AveragePrecisionTest, HandCases) {
  EXPECT_DOUBLE_EQ(AveragePrecision(std::vector<uint64_t>{3, 1, 2}, {1, 2, 3}),
                   1.0);
  // [rel, non, rel]: (1/1 + 2/3) / 2
  EXPECT_NEAR(AveragePrecision(std::vector<uint64_t>{7, 8, 9}, {7, 9}),
              5.0 / 6.0, 1e-15);
  for (uint64_t m : {1u, 2u, 10u, 999u}) {
    std::vector<uint64_t> ranking(m);
    std::iota(ranking.begin(), ranking.end(), 0);
    EXPECT_DOUBLE_EQ(AveragePrecision(ranking, {m - 1}), 1.0 / double(m));
  }
  EXPECT_THROW(AveragePrecision(std::vector<uint64_t>{1}, {}), ArgumentError);
}

TEST(AveragePrecisionTest, MovingARelevantItemUpNeverHurts) {
  Rng rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const size_t m = 2 + rng.Below(30);
    std::vector<uint64_t> ranking(m);
    std::iota(ranking.begin(), ranking.end(), 0);
    rng.Shuffle(std::span<uint64_t>(ranking));
    std::unordered_set<uint64_t> relevant;
    for (uint64_t id = 0; id < m; ++id) {
      if (rng.Below(3) == 0) relevant.insert(id);
    }
    relevant.insert(rng.Below(m));
    const size_t p = 1 + rng.Below(m - 1);
    if (!relevant.contains(ranking[p])) continue;
    const double before = AveragePrecision(ranking, relevant);
    std::swap(ranking[p], ranking[p - 1]);
    EXPECT_GE(AveragePrecision(ranking, relevant), before - 1e-15);
  }
}

struct Instance {
  SignRows query_codes, item_codes;
  LabelRows query_labels, item_labels;
  std::vector<uint64_t> query_ids, item_ids;
  uint32_t bits = 16;
  uint32_t categories = 4;
};

Instance RandomInstance(Rng& rng, size_t queries, size_t items, uint32_t bits,
                        uint32_t categories) {
  Instance in;
  in.bits = bits;
  in.categories = categories;
  auto fill = [&](size_t count, SignRows& codes, LabelRows& labels,
                  std::vector<uint64_t>& ids, uint64_t id_base) {
    for (size_t i = 0; i < count; ++i) {
      std::vector<int8_t> code(bits);
      for (auto& v : code) v = rng.Below(2) ? 1 : -1;
      codes.push_back(code);
      std::vector<uint8_t> row(categories);
      for (auto& v : row) v = rng.Below(4) == 0;
      labels.push_back(row);
      ids.push_back(id_base + i);
    }
    rng.Shuffle(std::span<uint64_t>(ids));
  };
  fill(queries, in.query_codes, in.query_labels, in.query_ids, 100000);
  fill(items, in.item_codes, in.item_labels, in.item_ids, 0);
  return in;
}

std::vector<uint8_t> Flatten(const LabelRows& rows) {
  std::vector<uint8_t> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

MapReport PipelineMap(const Instance& in) {
  return MeanAveragePrecision(
      Flatten(in.query_labels), Flatten(in.item_labels), in.categories,
      PackCodes(in.query_codes, in.query_ids, in.bits),
      PackCodes(in.item_codes, in.item_ids, in.bits));
}

TEST(MeanAveragePrecisionTest, MatchesNaiveOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance in = RandomInstance(rng, 20, 50, 16, 4);
    const double want = oracle::NaiveMap(in.query_codes, in.query_labels,
                                         in.item_codes, in.item_labels,
                                         in.item_ids);
    ASSERT_GE(want, 0.0);
    EXPECT_NEAR(PipelineMap(in).map, want, 1e-12);
  }
}

TEST(MeanAveragePrecisionTest, DegenerateAllRelevant) {
  Instance in;
  in.bits = 16;
  in.categories = 1;
  for (uint64_t i = 0; i < 5; ++i) {
    in.query_codes.push_back(std::vector<int8_t>(16, 1));
    in.query_labels.push_back({1});
    in.query_ids.push_back(100 + i);
  }
  for (uint64_t i = 0; i < 8; ++i) {
    in.item_codes.push_back(std::vector<int8_t>(16, 1));
    in.item_labels.push_back({1});
    in.item_ids.push_back(i);
  }
  const MapReport r = PipelineMap(in);
  EXPECT_EQ(r.map, 1.0);
  EXPECT_EQ(r.evaluated_queries, 5u);
  EXPECT_EQ(r.mean_relevant, 8.0);
}

TEST(MeanAveragePrecisionTest, PerfectCodesScoreOne) {
  // Code = one-hot class pattern, so relevant items sit at distance 0.
  Rng rng(3);
  Instance in;
  in.bits = 16;
  in.categories = 4;
  auto add = [&](SignRows& codes, LabelRows& labels,
                 std::vector<uint64_t>& ids, uint64_t id, uint32_t cls) {
    std::vector<int8_t> code(16, -1);
    for (uint32_t b = 0; b < 4; ++b) code[cls * 4 + b] = 1;
    codes.push_back(code);
    std::vector<uint8_t> row(4, 0);
    row[cls] = 1;
    labels.push_back(row);
    ids.push_back(id);
  };
  for (uint64_t i = 0; i < 40; ++i) {
    add(in.item_codes, in.item_labels, in.item_ids, i, rng.Below(4));
  }
  for (uint64_t i = 0; i < 10; ++i) {
    add(in.query_codes, in.query_labels, in.query_ids, 1000 + i, i % 4);
  }
  EXPECT_EQ(PipelineMap(in).map, 1.0);
}

TEST(MeanAveragePrecisionTest, QueriesWithoutRelevantItemsAreExcluded) {
  Rng rng(4);
  Instance in = RandomInstance(rng, 6, 30, 16, 3);
  for (auto& row : in.item_labels) row = {1, 1, 0};
  in.query_labels[2] = {0, 0, 1};
  in.query_labels[4] = {0, 0, 1};
  in.query_labels[0] = {1, 0, 0};
  for (size_t q : {1, 3, 5}) in.query_labels[q] = {0, 1, 1};
  const MapReport r = PipelineMap(in);
  EXPECT_EQ(r.excluded_queries, 2u);
  EXPECT_EQ(r.evaluated_queries, 4u);
  EXPECT_NEAR(r.map,
              oracle::NaiveMap(in.query_codes, in.query_labels, in.item_codes,
                               in.item_labels, in.item_ids),
              1e-12);

  for (auto& row : in.query_labels) row = {0, 0, 1};
  EXPECT_THROW(PipelineMap(in), EvaluationError);
}

TEST(MeanAveragePrecisionTest, CodeLengthMismatchThrows) {
  Rng rng(5);
  const Instance in = RandomInstance(rng, 3, 5, 16, 2);
  SignRows wide = in.item_codes;
  for (auto& row : wide) row.resize(32, 1);
  EXPECT_THROW(MeanAveragePrecision(Flatten(in.query_labels),
                                    Flatten(in.item_labels), 2,
                                    PackCodes(in.query_codes, in.query_ids, 16),
                                    PackCodes(wide, in.item_ids, 32)),
               ShapeError);
}

TEST(MeanAveragePrecisionTest, SetOverloadAlignsLabelsById) {
  Rng rng(6);
  const Instance in = RandomInstance(rng, 10, 40, 32, 3);
  // Build sets whose rows are in a different order from the codes.
  auto make_set = [&](const LabelRows& labels, const std::vector<uint64_t>& ids) {
    EmbeddingSet set = MakeEmptySet({1}, 3);
    for (size_t i = labels.size(); i-- > 0;) {
      std::vector<uint8_t> row = labels[i];
      if (std::count(row.begin(), row.end(), 1) == 0) row[0] = 1;
      set.labels.insert(set.labels.end(), row.begin(), row.end());
      set.features[0].push_back(0.0f);
      set.ids.push_back(ids[i]);
    }
    return set;
  };
  Instance fixed = in;
  for (auto* rows : {&fixed.query_labels, &fixed.item_labels}) {
    for (auto& row : *rows) {
      if (std::count(row.begin(), row.end(), 1) == 0) row[0] = 1;
    }
  }
  const MapReport r = MeanAveragePrecision(
      make_set(in.query_labels, in.query_ids),
      make_set(in.item_labels, in.item_ids),
      PackCodes(in.query_codes, in.query_ids, 32),
      PackCodes(in.item_codes, in.item_ids, 32));
  EXPECT_NEAR(r.map,
              oracle::NaiveMap(fixed.query_codes, fixed.query_labels,
                               fixed.item_codes, fixed.item_labels,
                               fixed.item_ids),
              1e-12);
}

TEST(MapReportTest, Format) {
  const std::string text = FormatMapReport({{16, 0.5, 10, 2, 12.25}});
  EXPECT_EQ(text,
            "bits\tmAP\tqueries\texcluded\tmean_relevant\n"
            "16\t0.500000\t10\t2\t12.250\n");
}

}  // namespace
}  // namespace mmhash
