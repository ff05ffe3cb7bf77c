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


#include "mmhash/hamming.h"

#include <algorithm>
#include <bit>
#include <numeric>
#include <queue>
#include <unordered_set>

#include "binary_io.h"
#include "mmhash/errors.h"

namespace mmhash {
namespace {

constexpr char kCodeMagic[] = "CMHC";

uint64_t PaddingMask(uint32_t bits) {
  const uint32_t used = bits % 64;
  return used == 0 ? 0 : ~uint64_t{0} << used;
}

void CheckBits(uint32_t bits) {
  if (bits == 0) throw ArgumentError("code length must be positive");
}

template <typename Row, typename IsSet>
BinaryCodeMatrix Pack(const std::vector<Row>& rows, std::vector<uint64_t> ids,
                      uint32_t bits, IsSet is_set) {
  CheckBits(bits);
  if (rows.size() != ids.size()) {
    throw ShapeError("code row count differs from id count");
  }
  BinaryCodeMatrix out;
  out.bits = bits;
  out.ids = std::move(ids);
  const size_t wpc = out.words_per_code();
  out.words.assign(rows.size() * wpc, 0);
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != bits) {
      throw ShapeError("code row " + std::to_string(r) + " has " +
                       std::to_string(rows[r].size()) + " entries, expected " +
                       std::to_string(bits));
    }
    uint64_t* dst = out.words.data() + r * wpc;
    for (uint32_t i = 0; i < bits; ++i) {
      if (is_set(rows[r][i])) dst[i / 64] |= uint64_t{1} << (i % 64);
    }
  }
  ValidateCodes(out);
  return out;
}

}  // namespace

CodeRef BinaryCodeMatrix::Code(size_t index) const {
  if (index >= count()) {
    throw ArgumentError("code index " + std::to_string(index) +
                        " out of range");
  }
  const size_t wpc = words_per_code();
  return {std::span<const uint64_t>(words).subspan(index * wpc, wpc), bits};
}

size_t BinaryCodeMatrix::Find(uint64_t id) const {
  return static_cast<size_t>(std::find(ids.begin(), ids.end(), id) -
                             ids.begin());
}

void ValidateCodes(const BinaryCodeMatrix& codes) {
  CheckBits(codes.bits);
  const size_t wpc = codes.words_per_code();
  if (codes.words.size() != codes.count() * wpc) {
    throw ShapeError("code matrix holds " +
                     std::to_string(codes.words.size()) + " words, expected " +
                     std::to_string(codes.count() * wpc));
  }
  const uint64_t mask = PaddingMask(codes.bits);
  for (size_t i = 0; i < codes.count() && mask != 0; ++i) {
    if (codes.words[i * wpc + wpc - 1] & mask) {
      throw FormatError(FormatErrc::kInvariantViolation,
                        "padding bits set in code of id " +
                            std::to_string(codes.ids[i]));
    }
  }
  std::unordered_set<uint64_t> seen;
  seen.reserve(codes.count());
  for (uint64_t id : codes.ids) {
    if (!seen.insert(id).second) {
      throw FormatError(FormatErrc::kInvariantViolation,
                        "duplicate id " + std::to_string(id));
    }
  }
}

BinaryCodeMatrix PackCodes(const std::vector<std::vector<int8_t>>& signs,
                           std::vector<uint64_t> ids, uint32_t bits) {
  return Pack(signs, std::move(ids), bits, [](int8_t v) {
    if (v != 1 && v != -1) throw ArgumentError("sign entries must be +1/-1");
    return v == 1;
  });
}

BinaryCodeMatrix PackBits(const std::vector<std::vector<uint8_t>>& rows,
                          std::vector<uint64_t> ids, uint32_t bits) {
  return Pack(rows, std::move(ids), bits, [](uint8_t v) {
    if (v > 1) throw ArgumentError("bit entries must be 0/1");
    return v == 1;
  });
}

std::vector<int8_t> UnpackCode(CodeRef code) {
  std::vector<int8_t> signs(code.bits);
  for (uint32_t i = 0; i < code.bits; ++i) {
    signs[i] = (code.words[i / 64] >> (i % 64)) & 1 ? 1 : -1;
  }
  return signs;
}

uint32_t HammingDistance(CodeRef a, CodeRef b) {
  if (a.bits != b.bits || a.words.size() != b.words.size()) {
    throw ShapeError("code length mismatch: " + std::to_string(a.bits) +
                     " vs " + std::to_string(b.bits));
  }
  uint32_t distance = 0;
  for (size_t w = 0; w < a.words.size(); ++w) {
    distance += static_cast<uint32_t>(std::popcount(a.words[w] ^ b.words[w]));
  }
  return distance;
}

LinearScanIndex::LinearScanIndex(BinaryCodeMatrix codes)
    : codes_(std::move(codes)) {
  ValidateCodes(codes_);
  by_id_.resize(codes_.count());
  std::iota(by_id_.begin(), by_id_.end(), 0u);
  std::sort(by_id_.begin(), by_id_.end(), [this](uint32_t a, uint32_t b) {
    return codes_.ids[a] < codes_.ids[b];
  });
}

SearchResult LinearScanIndex::Search(CodeRef query, size_t topk) const {
  if (topk == 0) throw ArgumentError("topk must be >= 1");
  if (codes_.count() == 0) throw ArgumentError("search on an empty index");
  if (query.bits != codes_.bits) {
    throw ShapeError("query has " + std::to_string(query.bits) +
                     " bits, index has " + std::to_string(codes_.bits));
  }
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  };
  // Max-heap on (distance, id) holding the best `topk` seen so far.
  std::priority_queue<Neighbor, std::vector<Neighbor>, decltype(closer)> heap(
      closer);
  for (size_t i = 0; i < codes_.count(); ++i) {
    const Neighbor candidate{codes_.ids[i],
                             HammingDistance(query, codes_.Code(i))};
    if (heap.size() < topk) {
      heap.push(candidate);
    } else if (closer(candidate, heap.top())) {
      heap.pop();
      heap.push(candidate);
    }
  }
  SearchResult result(heap.size());
  for (size_t i = result.size(); i > 0; --i) {
    result[i - 1] = heap.top();
    heap.pop();
  }
  return result;
}

std::vector<uint32_t> LinearScanIndex::RankPositions(CodeRef query) const {
  if (query.bits != codes_.bits) {
    throw ShapeError("query has " + std::to_string(query.bits) +
                     " bits, index has " + std::to_string(codes_.bits));
  }
  const size_t count = codes_.count();
  std::vector<uint32_t> distances(count);
  for (size_t i = 0; i < count; ++i) {
    distances[i] = HammingDistance(query, codes_.Code(i));
  }
  std::vector<size_t> starts(codes_.bits + 2, 0);
  for (uint32_t d : distances) ++starts[d + 1];
  std::partial_sum(starts.begin(), starts.end(), starts.begin());
  std::vector<uint32_t> ranked(count);
  for (uint32_t pos : by_id_) ranked[starts[distances[pos]]++] = pos;
  return ranked;
}

SearchResult SearchTopK(const BinaryCodeMatrix& index, CodeRef query,
                        size_t topk) {
  return LinearScanIndex(index).Search(query, topk);
}

std::vector<SearchResult> RankAll(const BinaryCodeMatrix& index,
                                  const BinaryCodeMatrix& queries) {
  if (index.bits != queries.bits) {
    throw ShapeError("query codes have " + std::to_string(queries.bits) +
                     " bits, index has " + std::to_string(index.bits));
  }
  const LinearScanIndex scan(index);
  std::vector<SearchResult> rankings(queries.count());
  for (size_t q = 0; q < queries.count(); ++q) {
    const CodeRef query = queries.Code(q);
    const std::vector<uint32_t> order = scan.RankPositions(query);
    SearchResult& ranking = rankings[q];
    ranking.reserve(order.size());
    for (uint32_t pos : order) {
      ranking.push_back({index.ids[pos], HammingDistance(query, index.Code(pos))});
    }
  }
  return rankings;
}

std::vector<char> EncodeCodeFile(const BinaryCodeMatrix& codes) {
  ValidateCodes(codes);
  internal::ByteWriter w;
  w.Magic(kCodeMagic);
  w.Put<uint32_t>(kCodeFileVersion);
  w.Put<uint64_t>(codes.count());
  w.Put<uint32_t>(codes.bits);
  w.PutBytes(codes.words.data(), codes.words.size() * sizeof(uint64_t));
  w.PutBytes(codes.ids.data(), codes.ids.size() * sizeof(uint64_t));
  return w.bytes();
}

BinaryCodeMatrix DecodeCodeFile(std::vector<char> bytes) {
  internal::ByteReader r(std::move(bytes));
  r.ExpectMagic(kCodeMagic);
  const auto version = r.Get<uint32_t>("version");
  if (version != kCodeFileVersion) {
    throw FormatError(FormatErrc::kVersionMismatch,
                      "CMHC version " + std::to_string(version));
  }
  const auto count = r.Get<uint64_t>("count");
  BinaryCodeMatrix codes;
  codes.bits = r.Get<uint32_t>("k");
  if (codes.bits == 0) {
    throw FormatError(FormatErrc::kInconsistentShape, "code length 0");
  }
  const uint64_t per_code = codes.words_per_code() + 1;  // words + id
  if (count > r.remaining() / (per_code * sizeof(uint64_t))) {
    throw FormatError(FormatErrc::kTruncatedPayload,
                      "file ends inside code payload");
  }
  codes.words.resize(count * codes.words_per_code());
  r.GetBytes(codes.words.data(), codes.words.size() * sizeof(uint64_t),
             "code words");
  codes.ids.resize(count);
  r.GetBytes(codes.ids.data(), count * sizeof(uint64_t), "ids");
  r.ExpectEnd();
  ValidateCodes(codes);
  return codes;
}

void WriteCodeFile(const BinaryCodeMatrix& codes, const std::string& path) {
  internal::WriteFileBytes(path, EncodeCodeFile(codes));
}

BinaryCodeMatrix ReadCodeFile(const std::string& path) {
  return DecodeCodeFile(internal::ReadFileBytes(path));
}

}  // namespace mmhash
