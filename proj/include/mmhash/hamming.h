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


// Bit-packed binary codes and exact Hamming-distance search.
//
// Bit i of a code lives in word i / 64 at bit position i % 64; bits past k in
// the last word are zero. Rankings order items by (distance, id) ascending.

#ifndef MMHASH_HAMMING_H_
#define MMHASH_HAMMING_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mmhash {

inline constexpr uint32_t kCodeFileVersion = 1;

inline constexpr size_t WordsPerCode(size_t bits) { return (bits + 63) / 64; }

struct CodeRef {
  std::span<const uint64_t> words;
  uint32_t bits = 0;
};

struct BinaryCodeMatrix {
  uint32_t bits = 0;
  std::vector<uint64_t> words;  // count x WordsPerCode(bits)
  std::vector<uint64_t> ids;

  size_t count() const { return ids.size(); }
  size_t words_per_code() const { return WordsPerCode(bits); }
  CodeRef Code(size_t index) const;
  // Position of `id`, or count() when absent.
  size_t Find(uint64_t id) const;

  bool operator==(const BinaryCodeMatrix&) const = default;
};

// Throws ShapeError/FormatError when the word count is off, padding bits are
// set or ids repeat.
void ValidateCodes(const BinaryCodeMatrix& codes);

// Rows of +1/-1 values; +1 becomes bit 1. Every row must have `bits` entries.
BinaryCodeMatrix PackCodes(const std::vector<std::vector<int8_t>>& signs,
                           std::vector<uint64_t> ids, uint32_t bits);
// Rows of 0/1 bits, as produced by Binarize().
BinaryCodeMatrix PackBits(const std::vector<std::vector<uint8_t>>& rows,
                          std::vector<uint64_t> ids, uint32_t bits);
std::vector<int8_t> UnpackCode(CodeRef code);

// Popcount of the XOR. Throws ShapeError when the code lengths differ.
uint32_t HammingDistance(CodeRef a, CodeRef b);

struct Neighbor {
  uint64_t id = 0;
  uint32_t distance = 0;

  bool operator==(const Neighbor&) const = default;
};

using SearchResult = std::vector<Neighbor>;

// Exact linear-scan index over an immutable code matrix. Safe to query
// from several threads.
class LinearScanIndex {
 public:
  explicit LinearScanIndex(BinaryCodeMatrix codes);

  const BinaryCodeMatrix& codes() const { return codes_; }

  // The `topk` nearest codes. Throws ArgumentError for topk == 0 or an empty
  // index, ShapeError on a code-length mismatch.
  SearchResult Search(CodeRef query, size_t topk) const;

  // Row positions of every indexed code in ranking order, via a counting
  // sort on distance over the id-sorted rows.
  std::vector<uint32_t> RankPositions(CodeRef query) const;

 private:
  BinaryCodeMatrix codes_;
  std::vector<uint32_t> by_id_;  // row positions sorted by id
};

SearchResult SearchTopK(const BinaryCodeMatrix& index, CodeRef query,
                        size_t topk);

// Full ranking of the index for every query, in query order.
std::vector<SearchResult> RankAll(const BinaryCodeMatrix& index,
                                  const BinaryCodeMatrix& queries);

// Code file "CMHC": "CMHC" | u32 version (=1) | u64 count | u32 k
// | u64 words, count x ceil(k/64) | u64 ids x count. Little-endian.
std::vector<char> EncodeCodeFile(const BinaryCodeMatrix& codes);
BinaryCodeMatrix DecodeCodeFile(std::vector<char> bytes);
void WriteCodeFile(const BinaryCodeMatrix& codes, const std::string& path);
BinaryCodeMatrix ReadCodeFile(const std::string& path);

}  // namespace mmhash

#endif  // MMHASH_HAMMING_H_
