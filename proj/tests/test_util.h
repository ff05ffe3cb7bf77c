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


#ifndef MMHASH_TESTS_TEST_UTIL_H_
#define MMHASH_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "mmhash/embedding.h"
#include "mmhash/rng.h"

namespace mmhash::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static uint64_t counter = 0;
    const auto base = std::filesystem::temp_directory_path();
    Rng rng(reinterpret_cast<uintptr_t>(this) ^ ++counter ^
            static_cast<uint64_t>(::getpid()));
    path_ = base / ("mmhash_test_" + std::to_string(rng.NextU64()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string File(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::vector<char> Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void Dump(const std::string& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// A valid labeled set with random shape and contents.
inline EmbeddingSet RandomSet(Rng& rng, size_t count,
                              std::vector<uint32_t> dims,
                              uint32_t categories) {
  EmbeddingSet set = MakeEmptySet(std::move(dims), categories);
  for (size_t m = 0; m < set.modality_dims.size(); ++m) {
    set.features[m].resize(count * set.modality_dims[m]);
    for (float& v : set.features[m]) v = static_cast<float>(rng.Normal());
  }
  set.labels.assign(count * categories, 0);
  for (size_t i = 0; i < count && categories > 0; ++i) {
    for (uint32_t c = 0; c < categories; ++c) {
      set.labels[i * categories + c] = static_cast<uint8_t>(rng.Below(2));
    }
    set.labels[i * categories + rng.Below(categories)] = 1;
  }
  for (size_t i = 0; i < count; ++i) set.ids.push_back(1000 + 7 * i);
  return set;
}

}  // namespace mmhash::testing

#endif  // MMHASH_TESTS_TEST_UTIL_H_
