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


// Little-endian byte buffers for the on-disk formats. Internal to the library.

#ifndef MMHASH_SRC_BINARY_IO_H_
#define MMHASH_SRC_BINARY_IO_H_

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "mmhash/errors.h"

namespace mmhash::internal {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

class ByteWriter {
 public:
  void Magic(std::string_view magic) {
    bytes_.insert(bytes_.end(), magic.begin(), magic.end());
  }

  template <typename T>
  void Put(T value) {
    std::array<char, sizeof(T)> raw;
    std::memcpy(raw.data(), &value, sizeof(T));
    bytes_.insert(bytes_.end(), raw.begin(), raw.end());
  }

  void PutBytes(const void* data, size_t size) {
    const auto* p = static_cast<const char*>(data);
    bytes_.insert(bytes_.end(), p, p + size);
  }

  const std::vector<char>& bytes() const { return bytes_; }

 private:
  std::vector<char> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  void ExpectMagic(std::string_view magic) {
    if (bytes_.size() < magic.size() ||
        std::string_view(bytes_.data(), magic.size()) != magic) {
      throw FormatError(FormatErrc::kBadMagic,
                        "expected magic '" + std::string(magic) + "'");
    }
    pos_ = magic.size();
  }

  template <typename T>
  T Get(const char* what) {
    Require(sizeof(T), what);
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  void GetBytes(void* out, size_t size, const char* what) {
    Require(size, what);
    if (size > 0) std::memcpy(out, bytes_.data() + pos_, size);
    pos_ += size;
  }

  void Require(size_t size, const char* what) const {
    if (size > bytes_.size() - pos_) {
      throw FormatError(FormatErrc::kTruncatedPayload,
                        std::string("file ends inside ") + what);
    }
  }

  size_t remaining() const { return bytes_.size() - pos_; }

  void ExpectEnd() const {
    if (remaining() != 0) {
      throw FormatError(FormatErrc::kInconsistentShape,
                        std::to_string(remaining()) +
                            " trailing bytes after declared payload");
    }
  }

 private:
  std::vector<char> bytes_;
  size_t pos_ = 0;
};

// Whole-file helpers; both throw FormatError(kIo) on failure.
std::vector<char> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, const std::vector<char>& bytes);

}  // namespace mmhash::internal

#endif  // MMHASH_SRC_BINARY_IO_H_
