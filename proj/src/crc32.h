// Copyright 2026 The ZSDC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZSDC_SRC_CRC32_H_
#define ZSDC_SRC_CRC32_H_

#include <zlib.h>

#include <cstdint>
#include <span>

namespace zsdc::internal {

// IEEE CRC32, chainable through `crc`.
inline uint32_t Crc32(std::span<const uint8_t> bytes, uint32_t crc = 0) {
  // zlib takes uInt lengths; feed large inputs in chunks.
  constexpr size_t kChunk = 1u << 30;
  while (!bytes.empty()) {
    const size_t n = bytes.size() < kChunk ? bytes.size() : kChunk;
    crc = static_cast<uint32_t>(
        ::crc32(crc, bytes.data(), static_cast<uInt>(n)));
    bytes = bytes.subspan(n);
  }
  return crc;
}

}  // namespace zsdc::internal

#endif  // ZSDC_SRC_CRC32_H_
