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

#ifndef ZSDC_UUID_H_
#define ZSDC_UUID_H_

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "zsdc/rng.h"

namespace zsdc {

struct Uuid {
  std::array<uint8_t, 16> bytes{};

  // Version-4 layout built from two 64-bit words.
  static Uuid FromWords(uint64_t hi, uint64_t lo);
  // Canonical 8-4-4-4-12 lowercase hex; kFormat on anything else.
  static Uuid Parse(std::string_view text);

  std::string ToString() const;

  auto operator<=>(const Uuid&) const = default;
};

// Seeded source of fresh UUIDs; deterministic runs use a fixed seed.
class UuidGenerator {
 public:
  explicit UuidGenerator(uint64_t seed) : rng_(seed) {}
  Uuid Next() {
    const uint64_t hi = rng_.Next();
    return Uuid::FromWords(hi, rng_.Next());
  }

 private:
  Rng rng_;
};

}  // namespace zsdc

template <>
struct std::hash<zsdc::Uuid> {
  size_t operator()(const zsdc::Uuid& u) const noexcept {
    uint64_t h = 0;
    for (uint8_t b : u.bytes) h = h * 1099511628211ull ^ b;
    return static_cast<size_t>(h);
  }
};

#endif  // ZSDC_UUID_H_
