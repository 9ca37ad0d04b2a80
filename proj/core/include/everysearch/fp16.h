// Copyright 2026 The EverySearch Authors.
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

#ifndef EVERYSEARCH_FP16_H_
#define EVERYSEARCH_FP16_H_

#include <cstdint>
#include <span>

namespace everysearch {

/// IEEE 754 binary16 encoding with round-to-nearest-even. Values beyond the
/// half range become +/-infinity; subnormal halves are produced where exact
/// rounding requires them. NaN maps to the canonical quiet NaN 0x7E00.
std::uint16_t f16_encode(float value) noexcept;

/// Exact widening of a binary16 bit pattern to float.
float f16_decode(std::uint16_t bits) noexcept;

void f16_encode(std::span<const float> in, std::span<std::uint16_t> out) noexcept;
void f16_decode(std::span<const std::uint16_t> in, std::span<float> out) noexcept;

/// Rounds through binary16 and back.
inline float f16_round(float value) noexcept {
  return f16_decode(f16_encode(value));
}

}  // namespace everysearch

#endif  // EVERYSEARCH_FP16_H_
