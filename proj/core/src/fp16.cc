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

#include "everysearch/fp16.h"

#include <bit>
#include <cmath>

namespace everysearch {

std::uint16_t f16_encode(float value) noexcept {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  const std::uint32_t sign = (bits >> 16) & 0x8000u;
  const std::uint32_t mag = bits & 0x7FFFFFFFu;

  if (mag >= 0x7F800000u) {  // inf or NaN
    return static_cast<std::uint16_t>(sign | (mag > 0x7F800000u ? 0x7E00u : 0x7C00u));
  }
  // 65520 is the midpoint between 65504 (max half) and 2^16; it rounds to
  // even, which is infinity.
  if (mag >= 0x477FF000u) return static_cast<std::uint16_t>(sign | 0x7C00u);

  if (mag >= 0x38800000u) {  // normal half range, |x| >= 2^-14
    const std::uint32_t exponent = (mag >> 23) - 127 + 15;
    const std::uint32_t mantissa = mag & 0x7FFFFFu;
    std::uint32_t half = (exponent << 10) | (mantissa >> 13);
    const std::uint32_t rest = mantissa & 0x1FFFu;
    if (rest > 0x1000u || (rest == 0x1000u && (half & 1u))) ++half;  // may carry into exponent
    return static_cast<std::uint16_t>(sign | half);
  }

  // Subnormal half: units of 2^-24. Anything <= 2^-25 rounds to zero (the
  // tie at exactly 2^-25 goes to the even value 0).
  if (mag <= 0x33000000u) return static_cast<std::uint16_t>(sign);
  const std::uint32_t exponent = mag >> 23;
  const std::uint32_t mantissa = (mag & 0x7FFFFFu) | 0x800000u;
  const std::uint32_t shift = 126 - exponent;  // in [14, 24]
  std::uint32_t half = mantissa >> shift;
  const std::uint32_t rest = mantissa & ((1u << shift) - 1);
  const std::uint32_t midpoint = 1u << (shift - 1);
  if (rest > midpoint || (rest == midpoint && (half & 1u))) ++half;  // may become min normal
  return static_cast<std::uint16_t>(sign | half);
}

float f16_decode(std::uint16_t h) noexcept {
  const std::uint32_t sign = (std::uint32_t{h} & 0x8000u) << 16;
  const std::uint32_t exponent = (h >> 10) & 0x1Fu;
  const std::uint32_t mantissa = h & 0x3FFu;

  if (exponent == 0) {
    const float magnitude = std::ldexp(static_cast<float>(mantissa), -24);
    return sign ? -magnitude : magnitude;
  }
  if (exponent == 0x1F) {
    return std::bit_cast<float>(sign | 0x7F800000u | (mantissa << 13));
  }
  return std::bit_cast<float>(sign | ((exponent + 112) << 23) | (mantissa << 13));
}

void f16_encode(std::span<const float> in, std::span<std::uint16_t> out) noexcept {
  for (std::size_t i = 0; i < in.size() && i < out.size(); ++i) out[i] = f16_encode(in[i]);
}

void f16_decode(std::span<const std::uint16_t> in, std::span<float> out) noexcept {
  for (std::size_t i = 0; i < in.size() && i < out.size(); ++i) out[i] = f16_decode(in[i]);
}

}  // namespace everysearch
