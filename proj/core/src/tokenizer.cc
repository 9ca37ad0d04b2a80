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

#include "everysearch/tokenizer.h"

#include <cstdint>

namespace everysearch {
namespace {

enum class CharClass { kSeparator, kUpper, kLower, kCaseless, kDigit };

constexpr char32_t kReplacement = 0xFFFD;

// Decodes one UTF-8 sequence starting at `pos`, advancing it. Malformed or
// overlong sequences decode to U+FFFD and consume a single byte.
char32_t next_code_point(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + len > s.size()) {
    ++pos;
    return kReplacement;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kReplacement;
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Upper -> lower for the supported scripts; identity elsewhere.
char32_t to_lower(char32_t cp) noexcept {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x100 && cp <= 0x137 && cp != 0x130) return cp | 1;
  if (cp >= 0x139 && cp <= 0x148) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return cp | 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp & 1) ? cp + 1 : cp;
  if (cp == 0x386) return 0x3AC;
  if (cp >= 0x388 && cp <= 0x38A) return cp + 0x25;
  if (cp == 0x38C) return 0x3CC;
  if (cp == 0x38E || cp == 0x38F) return cp + 0x3F;
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x460 && cp <= 0x481) return cp | 1;
  if (cp >= 0x48A && cp <= 0x4BF) return cp | 1;
  return cp;
}

// Lower -> upper, the inverse of to_lower on its image.
char32_t to_upper(char32_t cp) noexcept {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') ? cp - 0x20 : cp;
  if (cp >= 0xE0 && cp <= 0xFE && cp != 0xF7) return cp - 0x20;
  if (cp == 0xFF) return 0x178;
  if (cp >= 0x101 && cp <= 0x137 && cp != 0x131) return (cp & 1) ? cp - 1 : cp;
  if (cp >= 0x13A && cp <= 0x148) return (cp & 1) ? cp : cp - 1;
  if (cp >= 0x14B && cp <= 0x177) return (cp & 1) ? cp - 1 : cp;
  if (cp >= 0x17A && cp <= 0x17E) return (cp & 1) ? cp : cp - 1;
  if (cp == 0x3AC) return 0x386;
  if (cp >= 0x3AD && cp <= 0x3AF) return cp - 0x25;
  if (cp == 0x3CC) return 0x38C;
  if (cp == 0x3CD || cp == 0x3CE) return cp - 0x3F;
  if (cp >= 0x3B1 && cp <= 0x3CB && cp != 0x3C2) return cp - 0x20;
  if (cp >= 0x430 && cp <= 0x44F) return cp - 0x20;
  if (cp >= 0x450 && cp <= 0x45F) return cp - 0x50;
  if (cp >= 0x461 && cp <= 0x481) return (cp & 1) ? cp - 1 : cp;
  if (cp >= 0x48B && cp <= 0x4BF) return (cp & 1) ? cp - 1 : cp;
  return cp;
}

bool is_separator(char32_t cp) noexcept {
  if (cp < 0x80) {
    return !((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') ||
             (cp >= 'A' && cp <= 'Z'));
  }
  if (cp <= 0xBF) return cp != 0xAA && cp != 0xB5 && cp != 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return true;
  if (cp >= 0x2000 && cp <= 0x2BFF) return true;  // punctuation, symbols, arrows
  if (cp >= 0x3000 && cp <= 0x303F) return true;  // CJK punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return true;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return true;
  if (cp == 0xFEFF || cp == kReplacement) return true;
  return false;
}

CharClass classify(char32_t cp) noexcept {
  if (is_separator(cp)) return CharClass::kSeparator;
  if (cp >= '0' && cp <= '9') return CharClass::kDigit;
  if (to_lower(cp) != cp) return CharClass::kUpper;
  if (to_upper(cp) != cp) return CharClass::kLower;
  return CharClass::kCaseless;
}

bool lowerish(CharClass c) noexcept {
  return c == CharClass::kLower || c == CharClass::kCaseless;
}

std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) out.push_back(next_code_point(s, pos));
  return out;
}

}  // namespace

char32_t fold_case(char32_t cp) noexcept { return to_lower(cp); }

TokenSequence split_identifier(std::string_view name) {
  const std::vector<char32_t> cps = decode(name);
  std::vector<CharClass> cls(cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i) cls[i] = classify(cps[i]);

  TokenSequence tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };

  for (std::size_t i = 0; i < cps.size(); ++i) {
    const CharClass c = cls[i];
    if (c == CharClass::kSeparator) {
      flush();
      continue;
    }
    if (!current.empty()) {
      const CharClass p = cls[i - 1];
      const bool digit_edge = (p == CharClass::kDigit) != (c == CharClass::kDigit);
      const bool camel = lowerish(p) && c == CharClass::kUpper;
      const bool acronym_end = p == CharClass::kUpper && c == CharClass::kUpper &&
                               i + 1 < cps.size() && lowerish(cls[i + 1]);
      if (digit_edge || camel || acronym_end) flush();
    }
    append_utf8(current, to_lower(cps[i]));
  }
  flush();
  return tokens;
}

TokenSequence normalize_query(std::string_view query) {
  // Whitespace runs are separators, so they collapse naturally.
  return split_identifier(query);
}

std::string join_tokens(const TokenSequence& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

bool contains_case_insensitive(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  std::vector<char32_t> h = decode(haystack);
  std::vector<char32_t> n = decode(needle);
  for (auto& cp : h) cp = to_lower(cp);
  for (auto& cp : n) cp = to_lower(cp);
  if (n.size() > h.size()) return false;
  for (std::size_t i = 0; i + n.size() <= h.size(); ++i) {
    std::size_t j = 0;
    while (j < n.size() && h[i + j] == n[j]) ++j;
    if (j == n.size()) return true;
  }
  return false;
}

}  // namespace everysearch
