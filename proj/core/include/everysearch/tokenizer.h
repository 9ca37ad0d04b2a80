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

#ifndef EVERYSEARCH_TOKENIZER_H_
#define EVERYSEARCH_TOKENIZER_H_

#include <string>
#include <string_view>
#include <vector>

namespace everysearch {

/// Ordered lowercase word tokens. Never contains empty strings.
using TokenSequence = std::vector<std::string>;

/// Splits an identifier into lowercase words.
///
/// Boundaries: any non-alphanumeric character (underscore, hyphen, dot,
/// whitespace, punctuation), lower->upper transitions ("getUser"), the last
/// capital of an upper-case run that is followed by a lower-case letter
/// ("HTTPServer" -> "http", "server") and letter<->digit transitions.
/// Non-ASCII letters are word characters and are lowercased with simple case
/// folding (Latin-1, Latin Extended-A, Greek and Cyrillic). Input is UTF-8;
/// malformed bytes act as separators.
TokenSequence split_identifier(std::string_view name);

/// Normalizes free-text queries with the same rules as identifiers so that
/// queries and items share one token space.
TokenSequence normalize_query(std::string_view query);

/// Space-joined rendering of a token sequence.
std::string join_tokens(const TokenSequence& tokens);

/// Simple case folding of a single code point (identity outside the
/// supported scripts).
char32_t fold_case(char32_t cp) noexcept;

/// Case-insensitive UTF-8 substring test using fold_case.
bool contains_case_insensitive(std::string_view haystack,
                               std::string_view needle);

}  // namespace everysearch

#endif  // EVERYSEARCH_TOKENIZER_H_
