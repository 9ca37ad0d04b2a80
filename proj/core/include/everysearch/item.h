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

#ifndef EVERYSEARCH_ITEM_H_
#define EVERYSEARCH_ITEM_H_

#include <optional>
#include <string>
#include <string_view>

namespace everysearch {

enum class ItemKind { kFile, kClass, kSymbol, kAction };

/// "file", "class", "symbol", "action".
std::string_view to_string(ItemKind kind) noexcept;
std::optional<ItemKind> parse_item_kind(std::string_view name) noexcept;

/// One searchable entity. `id` is `kind:relative-path[:qualified-name]`.
struct IndexItem {
  std::string id;
  ItemKind kind = ItemKind::kFile;
  std::string display_name;
  std::string text_repr;
  std::string origin_path;

  friend bool operator==(const IndexItem&, const IndexItem&) = default;
};

std::string make_item_id(ItemKind kind, std::string_view relative_path,
                         std::string_view qualified_name = {});

/// Best-effort metadata for an id that is not (yet) in a catalog: the kind
/// comes from the prefix, the name from the last id component.
IndexItem describe_item_id(std::string_view id);

}  // namespace everysearch

#endif  // EVERYSEARCH_ITEM_H_
