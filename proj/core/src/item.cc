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

#include "everysearch/item.h"

namespace everysearch {

std::string_view to_string(ItemKind kind) noexcept {
  switch (kind) {
    case ItemKind::kFile: return "file";
    case ItemKind::kClass: return "class";
    case ItemKind::kSymbol: return "symbol";
    case ItemKind::kAction: return "action";
  }
  return "file";
}

std::optional<ItemKind> parse_item_kind(std::string_view name) noexcept {
  if (name == "file") return ItemKind::kFile;
  if (name == "class") return ItemKind::kClass;
  if (name == "symbol") return ItemKind::kSymbol;
  if (name == "action") return ItemKind::kAction;
  return std::nullopt;
}

std::string make_item_id(ItemKind kind, std::string_view relative_path,
                         std::string_view qualified_name) {
  std::string id(to_string(kind));
  id.push_back(':');
  id.append(relative_path);
  if (!qualified_name.empty()) {
    id.push_back(':');
    id.append(qualified_name);
  }
  return id;
}

IndexItem describe_item_id(std::string_view id) {
  IndexItem item;
  item.id = std::string(id);
  const auto colon = id.find(':');
  const auto kind = colon == std::string_view::npos ? std::nullopt
                                                    : parse_item_kind(id.substr(0, colon));
  if (!kind) {
    item.display_name = item.id;
    return item;
  }
  item.kind = *kind;
  std::string_view rest = id.substr(colon + 1);
  if (item.kind == ItemKind::kFile) {
    item.origin_path = std::string(rest);
    const auto slash = rest.rfind('/');
    item.display_name = std::string(slash == std::string_view::npos ? rest : rest.substr(slash + 1));
    return item;
  }
  const auto last = rest.rfind(':');
  std::string_view name = last == std::string_view::npos ? rest : rest.substr(last + 1);
  item.origin_path = std::string(last == std::string_view::npos ? std::string_view{} : rest.substr(0, last));
  if (const auto hash = name.rfind('#'); hash != std::string_view::npos) name = name.substr(0, hash);
  if (item.kind != ItemKind::kAction) {
    if (const auto dot = name.rfind('.'); dot != std::string_view::npos) name = name.substr(dot + 1);
  }
  item.display_name = std::string(name);
  return item;
}

}  // namespace everysearch
