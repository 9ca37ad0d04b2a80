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

#include "everysearch/catalog.h"

#include <cstdio>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include <json.hpp>

#include "everysearch/detail/binary_io.h"
#include "everysearch/error.h"

namespace everysearch {
namespace {

using nlohmann::json;

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t from_hex(const std::string& s) {
  std::size_t used = 0;
  const auto v = std::stoull(s, &used, 16);
  if (used != s.size()) throw std::invalid_argument("bad hex");
  return v;
}

}  // namespace

struct Catalog::Impl {
  mutable std::shared_mutex mutex;
  std::uint64_t next_seq = 0;
  std::map<std::uint64_t, IndexItem> ordered;
  std::unordered_map<std::string, std::uint64_t> seq_of;
  std::map<std::string, FileRecord, std::less<>> files;
  CatalogSettings settings;
};

Catalog::Catalog() : impl_(std::make_unique<Impl>()) {}
Catalog::Catalog(Catalog&&) noexcept = default;
Catalog& Catalog::operator=(Catalog&&) noexcept = default;
Catalog::~Catalog() = default;

void Catalog::upsert(IndexItem item) {
  std::unique_lock lock(impl_->mutex);
  auto it = impl_->seq_of.find(item.id);
  if (it != impl_->seq_of.end()) {
    impl_->ordered[it->second] = std::move(item);
    return;
  }
  const std::uint64_t seq = impl_->next_seq++;
  impl_->seq_of.emplace(item.id, seq);
  impl_->ordered.emplace(seq, std::move(item));
}

bool Catalog::erase(std::string_view id) {
  std::unique_lock lock(impl_->mutex);
  auto it = impl_->seq_of.find(std::string(id));
  if (it == impl_->seq_of.end()) return false;
  impl_->ordered.erase(it->second);
  impl_->seq_of.erase(it);
  return true;
}

std::optional<IndexItem> Catalog::find(std::string_view id) const {
  std::shared_lock lock(impl_->mutex);
  auto it = impl_->seq_of.find(std::string(id));
  if (it == impl_->seq_of.end()) return std::nullopt;
  return impl_->ordered.at(it->second);
}

bool Catalog::contains(std::string_view id) const {
  std::shared_lock lock(impl_->mutex);
  return impl_->seq_of.count(std::string(id)) != 0;
}

std::size_t Catalog::size() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->ordered.size();
}

std::vector<IndexItem> Catalog::items() const {
  std::shared_lock lock(impl_->mutex);
  std::vector<IndexItem> out;
  out.reserve(impl_->ordered.size());
  for (const auto& [seq, item] : impl_->ordered) out.push_back(item);
  return out;
}

void Catalog::for_each(const std::function<void(const IndexItem&)>& visit) const {
  std::shared_lock lock(impl_->mutex);
  for (const auto& [seq, item] : impl_->ordered) visit(item);
}

void Catalog::set_file(const std::string& path, FileRecord record) {
  std::unique_lock lock(impl_->mutex);
  impl_->files.insert_or_assign(path, std::move(record));
}

std::optional<FileRecord> Catalog::file(std::string_view path) const {
  std::shared_lock lock(impl_->mutex);
  auto it = impl_->files.find(path);
  if (it == impl_->files.end()) return std::nullopt;
  return it->second;
}

bool Catalog::erase_file(std::string_view path) {
  std::unique_lock lock(impl_->mutex);
  auto it = impl_->files.find(path);
  if (it == impl_->files.end()) return false;
  impl_->files.erase(it);
  return true;
}

std::vector<std::string> Catalog::file_paths() const {
  std::shared_lock lock(impl_->mutex);
  std::vector<std::string> out;
  out.reserve(impl_->files.size());
  for (const auto& [path, rec] : impl_->files) out.push_back(path);
  return out;
}

CatalogSettings Catalog::settings() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->settings;
}

void Catalog::set_settings(CatalogSettings settings) {
  std::unique_lock lock(impl_->mutex);
  impl_->settings = std::move(settings);
}

void Catalog::clear() {
  std::unique_lock lock(impl_->mutex);
  impl_->ordered.clear();
  impl_->seq_of.clear();
  impl_->files.clear();
  impl_->next_seq = 0;
}

void Catalog::save(const std::filesystem::path& path) const {
  json doc;
  {
    std::shared_lock lock(impl_->mutex);
    const CatalogSettings& s = impl_->settings;
    doc["version"] = 1;
    doc["settings"] = {{"root", s.root},
                       {"text_mode", s.text_mode},
                       {"body_lines", s.body_lines},
                       {"weights_fingerprint", to_hex(s.weights_fingerprint)}};
    json files = json::object();
    for (const auto& [p, rec] : impl_->files) {
      files[p] = {{"hash", to_hex(rec.content_hash)}, {"items", rec.item_ids}};
    }
    doc["files"] = std::move(files);
    json items = json::array();
    for (const auto& [seq, item] : impl_->ordered) {
      items.push_back({{"id", item.id},
                       {"kind", std::string(to_string(item.kind))},
                       {"name", item.display_name},
                       {"text", item.text_repr},
                       {"origin", item.origin_path}});
    }
    doc["items"] = std::move(items);
  }
  detail::write_file_atomic(path, doc.dump(1));
}

Catalog Catalog::load(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  Catalog catalog;
  try {
    const json doc = json::parse(text);
    if (doc.at("version").get<int>() != 1) {
      throw Error(ErrorCode::kUnsupportedVersion, path.string() + ": catalog version");
    }
    const json& s = doc.at("settings");
    CatalogSettings settings;
    settings.root = s.at("root").get<std::string>();
    settings.text_mode = s.at("text_mode").get<std::string>();
    settings.body_lines = s.at("body_lines").get<std::size_t>();
    settings.weights_fingerprint = from_hex(s.at("weights_fingerprint").get<std::string>());
    catalog.set_settings(std::move(settings));
    for (const auto& [p, rec] : doc.at("files").items()) {
      catalog.set_file(p, FileRecord{from_hex(rec.at("hash").get<std::string>()),
                                     rec.at("items").get<std::vector<std::string>>()});
    }
    for (const json& j : doc.at("items")) {
      const auto kind = parse_item_kind(j.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::kCorrupt, path.string() + ": unknown item kind");
      catalog.upsert(IndexItem{j.at("id").get<std::string>(), *kind, j.at("name").get<std::string>(),
                               j.at("text").get<std::string>(), j.at("origin").get<std::string>()});
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kCorrupt, path.string() + ": " + e.what());
  }
  return catalog;
}

}  // namespace everysearch
