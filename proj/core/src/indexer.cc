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

#include "everysearch/indexer.h"

#include <fnmatch.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "everysearch/detail/binary_io.h"
#include "everysearch/error.h"
#include "everysearch/hash.h"
#include "everysearch/tokenizer.h"

namespace everysearch {
namespace {

constexpr std::string_view kActionsFile = "actions.tsv";

struct LanguageRules {
  std::vector<std::string_view> class_keywords;
  std::vector<std::string_view> symbol_keywords;
  std::vector<std::string_view> modifiers;
  bool go_declarations = false;
  bool rust_impl_scopes = false;
};

const LanguageRules* rules_for(std::string_view extension) {
  static const LanguageRules python{{"class"}, {"def"}, {"async"}};
  static const LanguageRules rust{{"struct", "enum", "trait", "union"},
                                  {"fn"},
                                  {"pub", "async", "unsafe", "const", "extern", "default"},
                                  false,
                                  true};
  static const LanguageRules script{{"class", "interface"},
                                    {"function"},
                                    {"export", "default", "async", "abstract", "declare"}};
  static const LanguageRules kotlin{
      {"class", "interface", "object"},
      {"fun"},
      {"public", "private", "protected", "internal", "open", "abstract", "sealed", "data",
       "enum", "annotation", "inner", "override", "suspend", "inline", "operator", "infix",
       "tailrec", "external", "final", "const", "lateinit", "value", "expect", "actual"}};
  static const LanguageRules go{{}, {"func"}, {}, true};
  static const LanguageRules cfamily{
      {"class", "struct", "interface", "enum", "trait", "object", "protocol", "record"},
      {"def", "func"},
      {"public", "private", "protected", "internal", "static", "final", "abstract", "sealed",
       "partial", "open", "export", "template", "typedef", "case", "data", "implicit",
       "override", "inline", "virtual", "readonly", "unsafe"}};
  static const std::map<std::string_view, const LanguageRules*> by_extension = {
      {".py", &python},   {".pyi", &python},  {".rs", &rust},      {".js", &script},
      {".jsx", &script},  {".ts", &script},   {".tsx", &script},   {".mjs", &script},
      {".cjs", &script},  {".kt", &kotlin},   {".kts", &kotlin},   {".go", &go},
      {".java", &cfamily}, {".cs", &cfamily}, {".scala", &cfamily}, {".swift", &cfamily},
      {".cpp", &cfamily}, {".cc", &cfamily},  {".cxx", &cfamily},  {".h", &cfamily},
      {".hpp", &cfamily}, {".hh", &cfamily},  {".c", &cfamily},    {".m", &cfamily},
  };
  auto it = by_extension.find(extension);
  return it == by_extension.end() ? nullptr : it->second;
}

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$';
}

bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

bool contains(const std::vector<std::string_view>& v, std::string_view w) {
  return std::find(v.begin(), v.end(), w) != v.end();
}

// Cursor over one source line.
class LineLexer {
 public:
  explicit LineLexer(std::string_view line) : s_(line) {}

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at(char c) {
    skip_space();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  std::string_view word() {
    skip_space();
    const std::size_t start = pos_;
    if (pos_ < s_.size() && is_ident_start(s_[pos_])) {
      while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
    }
    return s_.substr(start, pos_ - start);
  }
  // Skips a balanced (...) or <...> group if one starts here.
  void skip_group(char open, char close) {
    if (!at(open)) return;
    int depth = 0;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == open) ++depth;
      if (c == close && --depth == 0) return;
    }
  }
  void skip_string() {
    if (!at('"')) return;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') ++pos_;
    if (pos_ < s_.size()) ++pos_;
  }
  void skip_char(char c) {
    if (at(c)) ++pos_;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

enum class DeclKind { kNone, kClass, kSymbol, kScope };

struct Declaration {
  DeclKind kind = DeclKind::kNone;
  std::string name;
};

Declaration parse_declaration(std::string_view line, const LanguageRules& rules) {
  LineLexer lex(line);
  if (lex.at('@') || lex.at('#') || lex.at('/') || lex.at('*')) return {};
  std::string_view w = lex.word();
  for (int guard = 0; guard < 16 && !w.empty(); ++guard) {
    if (rules.rust_impl_scopes && w == "impl") {
      lex.skip_group('<', '>');
      std::string_view target = lex.word();
      lex.skip_group('<', '>');
      if (lex.word() == "for") target = lex.word();
      if (target.empty()) return {};
      return {DeclKind::kScope, std::string(target)};
    }
    if (rules.go_declarations && w == "type") {
      const std::string_view name = lex.word();
      const std::string_view what = lex.word();
      if (!name.empty() && (what == "struct" || what == "interface")) {
        return {DeclKind::kClass, std::string(name)};
      }
      return {};
    }
    if (contains(rules.modifiers, w)) {
      if (w == "pub") lex.skip_group('(', ')');
      if (w == "extern") lex.skip_string();
      if (w == "template") lex.skip_group('<', '>');
      w = lex.word();
      continue;
    }
    if (contains(rules.class_keywords, w)) {
      std::string_view name = lex.word();
      if (contains(rules.class_keywords, name)) name = lex.word();  // "enum class X"
      if (name.empty() || lex.at(';')) return {};
      return {DeclKind::kClass, std::string(name)};
    }
    if (contains(rules.symbol_keywords, w)) {
      lex.skip_char('*');  // function*
      lex.skip_group('<', '>');
      if (rules.go_declarations) lex.skip_group('(', ')');
      std::string_view name = lex.word();
      // Kotlin extension receivers: fun Type.name(...)
      while (!name.empty() && lex.at('.')) {
        lex.skip_char('.');
        const std::string_view next = lex.word();
        if (next.empty()) break;
        name = next;
      }
      if (name.empty()) return {};
      return {DeclKind::kSymbol, std::string(name)};
    }
    return {};
  }
  return {};
}

std::size_t indentation(std::string_view line) {
  std::size_t n = 0;
  for (char c : line) {
    if (c == ' ') {
      ++n;
    } else if (c == '\t') {
      n += 4;
    } else {
      break;
    }
  }
  return n;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

bool valid_text(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (c == 0) return false;
    std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : (c & 0xF8) == 0xF0 ? 4 : 0;
    if (len == 0 || i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += len;
  }
  return true;
}

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    const std::size_t nl = content.find('\n', start);
    std::string_view line = content.substr(start, nl == std::string_view::npos ? nl : nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

std::string text_of(const TokenSequence& tokens) {
  return tokens.empty() ? std::string(kPlaceholderToken) : join_tokens(tokens);
}

void extract_actions(std::string_view rel, std::string_view content, std::vector<IndexItem>& out) {
  std::unordered_set<std::string> seen;
  for (std::string_view line : split_lines(content)) {
    if (is_blank(line) || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) continue;
    const std::string action_id(line.substr(0, tab));
    if (!seen.insert(action_id).second) continue;
    std::string_view display = line.substr(tab + 1);
    IndexItem item;
    item.id = make_item_id(ItemKind::kAction, rel, action_id);
    item.kind = ItemKind::kAction;
    item.display_name = std::string(display);
    item.text_repr = text_of(normalize_query(display));
    item.origin_path = std::string(rel);
    out.push_back(std::move(item));
  }
}

void extract_declarations(std::string_view rel, std::string_view content,
                          const LanguageRules& rules, const ExtractOptions& options,
                          std::vector<IndexItem>& out) {
  const std::vector<std::string_view> lines = split_lines(content);
  struct Scope {
    std::size_t indent;
    std::string qualified;
  };
  std::vector<Scope> scopes;
  std::unordered_map<std::string, int> occurrences;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (is_blank(line)) continue;
    const std::size_t indent = indentation(line);
    while (!scopes.empty() && scopes.back().indent >= indent) scopes.pop_back();
    const Declaration decl = parse_declaration(line, rules);
    if (decl.kind == DeclKind::kNone) continue;

    std::string qualified = scopes.empty() ? decl.name : scopes.back().qualified + "." + decl.name;
    if (decl.kind == DeclKind::kScope || decl.kind == DeclKind::kClass) {
      scopes.push_back({indent, qualified});
    }
    if (decl.kind == DeclKind::kScope) continue;

    const int n = ++occurrences[qualified];
    const std::string unique = n == 1 ? qualified : qualified + "#" + std::to_string(n);
    IndexItem item;
    item.kind = decl.kind == DeclKind::kClass ? ItemKind::kClass : ItemKind::kSymbol;
    item.id = make_item_id(item.kind, rel, unique);
    item.display_name = decl.name;
    item.origin_path = std::string(rel);
    TokenSequence tokens = split_identifier(decl.name);
    if (item.kind == ItemKind::kSymbol && options.mode == TextMode::kWithBody) {
      std::size_t taken = 0;
      for (std::size_t j = i + 1; j < lines.size() && taken < options.body_line_budget; ++j) {
        if (!is_blank(lines[j]) && indentation(lines[j]) <= indent) break;
        const TokenSequence body = split_identifier(lines[j]);
        tokens.insert(tokens.end(), body.begin(), body.end());
        ++taken;
      }
    }
    item.text_repr = text_of(tokens);
    out.push_back(std::move(item));
  }
}

std::string file_name(std::string_view rel) {
  const auto slash = rel.rfind('/');
  return std::string(slash == std::string_view::npos ? rel : rel.substr(slash + 1));
}

}  // namespace

std::string_view to_string(TextMode mode) noexcept {
  return mode == TextMode::kWithBody ? "with-body" : "name-only";
}

std::vector<IndexItem> extract_items(std::string_view relative_path, std::string_view content,
                                     const ExtractOptions& options) {
  std::vector<IndexItem> items;
  const std::string name = file_name(relative_path);
  const std::filesystem::path as_path(name);
  IndexItem file;
  file.id = make_item_id(ItemKind::kFile, relative_path);
  file.kind = ItemKind::kFile;
  file.display_name = name;
  file.text_repr = text_of(split_identifier(as_path.stem().string()));
  file.origin_path = std::string(relative_path);
  items.push_back(std::move(file));

  if (!valid_text(content)) return items;
  if (name == kActionsFile) {
    extract_actions(relative_path, content, items);
  } else if (const LanguageRules* rules = rules_for(as_path.extension().string())) {
    extract_declarations(relative_path, content, *rules, options, items);
  }
  return items;
}

Indexer::Indexer(Store& store, const ModelWeights& weights, Catalog& catalog,
                 IndexerConfig config)
    : store_(store),
      weights_(weights),
      catalog_(catalog),
      config_(std::move(config)),
      weights_fingerprint_(weights_fingerprint(weights)) {
  if (store_.dim() != weights_.dims.embedding_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "store dim differs from model embedding dim");
  }
}

bool Indexer::is_ignored(std::string_view relative_path) const {
  const std::string path(relative_path);
  auto matches = [&](const std::string& subject) {
    for (const auto* list : {&config_.ignore, &extra_ignore_}) {
      for (const auto& pattern : *list) {
        if (::fnmatch(pattern.c_str(), subject.c_str(), 0) == 0) return true;
      }
    }
    return false;
  };
  if (matches(path)) return true;
  std::size_t start = 0;
  while (start < path.size()) {
    const std::size_t slash = path.find('/', start);
    const std::string part = path.substr(start, slash == std::string::npos ? slash : slash - start);
    if (config_.skip_hidden && !part.empty() && part[0] == '.') return true;
    if (!part.empty() && matches(part)) return true;
    if (slash == std::string::npos) break;
    start = slash + 1;
  }
  return false;
}

void Indexer::load_ignore_file(const std::filesystem::path& root) {
  extra_ignore_.clear();
  const auto file = root / std::string(kIgnoreFileName);
  if (!std::filesystem::is_regular_file(file)) return;
  std::istringstream in(detail::read_file(file));
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '/')) {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') continue;
    extra_ignore_.push_back(line);
  }
}

namespace {

CatalogSettings wanted_settings(const IndexerConfig& config, std::uint64_t fingerprint,
                                std::string root) {
  CatalogSettings s;
  s.root = std::move(root);
  s.text_mode = std::string(to_string(config.extract.mode));
  s.body_lines = config.extract.mode == TextMode::kWithBody ? config.extract.body_line_budget : 0;
  s.weights_fingerprint = fingerprint;
  return s;
}

}  // namespace

bool Indexer::settings_match() const {
  const CatalogSettings have = catalog_.settings();
  CatalogSettings want = wanted_settings(config_, weights_fingerprint_, have.root);
  return have == want;
}

void Indexer::reset_for_settings() {
  for (const auto& id : store_.ids()) store_.remove(id);
  catalog_.clear();
  catalog_.set_settings(wanted_settings(config_, weights_fingerprint_, catalog_.settings().root));
}

std::size_t Indexer::embed_and_store(std::vector<IndexItem>& items) {
  if (items.empty()) return 0;
  std::vector<Embedding> vectors(items.size());
  std::size_t workers = config_.threads ? config_.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, items.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) vectors[i] = embed_text(weights_, items[i].text_repr);
  };
  if (workers == 1) {
    work(0, items.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t per = (items.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * per;
      const std::size_t end = std::min(items.size(), begin + per);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  // Single writer: puts happen in item order on this thread.
  for (std::size_t i = 0; i < items.size(); ++i) {
    store_.put(items[i].id, vectors[i]);
    catalog_.upsert(std::move(items[i]));
  }
  embed_calls_ += items.size();
  return items.size();
}

namespace {

struct FilePlan {
  std::string path;
  std::uint64_t hash = 0;
  std::vector<IndexItem> items;
};

}  // namespace

DeltaReport Indexer::sync_file(const std::string& path, std::string_view content) {
  DeltaReport delta;
  const std::uint64_t hash = fnv1a64(content);
  const std::optional<FileRecord> old = catalog_.file(path);
  if (old && old->content_hash == hash) return delta;

  std::vector<IndexItem> items = extract_items(path, content, config_.extract);
  std::vector<std::string> ids;
  std::vector<IndexItem> to_embed;
  for (auto& item : items) {
    ids.push_back(item.id);
    const std::optional<IndexItem> existing = catalog_.find(item.id);
    if (existing && existing->text_repr == item.text_repr && store_.contains(item.id)) {
      if (!(*existing == item)) catalog_.upsert(std::move(item));
      continue;
    }
    (existing ? delta.updated : delta.added) += 1;
    to_embed.push_back(std::move(item));
  }
  delta.embedded = embed_and_store(to_embed);

  if (old) {
    const std::unordered_set<std::string> keep(ids.begin(), ids.end());
    for (const auto& id : old->item_ids) {
      if (keep.count(id)) continue;
      if (store_.contains(id)) store_.remove(id);
      catalog_.erase(id);
      ++delta.removed;
    }
  }
  catalog_.set_file(path, FileRecord{hash, std::move(ids)});
  return delta;
}

DeltaReport Indexer::drop_file(const std::string& path) {
  DeltaReport delta;
  const std::optional<FileRecord> old = catalog_.file(path);
  if (!old) return delta;
  for (const auto& id : old->item_ids) {
    if (store_.contains(id)) store_.remove(id);
    catalog_.erase(id);
    ++delta.removed;
  }
  catalog_.erase_file(path);
  return delta;
}

IndexReport Indexer::index_project(const std::filesystem::path& root) {
  std::lock_guard lock(mutex_);
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    throw Error(ErrorCode::kIo, "not a readable directory: " + root.string());
  }
  const auto start = std::chrono::steady_clock::now();
  load_ignore_file(root);
  const std::string root_name = std::filesystem::absolute(root).lexically_normal().string();
  {
    CatalogSettings have = catalog_.settings();
    CatalogSettings want = wanted_settings(config_, weights_fingerprint_, root_name);
    if (!(have == want)) {
      reset_for_settings();
      catalog_.set_settings(want);
    }
  }

  // Items the store lost (e.g. an interrupted run) force their file to be
  // re-planned.
  for (const auto& path : catalog_.file_paths()) {
    const auto rec = catalog_.file(path);
    for (const auto& id : rec->item_ids) {
      if (!store_.contains(id)) {
        catalog_.set_file(path, FileRecord{0, rec->item_ids});
        break;
      }
    }
  }

  std::vector<std::string> files;
  std::filesystem::recursive_directory_iterator it(
      root, std::filesystem::directory_options::skip_permission_denied, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot list " + root.string() + ": " + ec.message());
  for (const std::filesystem::recursive_directory_iterator end; it != end; it.increment(ec)) {
    if (ec) {
      if (on_warning) on_warning("walk error: " + ec.message());
      ec.clear();
      continue;
    }
    const std::string rel = it->path().lexically_relative(root).generic_string();
    if (is_ignored(rel)) {
      if (it->is_directory(ec)) it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file(ec)) files.push_back(rel);
  }
  std::sort(files.begin(), files.end());

  IndexReport report;
  report.files = files.size();
  std::unordered_set<std::string> seen;
  std::size_t embedded = 0;
  std::vector<IndexItem> batch;
  std::vector<FilePlan> plans;

  // Plans are committed in groups so that embedding can fan out over the
  // worker pool while store writes stay on this thread.
  auto commit = [&] {
    embedded += embed_and_store(batch);
    batch.clear();
    for (auto& plan : plans) {
      const std::optional<FileRecord> old = catalog_.file(plan.path);
      std::vector<std::string> ids;
      for (const auto& item : plan.items) ids.push_back(item.id);
      if (old) {
        const std::unordered_set<std::string> keep(ids.begin(), ids.end());
        for (const auto& id : old->item_ids) {
          if (keep.count(id)) continue;
          if (store_.contains(id)) store_.remove(id);
          catalog_.erase(id);
          ++report.removed;
        }
      }
      catalog_.set_file(plan.path, FileRecord{plan.hash, std::move(ids)});
    }
    plans.clear();
  };

  for (const auto& rel : files) {
    seen.insert(rel);
    std::string content;
    try {
      content = detail::read_file(root / rel);
    } catch (const Error& e) {
      if (on_warning) on_warning(e.what());
      continue;
    }
    const std::uint64_t hash = fnv1a64(content);
    const std::optional<FileRecord> old = catalog_.file(rel);
    if (old && old->content_hash == hash) continue;

    FilePlan plan{rel, hash, extract_items(rel, content, config_.extract)};
    for (const auto& item : plan.items) {
      const std::optional<IndexItem> existing = catalog_.find(item.id);
      if (existing && existing->text_repr == item.text_repr && store_.contains(item.id)) {
        if (!(*existing == item)) catalog_.upsert(item);
        continue;
      }
      batch.push_back(item);
    }
    plans.push_back(std::move(plan));
    if (batch.size() >= config_.batch_size) commit();
  }
  commit();

  for (const auto& path : catalog_.file_paths()) {
    if (!seen.count(path)) report.removed += drop_file(path).removed;
  }
  // Store records with no catalog entry are leftovers of interrupted runs.
  for (const auto& id : store_.ids()) {
    if (!catalog_.contains(id)) store_.remove(id);
  }

  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  report.seconds = elapsed.count();
  report.embedded = embedded;
  report.items = store_.size();
  if (embedded > 0) {
    report.items_per_second = report.seconds > 0 ? embedded / report.seconds : 0.0;
    report.ms_per_item = report.seconds * 1000.0 / static_cast<double>(embedded);
  }
  return report;
}

DeltaReport Indexer::apply_change(const FileChange& change) {
  std::lock_guard lock(mutex_);
  if (change.path.empty() || is_ignored(change.path)) return {};
  if (!settings_match()) reset_for_settings();
  if (change.kind == ChangeKind::kRemoved) return drop_file(change.path);
  return sync_file(change.path, change.content);
}

}  // namespace everysearch
