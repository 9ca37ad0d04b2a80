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

#include "everysearch/store.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <unordered_map>

#include "everysearch/detail/binary_io.h"
#include "everysearch/error.h"
#include "everysearch/fp16.h"

namespace everysearch {
namespace {

constexpr char kVectorMagic[4] = {'E', 'M', 'B', 'S'};
constexpr char kLogMagic[4] = {'E', 'M', 'B', 'L'};
constexpr std::size_t kLogHeaderSize = 8;
constexpr std::size_t kLogEntryPrefix = 8;
constexpr std::uint8_t kOpPut = 1;
constexpr std::uint8_t kOpDel = 2;
constexpr std::size_t kMaxIdBytes = 1 << 16;
constexpr std::size_t kScanChunk = 512;

std::uint32_t fnv1a32(std::string_view bytes) {
  std::uint32_t h = 2166136261u;
  for (char c : bytes) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 16777619u;
  }
  return h;
}

[[noreturn]] void throw_errno(const std::string& what, const std::filesystem::path& path) {
  throw Error(ErrorCode::kIo, what + " " + path.string() + ": " + std::strerror(errno));
}

class FileDescriptor {
 public:
  FileDescriptor() = default;
  explicit FileDescriptor(int fd) : fd_(fd) {}
  FileDescriptor(FileDescriptor&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  FileDescriptor& operator=(FileDescriptor&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~FileDescriptor() { reset(); }

  int get() const noexcept { return fd_; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

FileDescriptor open_fd(const std::filesystem::path& path, int flags) {
  const int fd = ::open(path.c_str(), flags | O_CLOEXEC, 0644);
  if (fd < 0) throw_errno("cannot open", path);
  return FileDescriptor(fd);
}

void write_all_at(int fd, const char* data, std::size_t len, std::uint64_t offset,
                  const std::filesystem::path& path) {
  while (len > 0) {
    const ssize_t n = ::pwrite(fd, data, len, static_cast<off_t>(offset));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("write failed on", path);
    }
    data += n;
    len -= static_cast<std::size_t>(n);
    offset += static_cast<std::uint64_t>(n);
  }
}

void append_all(int fd, const char* data, std::size_t len, const std::filesystem::path& path) {
  while (len > 0) {
    const ssize_t n = ::write(fd, data, len);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("append failed on", path);
    }
    data += n;
    len -= static_cast<std::size_t>(n);
  }
}

void read_all_at(int fd, char* data, std::size_t len, std::uint64_t offset,
                 const std::filesystem::path& path) {
  while (len > 0) {
    const ssize_t n = ::pread(fd, data, len, static_cast<off_t>(offset));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("read failed on", path);
    }
    if (n == 0) throw Error(ErrorCode::kTruncated, "unexpected end of " + path.string());
    data += n;
    len -= static_cast<std::size_t>(n);
    offset += static_cast<std::uint64_t>(n);
  }
}

std::uint64_t file_size(int fd, const std::filesystem::path& path) {
  struct stat st {};
  if (::fstat(fd, &st) != 0) throw_errno("cannot stat", path);
  return static_cast<std::uint64_t>(st.st_size);
}

std::string encode_header(const StoreHeader& h) {
  std::string buf(kVectorMagic, 4);
  detail::append_le<std::uint16_t>(buf, h.version);
  detail::append_le<std::uint16_t>(buf, h.dim);
  buf.push_back(static_cast<char>(h.dtype));
  buf.append(7, '\0');
  detail::append_le<std::uint64_t>(buf, h.record_count);
  return buf;
}

std::string log_header() {
  std::string buf(kLogMagic, 4);
  detail::append_le<std::uint16_t>(buf, kStoreVersion);
  detail::append_le<std::uint16_t>(buf, 0);
  return buf;
}

void append_log_entry(std::string& out, std::uint8_t op, std::string_view id,
                      std::uint64_t slot) {
  std::string payload;
  payload.push_back(static_cast<char>(op));
  if (op == kOpPut) detail::append_le<std::uint64_t>(payload, slot);
  payload.append(id);
  detail::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(payload.size()));
  detail::append_le<std::uint32_t>(out, fnv1a32(payload));
  out += payload;
}

}  // namespace

struct Store::Impl {
  std::filesystem::path path;
  std::filesystem::path log_path;
  Durability durability = Durability::kFlush;
  FileDescriptor fd;
  FileDescriptor log_fd;
  std::uint16_t dim = 0;

  mutable std::shared_mutex mutex;
  std::uint64_t record_count = 0;
  std::unordered_map<std::string, std::uint64_t> slots;
  std::vector<const std::string*> slot_ids;  // nullptr = free
  std::set<std::uint64_t> free;

  std::size_t record_bytes() const { return std::size_t{dim} * 2; }
  std::uint64_t offset_of(std::uint64_t slot) const {
    return kStoreHeaderSize + slot * record_bytes();
  }

  void sync(int which) const {
    if (durability == Durability::kSync && ::fdatasync(which) != 0) throw_errno("fdatasync", path);
  }

  // `slot` must be free and `id` unmapped.
  void bind(const std::string& id, std::uint64_t slot) {
    auto it = slots.emplace(id, slot).first;
    slot_ids[slot] = &it->first;
  }

  void rebuild_slot_index() {
    slot_ids.assign(record_count, nullptr);
    for (const auto& [id, slot] : slots) slot_ids[slot] = &id;
    free.clear();
    for (std::uint64_t s = 0; s < record_count; ++s) {
      if (slot_ids[s] == nullptr) free.insert(s);
    }
  }

  void load_header(std::optional<std::uint16_t> expected_dim) {
    const std::uint64_t size = file_size(fd.get(), path);
    if (size == 0) {
      if (!expected_dim) throw Error(ErrorCode::kCorrupt, path.string() + " is empty");
      dim = *expected_dim;
      StoreHeader h;
      h.dim = dim;
      const std::string buf = encode_header(h);
      write_all_at(fd.get(), buf.data(), buf.size(), 0, path);
      sync(fd.get());
      record_count = 0;
      return;
    }
    if (size < kStoreHeaderSize) throw Error(ErrorCode::kCorrupt, path.string() + ": short header");
    char buf[kStoreHeaderSize];
    read_all_at(fd.get(), buf, sizeof buf, 0, path);
    if (std::memcmp(buf, kVectorMagic, 4) != 0) {
      throw Error(ErrorCode::kCorrupt, path.string() + ": bad magic");
    }
    const auto version = detail::read_le<std::uint16_t>(buf + 4);
    if (version != kStoreVersion) {
      throw Error(ErrorCode::kUnsupportedVersion,
                  path.string() + ": store version " + std::to_string(version));
    }
    dim = detail::read_le<std::uint16_t>(buf + 6);
    const auto dtype = static_cast<std::uint8_t>(buf[8]);
    if (dim == 0 || dtype != kStoreDtypeF16) {
      throw Error(ErrorCode::kCorrupt, path.string() + ": invalid dim or dtype");
    }
    if (expected_dim && *expected_dim != dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  path.string() + ": store dim " + std::to_string(dim) + ", requested " +
                      std::to_string(*expected_dim));
    }
    record_count = detail::read_le<std::uint64_t>(buf + 16);
    const std::uint64_t expected_size = offset_of(record_count);
    if (size < expected_size) {
      throw Error(ErrorCode::kTruncated, path.string() + ": fewer records than header count");
    }
    if (size > expected_size) {
      // A record appended without its header update: drop it.
      if (::ftruncate(fd.get(), static_cast<off_t>(expected_size)) != 0) {
        throw_errno("cannot truncate", path);
      }
    }
  }

  void write_record_count(std::uint64_t count) {
    char buf[8];
    detail::write_le<std::uint64_t>(buf, count);
    write_all_at(fd.get(), buf, sizeof buf, 16, path);
  }

  void replay_log() {
    slots.clear();
    std::string bytes;
    if (std::filesystem::exists(log_path)) bytes = detail::read_file(log_path);
    if (!bytes.empty()) {
      if (bytes.size() < kLogHeaderSize || std::memcmp(bytes.data(), kLogMagic, 4) != 0) {
        throw Error(ErrorCode::kCorrupt, log_path.string() + ": bad slot log header");
      }
      std::unordered_map<std::uint64_t, std::string> by_slot;
      std::size_t pos = kLogHeaderSize;
      while (pos + kLogEntryPrefix <= bytes.size()) {
        const auto len = detail::read_le<std::uint32_t>(bytes.data() + pos);
        const auto sum = detail::read_le<std::uint32_t>(bytes.data() + pos + 4);
        if (len == 0 || pos + kLogEntryPrefix + len > bytes.size()) break;  // torn tail
        const std::string_view payload(bytes.data() + pos + kLogEntryPrefix, len);
        if (fnv1a32(payload) != sum) break;
        pos += kLogEntryPrefix + len;
        const auto op = static_cast<std::uint8_t>(payload[0]);
        if (op == kOpPut && payload.size() > 9) {
          const auto slot = detail::read_le<std::uint64_t>(payload.data() + 1);
          const std::string id(payload.substr(9));
          if (slot >= record_count) continue;
          if (auto prev = by_slot.find(slot); prev != by_slot.end()) slots.erase(prev->second);
          if (auto old = slots.find(id); old != slots.end()) by_slot.erase(old->second);
          slots[id] = slot;
          by_slot[slot] = id;
        } else if (op == kOpDel && payload.size() > 1) {
          if (auto old = slots.find(std::string(payload.substr(1))); old != slots.end()) {
            by_slot.erase(old->second);
            slots.erase(old);
          }
        } else {
          break;
        }
      }
    }
    rebuild_slot_index();
    rewrite_log();
  }

  void rewrite_log() {
    std::string out = log_header();
    for (std::uint64_t s = 0; s < slot_ids.size(); ++s) {
      if (slot_ids[s] != nullptr) append_log_entry(out, kOpPut, *slot_ids[s], s);
    }
    log_fd.reset();
    detail::write_file_atomic(log_path, out);
    log_fd = open_fd(log_path, O_WRONLY | O_APPEND);
    sync(log_fd.get());
  }

  void log(std::uint8_t op, std::string_view id, std::uint64_t slot) {
    std::string entry;
    append_log_entry(entry, op, id, slot);
    append_all(log_fd.get(), entry.data(), entry.size(), log_path);
    sync(log_fd.get());
  }

  void read_bits(std::uint64_t slot, std::uint16_t* out, std::size_t count) const {
    std::string buf(count * record_bytes(), '\0');
    read_all_at(fd.get(), buf.data(), buf.size(), offset_of(slot), path);
    for (std::size_t i = 0; i < count * dim; ++i) {
      out[i] = detail::read_le<std::uint16_t>(buf.data() + 2 * i);
    }
  }
};

Store::Store(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Store::Store(Store&&) noexcept = default;
Store& Store::operator=(Store&&) noexcept = default;
Store::~Store() = default;

std::filesystem::path Store::sidecar_path(const std::filesystem::path& path) {
  std::filesystem::path p = path;
  p += ".ids";
  return p;
}

Store Store::open_or_create(const std::filesystem::path& path, std::uint16_t dim,
                            Durability durability) {
  if (dim == 0) throw Error(ErrorCode::kInvalidArgument, "store dim must be positive");
  auto impl = std::make_unique<Impl>();
  impl->path = path;
  impl->log_path = sidecar_path(path);
  impl->durability = durability;
  impl->fd = open_fd(path, O_RDWR | O_CREAT);
  impl->load_header(dim);
  impl->replay_log();
  return Store(std::move(impl));
}

Store Store::open(const std::filesystem::path& path, Durability durability) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::kNotFound, "no store at " + path.string());
  }
  auto impl = std::make_unique<Impl>();
  impl->path = path;
  impl->log_path = sidecar_path(path);
  impl->durability = durability;
  impl->fd = open_fd(path, O_RDWR);
  impl->load_header(std::nullopt);
  impl->replay_log();
  return Store(std::move(impl));
}

std::uint64_t Store::put(std::string_view item_id, std::span<const float> values) {
  Impl& s = *impl_;
  if (item_id.empty() || item_id.size() > kMaxIdBytes) {
    throw Error(ErrorCode::kInvalidArgument, "item id must be 1..65536 bytes");
  }
  if (values.size() != s.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "vector has " + std::to_string(values.size()) +
                                                   " values, store dim is " + std::to_string(s.dim));
  }
  std::string record;
  record.reserve(s.record_bytes());
  for (float v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite vector value");
    detail::append_le<std::uint16_t>(record, f16_encode(v));
  }

  std::unique_lock lock(s.mutex);
  const std::string id(item_id);
  if (auto it = s.slots.find(id); it != s.slots.end()) {
    write_all_at(s.fd.get(), record.data(), record.size(), s.offset_of(it->second), s.path);
    s.sync(s.fd.get());
    return it->second;
  }
  std::uint64_t slot;
  if (!s.free.empty()) {
    slot = *s.free.begin();
    write_all_at(s.fd.get(), record.data(), record.size(), s.offset_of(slot), s.path);
    s.sync(s.fd.get());
    s.free.erase(s.free.begin());
  } else {
    slot = s.record_count;
    write_all_at(s.fd.get(), record.data(), record.size(), s.offset_of(slot), s.path);
    s.write_record_count(slot + 1);
    s.sync(s.fd.get());
    s.record_count = slot + 1;
    s.slot_ids.push_back(nullptr);
  }
  s.log(kOpPut, id, slot);
  s.bind(id, slot);
  return slot;
}

std::vector<std::uint16_t> Store::get_bits(std::string_view item_id) const {
  const Impl& s = *impl_;
  std::shared_lock lock(s.mutex);
  auto it = s.slots.find(std::string(item_id));
  if (it == s.slots.end()) throw Error(ErrorCode::kNotFound, "unknown item " + std::string(item_id));
  std::vector<std::uint16_t> bits(s.dim);
  s.read_bits(it->second, bits.data(), 1);
  return bits;
}

Embedding Store::get(std::string_view item_id) const {
  const std::vector<std::uint16_t> bits = get_bits(item_id);
  std::vector<float> values(bits.size());
  f16_decode(bits, values);
  return Embedding(std::move(values));
}

void Store::remove(std::string_view item_id) {
  Impl& s = *impl_;
  std::unique_lock lock(s.mutex);
  auto it = s.slots.find(std::string(item_id));
  if (it == s.slots.end()) throw Error(ErrorCode::kNotFound, "unknown item " + std::string(item_id));
  const std::uint64_t slot = it->second;
  s.log(kOpDel, item_id, 0);
  s.slot_ids[slot] = nullptr;
  s.slots.erase(it);
  s.free.insert(slot);
}

bool Store::contains(std::string_view item_id) const {
  std::shared_lock lock(impl_->mutex);
  return impl_->slots.count(std::string(item_id)) != 0;
}

std::optional<std::uint64_t> Store::slot_of(std::string_view item_id) const {
  std::shared_lock lock(impl_->mutex);
  auto it = impl_->slots.find(std::string(item_id));
  if (it == impl_->slots.end()) return std::nullopt;
  return it->second;
}

void Store::scan(const std::function<void(const ScanRecord&)>& visit) const {
  const Impl& s = *impl_;
  std::uint64_t end;
  {
    std::shared_lock lock(s.mutex);
    end = s.record_count;
  }
  std::vector<std::uint16_t> bits(kScanChunk * s.dim);
  std::vector<float> values(s.dim);
  std::vector<std::string> ids(kScanChunk);
  std::vector<bool> live(kScanChunk);
  for (std::uint64_t begin = 0; begin < end; begin += kScanChunk) {
    const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(kScanChunk, end - begin));
    {
      std::shared_lock lock(s.mutex);
      bool any = false;
      for (std::size_t i = 0; i < count; ++i) {
        const std::string* id = s.slot_ids[begin + i];
        live[i] = id != nullptr;
        if (live[i]) {
          ids[i] = *id;
          any = true;
        }
      }
      if (!any) continue;
      s.read_bits(begin, bits.data(), count);
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (!live[i]) continue;
      f16_decode(std::span<const std::uint16_t>(bits).subspan(i * s.dim, s.dim), values);
      visit(ScanRecord{ids[i], begin + i, values});
    }
  }
}

std::size_t Store::size() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->slots.size();
}

std::uint64_t Store::record_count() const {
  std::shared_lock lock(impl_->mutex);
  return impl_->record_count;
}

std::vector<std::uint64_t> Store::free_slots() const {
  std::shared_lock lock(impl_->mutex);
  return {impl_->free.begin(), impl_->free.end()};
}

std::vector<std::string> Store::ids() const {
  std::shared_lock lock(impl_->mutex);
  std::vector<std::string> out;
  out.reserve(impl_->slots.size());
  for (const std::string* id : impl_->slot_ids) {
    if (id != nullptr) out.push_back(*id);
  }
  return out;
}

std::uint16_t Store::dim() const noexcept { return impl_->dim; }

StoreHeader Store::header() const {
  std::shared_lock lock(impl_->mutex);
  StoreHeader h;
  h.dim = impl_->dim;
  h.record_count = impl_->record_count;
  return h;
}

const std::filesystem::path& Store::path() const noexcept { return impl_->path; }

void Store::compact() {
  Impl& s = *impl_;
  std::unique_lock lock(s.mutex);
  // Not crash-atomic across the two renames; run offline.
  std::string vectors;
  StoreHeader h;
  h.dim = s.dim;
  std::map<std::uint64_t, std::string> live;
  for (const auto& [id, slot] : s.slots) live.emplace(slot, id);
  h.record_count = live.size();
  vectors = encode_header(h);
  std::vector<std::uint16_t> bits(s.dim);
  std::unordered_map<std::string, std::uint64_t> remapped;
  std::uint64_t next = 0;
  for (const auto& [slot, id] : live) {
    s.read_bits(slot, bits.data(), 1);
    for (std::uint16_t b : bits) detail::append_le<std::uint16_t>(vectors, b);
    remapped.emplace(id, next++);
  }
  s.fd.reset();
  detail::write_file_atomic(s.path, vectors);
  s.fd = open_fd(s.path, O_RDWR);
  s.record_count = h.record_count;
  s.slots = std::move(remapped);
  s.rebuild_slot_index();
  s.rewrite_log();
}

}  // namespace everysearch
