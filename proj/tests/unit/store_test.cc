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
#include <gtest/gtest.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <thread>

#include "everysearch/error.h"
#include "everysearch/fp16.h"
#include "test_support.h"

namespace everysearch {
namespace {

using testing::random_unit_vector;
using testing::TempDir;

std::vector<std::uint16_t> to_bits(std::span<const float> v) {
  std::vector<std::uint16_t> out(v.size());
  f16_encode(v, out);
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kIo;
}

class StoreTest : public ::testing::Test {
 protected:
  std::filesystem::path path() const { return dir_ / "v.embs"; }
  TempDir dir_;
  std::mt19937_64 rng_{1};
};

TEST_F(StoreTest, CreateAndReopenEmpty) {
  {
    Store s = Store::open_or_create(path(), 128);
    EXPECT_EQ(s.dim(), 128);
    EXPECT_EQ(s.record_count(), 0u);
  }
  Store s = Store::open_or_create(path(), 128);
  EXPECT_EQ(s.header().dim, 128);
  EXPECT_EQ(s.header().record_count, 0u);
  EXPECT_EQ(std::filesystem::file_size(path()), kStoreHeaderSize);
  EXPECT_EQ(Store::open(path()).dim(), 128);
}

TEST_F(StoreTest, HeaderBytesAreExact) {
  {
    Store s = Store::open_or_create(path(), 4);
    s.put("a", std::vector<float>{1.0f, 0.5f, 0.0f, -2.0f});
  }
  const std::string bytes = testing::read_text(path());
  ASSERT_EQ(bytes.size(), kStoreHeaderSize + 8);
  EXPECT_EQ(bytes.substr(0, 4), "EMBS");
  const auto u8 = [&](std::size_t i) { return static_cast<unsigned char>(bytes[i]); };
  EXPECT_EQ(u8(4) | u8(5) << 8, 1);      // version
  EXPECT_EQ(u8(6) | u8(7) << 8, 4);      // dim
  EXPECT_EQ(u8(8), 1);                   // dtype
  for (int i = 9; i < 16; ++i) EXPECT_EQ(u8(i), 0) << i;
  EXPECT_EQ(u8(16), 1);                  // record_count
  for (int i = 17; i < 24; ++i) EXPECT_EQ(u8(i), 0) << i;
  EXPECT_EQ(u8(24) | u8(25) << 8, 0x3C00);
  EXPECT_EQ(u8(26) | u8(27) << 8, 0x3800);
  EXPECT_EQ(u8(30) | u8(31) << 8, 0xC000);
}

TEST_F(StoreTest, HeaderErrors) {
  { Store::open_or_create(path(), 128); }
  EXPECT_EQ(code_of([&] { Store::open_or_create(path(), 64); }), ErrorCode::kDimensionMismatch);

  std::string bytes = testing::read_text(path());
  bytes[0] = 'X';
  testing::write_text(path(), bytes);
  EXPECT_EQ(code_of([&] { Store::open(path()); }), ErrorCode::kCorrupt);

  bytes[0] = 'E';
  bytes[4] = 2;
  testing::write_text(path(), bytes);
  EXPECT_EQ(code_of([&] { Store::open(path()); }), ErrorCode::kUnsupportedVersion);

  testing::write_text(path(), "EMB");
  EXPECT_EQ(code_of([&] { Store::open(path()); }), ErrorCode::kCorrupt);
  EXPECT_EQ(code_of([&] { Store::open(dir_ / "nope.embs"); }), ErrorCode::kNotFound);
}

TEST_F(StoreTest, MissingRecordsAreTruncation) {
  {
    Store s = Store::open_or_create(path(), 8);
    s.put("a", random_unit_vector(rng_, 8));
    s.put("b", random_unit_vector(rng_, 8));
  }
  std::filesystem::resize_file(path(), std::filesystem::file_size(path()) - 2);
  EXPECT_EQ(code_of([&] { Store::open(path()); }), ErrorCode::kTruncated);
}

TEST_F(StoreTest, PutGetRoundTripIsBinary16Exact) {
  Store s = Store::open_or_create(path(), 16);
  const auto v = random_unit_vector(rng_, 16);
  EXPECT_EQ(s.put("x", v), 0u);
  EXPECT_EQ(s.get_bits("x"), to_bits(v));
  const Embedding e = s.get("x");
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(e[i], f16_round(v[i]));
}

TEST_F(StoreTest, PutSameIdUpdatesInPlace) {
  Store s = Store::open_or_create(path(), 16);
  const auto v1 = random_unit_vector(rng_, 16);
  const auto v2 = random_unit_vector(rng_, 16);
  s.put("x", v1);
  EXPECT_EQ(s.put("x", v2), 0u);
  EXPECT_EQ(s.record_count(), 1u);
  EXPECT_EQ(s.get_bits("x"), to_bits(v2));
}

TEST_F(StoreTest, FreedSlotIsReused) {
  Store s = Store::open_or_create(path(), 8);
  s.put("a", random_unit_vector(rng_, 8));
  s.put("b", random_unit_vector(rng_, 8));
  s.put("c", random_unit_vector(rng_, 8));
  s.remove("b");
  EXPECT_EQ(s.free_slots(), std::vector<std::uint64_t>{1});
  EXPECT_EQ(s.put("d", random_unit_vector(rng_, 8)), 1u);
  EXPECT_EQ(s.record_count(), 3u);
  EXPECT_TRUE(s.free_slots().empty());
}

TEST_F(StoreTest, LowestFreeSlotFirst) {
  Store s = Store::open_or_create(path(), 4);
  for (int i = 0; i < 6; ++i) s.put("id" + std::to_string(i), random_unit_vector(rng_, 4));
  s.remove("id4");
  s.remove("id1");
  s.remove("id3");
  EXPECT_EQ(s.put("n1", random_unit_vector(rng_, 4)), 1u);
  EXPECT_EQ(s.put("n2", random_unit_vector(rng_, 4)), 3u);
  EXPECT_EQ(s.put("n3", random_unit_vector(rng_, 4)), 4u);
  EXPECT_EQ(s.put("n4", random_unit_vector(rng_, 4)), 6u);
}

TEST_F(StoreTest, UnknownIdsAndBadInput) {
  Store s = Store::open_or_create(path(), 4);
  EXPECT_EQ(code_of([&] { s.get("nope"); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { s.remove("nope"); }), ErrorCode::kNotFound);
  s.put("a", std::vector<float>{1, 0, 0, 0});
  s.remove("a");
  EXPECT_EQ(code_of([&] { s.get("a"); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { s.put("b", std::vector<float>{1, 0, 0}); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code_of([&] { s.put("b", std::vector<float>{1, NAN, 0, 0}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { s.put("", std::vector<float>{1, 0, 0, 0}); }),
            ErrorCode::kInvalidArgument);
}

TEST_F(StoreTest, RemovalAndFreeSlotsSurviveReopen) {
  std::vector<float> keep;
  {
    Store s = Store::open_or_create(path(), 8);
    s.put("a", random_unit_vector(rng_, 8));
    keep = random_unit_vector(rng_, 8);
    s.put("b", keep);
    s.put("c", random_unit_vector(rng_, 8));
    s.remove("a");
  }
  Store s = Store::open(path());
  EXPECT_FALSE(s.contains("a"));
  EXPECT_EQ(s.get_bits("b"), to_bits(keep));
  EXPECT_EQ(s.free_slots(), std::vector<std::uint64_t>{0});
  EXPECT_EQ(s.put("z", random_unit_vector(rng_, 8)), 0u);
}

TEST_F(StoreTest, VectorsAreNotRenormalized) {
  Store s = Store::open_or_create(path(), 3);
  s.put("a", std::vector<float>{2.0f, 0.0f, 0.0f});
  EXPECT_EQ(s.get("a")[0], 2.0f);
}

TEST_F(StoreTest, ScanVisitsLiveRecordsInSlotOrder) {
  Store s = Store::open_or_create(path(), 8);
  std::size_t visits = 0;
  s.scan([&](const ScanRecord&) { ++visits; });
  EXPECT_EQ(visits, 0u);
  for (int i = 0; i < 5; ++i) s.put("id" + std::to_string(i), random_unit_vector(rng_, 8));
  s.remove("id2");
  std::vector<std::uint64_t> slots;
  std::set<std::string> ids;
  s.scan([&](const ScanRecord& r) {
    slots.push_back(r.slot);
    ids.insert(std::string(r.item_id));
    EXPECT_EQ(r.values.size(), 8u);
  });
  EXPECT_EQ(slots, (std::vector<std::uint64_t>{0, 1, 3, 4}));
  EXPECT_EQ(ids, (std::set<std::string>{"id0", "id1", "id3", "id4"}));
}

// Shadow model: the store must agree with a plain map after every operation
// and after reopening.
TEST_F(StoreTest, RandomOperationsMatchShadowModel) {
  constexpr std::uint16_t kDim = 8;
  std::map<std::string, std::vector<std::uint16_t>> shadow;
  auto check = [&](const Store& s) {
    ASSERT_EQ(s.size(), shadow.size());
    std::map<std::string, std::vector<std::uint16_t>> seen;
    std::set<std::uint64_t> used;
    s.scan([&](const ScanRecord& r) {
      ASSERT_TRUE(used.insert(r.slot).second);
      seen.emplace(std::string(r.item_id), to_bits(r.values));
    });
    ASSERT_EQ(seen, shadow);
    for (std::uint64_t f : s.free_slots()) {
      ASSERT_LT(f, s.record_count());
      ASSERT_FALSE(used.count(f)) << "free slot also live";
    }
    ASSERT_EQ(used.size() + s.free_slots().size(), s.record_count());
    ASSERT_EQ(std::filesystem::file_size(path()), kStoreHeaderSize + s.record_count() * kDim * 2);
  };
  {
    Store s = Store::open_or_create(path(), kDim);
    for (int op = 0; op < 1000; ++op) {
      const std::string id = "id" + std::to_string(rng_() % 120);
      if (rng_() % 3 == 0 && shadow.count(id)) {
        s.remove(id);
        shadow.erase(id);
      } else {
        const auto v = random_unit_vector(rng_, kDim);
        s.put(id, v);
        shadow[id] = to_bits(v);
      }
      if (op % 97 == 0) check(s);
    }
    check(s);
  }
  Store reopened = Store::open(path());
  check(reopened);
}

TEST_F(StoreTest, SidecarTornTailIsDropped) {
  {
    Store s = Store::open_or_create(path(), 4);
    s.put("a", std::vector<float>{1, 0, 0, 0});
    s.put("b", std::vector<float>{0, 1, 0, 0});
  }
  // Append half of a log entry, as a crash mid-append would leave it.
  const auto log = Store::sidecar_path(path());
  std::string bytes = testing::read_text(log);
  testing::write_text(log, bytes + std::string("\x20\x00\x00\x00\x01\x02", 6));
  Store s = Store::open(path());
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(testing::read_text(log), bytes);
}

TEST_F(StoreTest, UnloggedAppendedRecordIsDropped) {
  {
    Store s = Store::open_or_create(path(), 4);
    s.put("a", std::vector<float>{1, 0, 0, 0});
  }
  // A record written past the header count (crash before the count update).
  std::string bytes = testing::read_text(path());
  testing::write_text(path(), bytes + std::string(8, '\x11'));
  Store s = Store::open(path());
  EXPECT_EQ(s.record_count(), 1u);
  EXPECT_EQ(std::filesystem::file_size(path()), kStoreHeaderSize + 8);
}

TEST_F(StoreTest, CompactRemovesTombstones) {
  Store s = Store::open_or_create(path(), 4);
  std::map<std::string, std::vector<std::uint16_t>> want;
  for (int i = 0; i < 10; ++i) {
    const auto v = random_unit_vector(rng_, 4);
    s.put("id" + std::to_string(i), v);
    want["id" + std::to_string(i)] = to_bits(v);
  }
  for (int i : {0, 3, 4, 9}) {
    s.remove("id" + std::to_string(i));
    want.erase("id" + std::to_string(i));
  }
  s.compact();
  EXPECT_EQ(s.record_count(), 6u);
  EXPECT_TRUE(s.free_slots().empty());
  EXPECT_EQ(std::filesystem::file_size(path()), kStoreHeaderSize + 6 * 8);
  Store reopened = Store::open(path());
  for (const auto& [id, bits] : want) EXPECT_EQ(reopened.get_bits(id), bits);
  EXPECT_EQ(reopened.size(), 6u);
}

TEST_F(StoreTest, ConcurrentReadersWithOneWriter) {
  Store s = Store::open_or_create(path(), 16);
  for (int i = 0; i < 2000; ++i) s.put("base" + std::to_string(i), random_unit_vector(rng_, 16));
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> scans{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&] {
      while (!stop) {
        std::size_t n = 0;
        s.scan([&](const ScanRecord& r) {
          ASSERT_EQ(r.values.size(), 16u);
          ++n;
        });
        ++scans;
      }
    });
  }
  std::mt19937_64 rng(9);
  for (int i = 0; i < 3000; ++i) {
    const std::string id = "base" + std::to_string(rng() % 2000);
    if (i % 2 == 0 && s.contains(id)) {
      s.remove(id);
    } else {
      s.put(id, random_unit_vector(rng, 16));
    }
  }
  stop = true;
  for (auto& t : readers) t.join();
  EXPECT_GT(scans.load(), 0u);
}

// Crash harness: a child applies a seeded operation sequence, reporting each
// completed operation through a pipe, and is killed at a random moment. The
// reopened store must equal the acknowledged prefix, except that the one
// operation in flight may or may not have landed.
struct Op {
  bool remove;
  std::string id;
  std::vector<float> values;
};

std::vector<Op> crash_ops(std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed);
  std::set<std::string> live;
  std::vector<Op> ops;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "item" + std::to_string(rng() % 40);
    if (live.count(id) && rng() % 3 == 0) {
      ops.push_back({true, id, {}});
      live.erase(id);
    } else {
      ops.push_back({false, id, random_unit_vector(rng, 32)});
      live.insert(id);
    }
  }
  return ops;
}

using Shadow = std::map<std::string, std::vector<std::uint16_t>>;

void apply(Shadow& shadow, const Op& op) {
  if (op.remove) {
    shadow.erase(op.id);
  } else {
    shadow[op.id] = to_bits(op.values);
  }
}

TEST_F(StoreTest, KilledWriterLeavesConsistentStore) {
  constexpr std::size_t kOps = 4000;
  std::mt19937_64 timing(77);
  for (std::uint64_t trial = 0; trial < 12; ++trial) {
    const auto p = dir_ / ("crash" + std::to_string(trial) + ".embs");
    const std::vector<Op> ops = crash_ops(trial, kOps);
    int fds[2];
    ASSERT_EQ(pipe(fds), 0);
    const pid_t pid = fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      close(fds[0]);
      Store s = Store::open_or_create(p, 32);
      for (std::uint32_t i = 0; i < ops.size(); ++i) {
        if (ops[i].remove) {
          s.remove(ops[i].id);
        } else {
          s.put(ops[i].id, ops[i].values);
        }
        if (write(fds[1], &i, sizeof i) != sizeof i) _exit(3);
      }
      _exit(0);
    }
    close(fds[1]);
    std::this_thread::sleep_for(std::chrono::microseconds(2000 + timing() % 30000));
    kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);

    std::int64_t acked = -1;
    std::uint32_t idx;
    while (read(fds[0], &idx, sizeof idx) == sizeof idx) acked = idx;
    close(fds[0]);

    Shadow before;
    for (std::int64_t i = 0; i <= acked; ++i) apply(before, ops[static_cast<std::size_t>(i)]);
    Shadow after = before;
    const bool in_flight = acked + 1 < static_cast<std::int64_t>(ops.size());
    if (in_flight) apply(after, ops[static_cast<std::size_t>(acked + 1)]);

    Store s = Store::open(p);
    Shadow got;
    s.scan([&](const ScanRecord& r) { got.emplace(std::string(r.item_id), to_bits(r.values)); });
    EXPECT_TRUE(got == before || got == after)
        << "trial " << trial << " acked " << acked << " live " << got.size();
    EXPECT_EQ(std::filesystem::file_size(p), kStoreHeaderSize + s.record_count() * 32 * 2);
  }
}

}  // namespace
}  // namespace everysearch
