// Copyright 2026 The dlflow Authors
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

#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "common/error.hpp"
#include "common/fs.hpp"
#include "common/hash.hpp"
#include "common/rng.hpp"
#include "common/uuid.hpp"
#include "test_util.hpp"

namespace dlflow {
namespace {

TEST(Hash, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Hash, RecognizesHashIds) {
  EXPECT_TRUE(is_hash_id(sha256_hex("x")));
  EXPECT_FALSE(is_hash_id("abc"));
  EXPECT_FALSE(is_hash_id(std::string(64, 'G')));
}

TEST(Hash, KeyedHashMatchesReferenceValues) {
  const json rows = read_json(testing::fixture("split_routes.json"));
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) {
    const auto expected = std::stoull(r.at("hash").get<std::string>());
    EXPECT_EQ(keyed_hash64(r.at("seed").get<uint64_t>(), r.at("path").get<std::string>()), expected)
        << r.at("path");
  }
}

TEST(Canonical, SortsKeysWithoutWhitespace) {
  const json j = {{"b", 1}, {"a", json::array({true, nullptr})}, {"c", "é"}};
  EXPECT_EQ(canonical(j), R"({"a":[true,null],"b":1,"c":"é"})");
}

TEST(Documents, ParsesJsonAndYaml) {
  const json a = parse_document(R"({"name": "x", "n": [1, 2]})");
  const json b = parse_document("name: x\nn:\n  - 1\n  - 2\n");
  EXPECT_EQ(a, b);
  const json c = parse_document("ratio: 0.5\nflag: true\nnothing: null\ntext: '12'\n");
  EXPECT_DOUBLE_EQ(c.at("ratio").get<double>(), 0.5);
  EXPECT_TRUE(c.at("flag").get<bool>());
  EXPECT_TRUE(c.at("nothing").is_null());
  EXPECT_TRUE(c.at("text").is_string());
}

TEST(Documents, RejectsGarbage) {
  EXPECT_THROW((void)parse_document("{not json"), Error);
}

TEST(Uuid, NameBasedIsStableAndWellFormed) {
  const auto a = uuid_from_name("checkpoint/x");
  EXPECT_EQ(a, uuid_from_name("checkpoint/x"));
  EXPECT_NE(a, uuid_from_name("checkpoint/y"));
  ASSERT_EQ(a.size(), 36u);
  EXPECT_EQ(a[8], '-');
  EXPECT_EQ(a[14], '8');
  EXPECT_NE(random_uuid(), random_uuid());
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform01();
    EXPECT_EQ(x, b.uniform01());
    if (x != c.uniform01()) differs = true;
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformIndexStaysInRange) {
  Rng r(1);
  std::set<std::size_t> seen;
  for (int i = 0; i < 500; ++i) {
    const auto k = r.uniform_index(7);
    ASSERT_LT(k, 7u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Files, AtomicWriteAndJsonl) {
  testing::TempDir dir;
  const auto p = dir.path() / "a" / "b.json";
  write_json_atomic(p, {{"k", 1}});
  EXPECT_EQ(read_json(p).at("k"), 1);
  const auto l = dir.path() / "log.jsonl";
  append_line(l, R"({"i":1})");
  append_line(l, R"({"i":2})");
  const auto rows = read_jsonl(l);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].at("i"), 2);
}

TEST(Files, LockSerializesWriters) {
  testing::TempDir dir;
  const auto counter = dir.path() / "counter";
  write_atomic(counter, "0");
  auto bump = [&] {
    for (int i = 0; i < 50; ++i) {
      FileLock lock(dir.path() / "counter.lock");
      const int v = std::stoi(read_bytes(counter));
      write_atomic(counter, std::to_string(v + 1));
    }
  };
  std::thread t1(bump), t2(bump);
  t1.join();
  t2.join();
  EXPECT_EQ(read_bytes(counter), "100");
}

TEST(Errors, CodesHaveKebabNames) {
  EXPECT_STREQ(to_string(ErrorCode::kGateFailed), "gate-failed");
  EXPECT_STREQ(to_string(ErrorCode::kSelfReviewDenied), "self-review-denied");
  EXPECT_STREQ(to_string(ErrorCode::kMalformedPayload), "malformed-payload");
  try {
    fail(ErrorCode::kNotFound, "gone");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
    EXPECT_NE(std::string(e.what()).find("gone"), std::string::npos);
  }
}

}  // namespace
}  // namespace dlflow
