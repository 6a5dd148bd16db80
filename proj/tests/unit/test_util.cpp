// Copyright 2026 The medvlm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>

#include "medvlm/util/csv.hpp"
#include "medvlm/util/error.hpp"
#include "medvlm/util/fs.hpp"
#include "medvlm/util/hash.hpp"
#include "medvlm/util/jsonl.hpp"
#include "medvlm/util/random.hpp"
#include "test_support.hpp"

namespace medvlm::util {
namespace {

using Rows = std::vector<std::vector<std::string>>;
using testing::TempDir;

TEST(Csv, PlainAndQuoted) {
  EXPECT_EQ(parse_csv("a,b\n1,2\n"), (Rows{{"a", "b"}, {"1", "2"}}));
  EXPECT_EQ(parse_csv("id,text\nx,\"one, two\"\ny,\"say \"\"hi\"\"\"\n"),
            (Rows{{"id", "text"}, {"x", "one, two"}, {"y", "say \"hi\""}}));
  EXPECT_EQ(parse_csv("k,v\r\nz,\"line1\nline2\"\r\n"), (Rows{{"k", "v"}, {"z", "line1\nline2"}}));
  EXPECT_EQ(parse_csv("a,,c\nlast"), (Rows{{"a", "", "c"}, {"last"}}));
  EXPECT_EQ(parse_csv("p\tq\n", '\t'), (Rows{{"p", "q"}}));
  EXPECT_EQ(parse_csv("x,\"\"\n"), (Rows{{"x", ""}}));
  EXPECT_TRUE(parse_csv("").empty());
  EXPECT_THROW(parse_csv("a,\"open\n"), ValidationError);
}

TEST(Csv, TableChecksWidthAndColumns) {
  TempDir tmp;
  testing::write_bytes(tmp / "ok.csv", "study_id,image\ns1,a.ppm\n");
  const auto t = read_csv_table(tmp / "ok.csv");
  EXPECT_EQ(t.column("image"), 1u);
  EXPECT_EQ(t.rows, (Rows{{"s1", "a.ppm"}}));
  EXPECT_THROW(t.column("absent"), ValidationError);
  testing::write_bytes(tmp / "ragged.csv", "a,b\n1,2,3\n");
  EXPECT_THROW(read_csv_table(tmp / "ragged.csv"), ValidationError);
  testing::write_bytes(tmp / "empty.csv", "");
  EXPECT_THROW(read_csv_table(tmp / "empty.csv"), ValidationError);
}

TEST(Hash, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex(std::string_view("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(std::string_view("")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  TempDir tmp;
  const std::string big(100000, 'q');
  testing::write_bytes(tmp / "f", big);
  EXPECT_EQ(sha256_file(tmp / "f"), sha256_hex(std::string_view(big)));
  EXPECT_THROW(sha256_file(tmp / "missing"), IoError);
}

TEST(Hash, FnvAndMix) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a32("a"), 0xe40c292cU);
  // splitmix64 output for state 0 after one increment.
  EXPECT_EQ(mix64(0), 0xe220a8397b1dcdafULL);
}

TEST(Hash, Base64) {
  EXPECT_EQ(base64_encode(""), "");
  EXPECT_EQ(base64_encode("f"), "Zg==");
  EXPECT_EQ(base64_encode("fo"), "Zm8=");
  EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
}

TEST(CounterRng, DeterministicPerId) {
  CounterRng a(17, "x1"), b(17, "x1"), c(17, "x2"), d(18, "x1");
  const auto a0 = a.next_u64();
  EXPECT_EQ(a0, b.next_u64());
  EXPECT_NE(a0, c.next_u64());
  EXPECT_NE(a0, d.next_u64());
  EXPECT_NE(a0, a.next_u64());
}

TEST(CounterRng, BelowIsInRangeAndRoughlyUniform) {
  CounterRng r(3, "uniform");
  std::map<std::uint64_t, int> counts;
  for (int i = 0; i < 60000; ++i) {
    const auto v = r.below(6);
    ASSERT_LT(v, 6u);
    ++counts[v];
  }
  for (const auto& [v, n] : counts) EXPECT_NEAR(n, 10000, 500) << v;
  EXPECT_EQ(r.below(1), 0u);
}

TEST(Rng, UniformNormalTruncated) {
  Rng r(1);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double n = r.normal();
    sum += n;
    sq += n * n;
    ASSERT_LE(std::abs(r.truncated_normal(0.5)), 1.0);
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.05);
  EXPECT_NEAR(sq / 20000, 1.0, 0.05);
  Rng x(9), y(9);
  EXPECT_EQ(x.next_u64(), y.next_u64());
}

TEST(Fs, AtomicWriteReplacesWithoutLeftovers) {
  TempDir tmp;
  const auto path = tmp / "sub/out.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(path.parent_path())) ++entries;
  EXPECT_EQ(entries, 1u);
  EXPECT_THROW(read_file(tmp / "missing"), IoError);
}

TEST(Fs, DirectoryLockIsExclusive) {
  TempDir tmp;
  {
    DirectoryLock held(tmp / "run");
    EXPECT_THROW(DirectoryLock(tmp / "run"), IoError);
  }
  EXPECT_NO_THROW(DirectoryLock(tmp / "run"));
}

TEST(Jsonl, ParseSkipsBlankAndNamesBadLine) {
  const auto rows = parse_jsonl("{\"a\":1}\n\n  \n{\"a\":2}\n");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1]["a"], 2);
  try {
    parse_jsonl("{\"a\":1}\n{oops\n", "in.jsonl");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("in.jsonl:2"), std::string::npos);
  }
  EXPECT_EQ(to_jsonl(rows), "{\"a\":1}\n{\"a\":2}\n");
}

}  // namespace
}  // namespace medvlm::util
