#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "capcurate/checksum.hpp"
#include "capcurate/corpus.hpp"
#include "capcurate/error.hpp"
#include "support.hpp"

using namespace capcurate;
using capcurate::testing::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::size_t rss_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmRSS:", 0) == 0) return std::stoul(line.substr(6));
  }
  return 0;
}

}  // namespace

TEST(ReadShard, YieldsSamplesInFileOrder) {
  TempDir dir;
  const auto samples = capcurate::testing::make_samples("x", 3);
  write_shard(samples, dir / "a.jsonl");
  std::vector<std::string> ids;
  for (const auto& s : read_shard(dir / "a.jsonl")) ids.push_back(s.sample_id);
  EXPECT_EQ(ids, (std::vector<std::string>{"x-0", "x-1", "x-2"}));
}

TEST(ReadShard, EmptyFileIsEmptySequence) {
  TempDir dir;
  write_text(dir / "empty.jsonl", "");
  EXPECT_TRUE(read_shard_all(dir / "empty.jsonl").empty());
}

TEST(ReadShard, MissingFieldNamesLineAndField) {
  TempDir dir;
  write_text(dir / "bad.jsonl",
             R"({"sample_id":"a","image_ref":"i","alt_text":null,"source_dataset":"SA1B","language":"EN"})"
             "\n"
             R"({"image_ref":"i","alt_text":null,"source_dataset":"SA1B","language":"EN"})"
             "\n");
  try {
    read_shard_all(dir / "bad.jsonl");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "sample_id");
    EXPECT_NE(std::string(e.what()).find("line 2: sample_id"), std::string::npos);
  }
}

TEST(ReadShard, MalformedJsonCarriesLineNumber) {
  TempDir dir;
  write_text(dir / "bad.jsonl", "{\"sample_id\":\n");
  try {
    read_shard_all(dir / "bad.jsonl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(ReadShard, RejectsUnknownLanguage) {
  TempDir dir;
  write_text(dir / "bad.jsonl",
             R"({"sample_id":"a","image_ref":"i","alt_text":null,"source_dataset":"SA1B","language":"FR"})"
             "\n");
  EXPECT_THROW(read_shard_all(dir / "bad.jsonl"), ParseError);
}

TEST(WriteShard, RoundTripIsIdentity) {
  TempDir dir;
  std::mt19937_64 rng(7);
  std::vector<CaptionSample> samples;
  for (int i = 0; i < 100; ++i) {
    CaptionSample s = capcurate::testing::make_sample("id-" + std::to_string(i));
    if (rng() % 3 == 0) s.alt_text.reset();
    if (rng() % 2 == 0) s.language = Language::CN;
    if (i % 7 == 0) s.alt_text = "quote \" backslash \\ unicode \xe7\xba\xa2\xe8\x89\xb2 newline \n";
    samples.push_back(s);
  }
  const auto m = write_shard(samples, dir / "rt.jsonl");
  EXPECT_EQ(m.sample_count, 100u);
  EXPECT_EQ(m.shard_id, "rt");
  EXPECT_EQ(m.checksum, checksum_file(dir / "rt.jsonl"));
  EXPECT_EQ(read_shard_all(dir / "rt.jsonl"), samples);
}

TEST(WriteShard, DuplicateIdsAreListed) {
  TempDir dir;
  std::vector<CaptionSample> samples = {capcurate::testing::make_sample("a"), capcurate::testing::make_sample("b"),
                                        capcurate::testing::make_sample("a"), capcurate::testing::make_sample("b")};
  try {
    write_shard(samples, dir / "dup.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("a, b"), std::string::npos) << e.what();
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "dup.jsonl"));
}

TEST(WriteShard, EmptyInputGivesZeroCount) {
  TempDir dir;
  const auto m = write_shard(std::vector<CaptionSample>{}, dir / "e.jsonl");
  EXPECT_EQ(m.sample_count, 0u);
}

TEST(WriteRecords, RoundTrip) {
  TempDir dir;
  std::vector<CaptionRecord> recs;
  for (int i = 0; i < 5; ++i) {
    recs.push_back(CaptionRecord{"s" + std::to_string(i), "t", "a caption", "cap-1", CaptionMode::recaption,
                                 parse_timestamp("2024-01-02T03:04:05.678Z")});
  }
  write_records(recs, dir / "r.jsonl");
  EXPECT_EQ(read_records_all(dir / "r.jsonl"), recs);
}

TEST(CaptionRecord, RejectsEmptyCaption) {
  Json j = CaptionRecord{"s", "t", "x", "c", CaptionMode::caption, Timestamp{}}.to_json();
  j["caption_text"] = "";
  EXPECT_THROW(CaptionRecord::from_json(j, 1), ParseError);
}

TEST(BuildManifest, CountsAcrossShards) {
  TempDir dir;
  write_shard(capcurate::testing::make_samples("a", 2), dir / "a.jsonl");
  write_shard(capcurate::testing::make_samples("b", 3), dir / "b.jsonl");
  const auto m = build_manifest(dir.path());
  EXPECT_EQ(m.total_samples, 5u);
  ASSERT_EQ(m.shards.size(), 2u);
  EXPECT_EQ(m.shards[0].shard_id, "a");
  EXPECT_EQ(m.shards[1].sample_count, 3u);
}

TEST(BuildManifest, EmptyDirectory) {
  TempDir dir;
  const auto m = build_manifest(dir.path());
  EXPECT_EQ(m.total_samples, 0u);
  EXPECT_TRUE(m.shards.empty());
}

TEST(BuildManifest, DetectsCorruptionAgainstPrior) {
  TempDir dir;
  write_shard(capcurate::testing::make_samples("a", 4), dir / "a.jsonl");
  const auto prior = build_manifest(dir.path());
  // Flip one byte inside a string value so the file still parses.
  std::string text = read_file(dir / "a.jsonl");
  const auto pos = text.find("a-2");
  text[pos + 2] = '9';
  write_text(dir / "a.jsonl", text);
  try {
    build_manifest(dir.path(), ShardKind::samples, &prior);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::integrity);
    EXPECT_NE(std::string(e.what()).find("a"), std::string::npos);
  }
}

TEST(BuildManifest, UnreadableShardIsNamed) {
  TempDir dir;
  write_shard(capcurate::testing::make_samples("a", 1), dir / "good.jsonl");
  write_text(dir / "broken.jsonl", "not json\n");
  try {
    build_manifest(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("broken"), std::string::npos) << e.what();
  }
}

TEST(Manifest, SaveLoadAndVerify) {
  TempDir dir;
  const auto m = capcurate::testing::make_dataset(dir / "ds", 3, 4);
  const auto loaded = load_manifest(dir / "ds");
  EXPECT_EQ(loaded, m);
  EXPECT_EQ(loaded.dump(), m.dump());
  EXPECT_NO_THROW(verify_manifest(loaded, dir / "ds"));
  std::uint64_t sum = 0;
  for (const auto& s : loaded.shards) sum += s.sample_count;
  EXPECT_EQ(sum, loaded.total_samples);
}

TEST(Manifest, RejectsInconsistentTotal) {
  TempDir dir;
  auto m = capcurate::testing::make_dataset(dir / "ds", 2, 2);
  Json j = m.to_json();
  j["total_samples"] = 5;
  EXPECT_THROW(DatasetManifest::from_json(j), Error);
}

TEST(Manifest, RejectsDuplicateShardIds) {
  TempDir dir;
  auto m = capcurate::testing::make_dataset(dir / "ds", 2, 2);
  Json j = m.to_json();
  j["shards"][1]["shard_id"] = j["shards"][0]["shard_id"];
  EXPECT_THROW(DatasetManifest::from_json(j), Error);
}

TEST(Checksum, KnownVector) {
  EXPECT_EQ(checksum_bytes("abc"), "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

// A million-line shard is read with bounded memory.
TEST(ReadShard, StreamsLargeShardInBoundedMemory) {
  TempDir dir;
  const auto path = dir / "big.jsonl";
  {
    std::ofstream out(path, std::ios::binary);
    for (int i = 0; i < 1'000'000; ++i) {
      out << R"({"sample_id":"s)" << i
          << R"(","image_ref":"img/)" << i << R"(.jpg","alt_text":null,"source_dataset":"SA1B","language":"EN"})"
          << '\n';
    }
  }
  const auto file_kb = std::filesystem::file_size(path) / 1024;
  const auto base = rss_kb();
  std::size_t peak = base;
  std::uint64_t n = 0;
  for (const auto& s : read_shard(path)) {
    (void)s;
    if (++n % 50'000 == 0) peak = std::max(peak, rss_kb());
  }
  EXPECT_EQ(n, 1'000'000u);
  // Growth stays far below the file size (~90 MB).
  EXPECT_LT(peak - base, file_kb / 8) << "rss grew " << (peak - base) << " kB for a " << file_kb << " kB shard";
}
