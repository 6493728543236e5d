#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "capcurate/annotate.hpp"
#include "capcurate/error.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace capcurate;
using namespace std::chrono_literals;
using capcurate::testing::make_dataset;
using capcurate::testing::make_sample;
using capcurate::testing::TempDir;

namespace {

const Timestamp kStart = parse_timestamp("2024-03-01T00:00:00Z");

TaskSpec fast_task(const std::string& id = "job") {
  TaskSpec t;
  t.task_id = id;
  t.rate_limit = 1e6;
  t.flush_interval = 2;
  return t;
}

struct Fixture {
  TempDir dir;
  DatasetManifest manifest;
  ManualClock clock{kStart};
  std::unique_ptr<Coordinator> coord;

  Fixture(std::size_t shards, std::size_t per_shard, TaskSpec task = fast_task()) {
    manifest = make_dataset(dir / "data", shards, per_shard);
    task.dataset_id = manifest.dataset_id;
    coord = Coordinator::create(dir / "job", plan_jobs(manifest, task), dir / "data", clock);
  }

  AnnotatorEnv env(const ShardLease& lease, TokenBucket* limiter = nullptr) {
    return AnnotatorEnv{coord->shard_path(lease.shard_id), coord->parts_dir(), coord.get(), &clock, limiter, 0ms};
  }
};

void append_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::app);
  out << text;
}

}  // namespace

TEST(BuildPrompt, RecaptionEmbedsAltTextVerbatim) {
  const auto p = build_prompt(make_sample("s", "a red barn"), CaptionMode::recaption);
  EXPECT_NE(p.find("a red barn"), std::string::npos);
  EXPECT_NE(p.find("<alt_text>a red barn</alt_text>"), std::string::npos);
}

TEST(BuildPrompt, CaptionModeHasNoAltSlot) {
  const auto p = build_prompt(make_sample("s", "a red barn"), CaptionMode::caption);
  EXPECT_EQ(p.find("alt_text"), std::string::npos);
  EXPECT_EQ(p.find("a red barn"), std::string::npos);
  EXPECT_EQ(build_prompt(make_sample("s"), CaptionMode::caption).find("alt"), std::string::npos);
}

TEST(BuildPrompt, RecaptionWithoutAltTextFails) {
  EXPECT_THROW(build_prompt(make_sample("s"), CaptionMode::recaption), Error);
}

TEST(BuildPrompt, ChineseSamplesGetChineseInstruction) {
  const auto p = build_prompt(make_sample("s", std::nullopt, "Laion", Language::CN), CaptionMode::caption);
  EXPECT_NE(p.find("请"), std::string::npos);
}

TEST(BuildPrompt, UnknownTemplateFails) {
  EXPECT_THROW(build_prompt(make_sample("s"), CaptionMode::caption, "nope"), Error);
}

TEST(TaskSpec, ValidatesBounds) {
  TaskSpec t = fast_task();
  t.max_retries = -1;
  EXPECT_THROW(t.validate(), Error);
  t = fast_task();
  t.rate_limit = 0;
  EXPECT_THROW(t.validate(), Error);
  t = fast_task();
  EXPECT_EQ(TaskSpec::from_json(t.to_json()).to_json(), t.to_json());
}

TEST(PlanJobs, AllShardsPending) {
  TempDir dir;
  const auto m = make_dataset(dir / "d", 5, 1);
  const auto plan = plan_jobs(m, fast_task());
  EXPECT_EQ(plan.pending_shards.size(), 5u);
  EXPECT_TRUE(plan.completed_shards.empty());
  EXPECT_EQ(plan_jobs(m, fast_task()).pending_shards, plan.pending_shards);
}

TEST(PlanJobs, EmptyManifestFails) {
  DatasetManifest m;
  m.dataset_id = "empty";
  try {
    plan_jobs(m, fast_task());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no shards"), std::string::npos);
  }
}

TEST(LeaseShard, ThirdWorkerGetsNoneWithTwoShards) {
  Fixture f(2, 3);
  EXPECT_TRUE(f.coord->lease_shard("job", "w1", 1s));
  EXPECT_TRUE(f.coord->lease_shard("job", "w2", 1s));
  EXPECT_FALSE(f.coord->lease_shard("job", "w3", 1s));
}

TEST(LeaseShard, ExpiredLeaseResumesAtCheckpoint) {
  Fixture f(1, 100);
  auto lease = f.coord->lease_shard("job", "w1", 1s);
  ASSERT_TRUE(lease);
  ASSERT_TRUE(f.coord->checkpoint(*lease, 40));
  EXPECT_FALSE(f.coord->lease_shard("job", "w2", 1s));
  f.clock.advance(1s);
  auto next = f.coord->lease_shard("job", "w2", 1s);
  ASSERT_TRUE(next);
  EXPECT_EQ(next->checkpoint_offset, 40u);
  EXPECT_GT(next->epoch, lease->epoch);
  // The old holder is fenced off.
  EXPECT_FALSE(f.coord->checkpoint(*lease, 50));
}

TEST(LeaseShard, AllDoneGivesNone) {
  Fixture f(1, 2);
  auto lease = f.coord->lease_shard("job", "w", 1s);
  ASSERT_TRUE(f.coord->complete(*lease, 2));
  EXPECT_TRUE(f.coord->all_done());
  EXPECT_FALSE(f.coord->lease_shard("job", "w", 1s));
}

TEST(LeaseShard, RejectsUnknownJobAndEmptyWorker) {
  Fixture f(1, 2);
  EXPECT_THROW(f.coord->lease_shard("other", "w", 1s), Error);
  EXPECT_THROW(f.coord->lease_shard("job", "", 1s), Error);
}

TEST(Coordinator, CheckpointOutsideRangeIsStateError) {
  Fixture f(1, 10);
  auto lease = f.coord->lease_shard("job", "w", 1s);
  ASSERT_TRUE(f.coord->checkpoint(*lease, 5));
  EXPECT_THROW(f.coord->checkpoint(*lease, 4), Error);
  EXPECT_THROW(f.coord->checkpoint(*lease, 11), Error);
  EXPECT_THROW(f.coord->complete(*lease, 9), Error);
}

TEST(Coordinator, CheckpointRenewsLease) {
  Fixture f(1, 10);
  auto lease = f.coord->lease_shard("job", "w", 100ms);
  f.clock.advance(80ms);
  ASSERT_TRUE(f.coord->checkpoint(*lease, 1));
  f.clock.advance(80ms);
  EXPECT_TRUE(f.coord->checkpoint(*lease, 2));
  EXPECT_FALSE(f.coord->lease_shard("job", "w2", 100ms));
}

TEST(Coordinator, ReopenReplaysJournal) {
  Fixture f(2, 10);
  auto lease = f.coord->lease_shard("job", "w", 1s);
  ASSERT_TRUE(f.coord->checkpoint(*lease, 7));
  auto other = f.coord->lease_shard("job", "w2", 1s);
  ASSERT_TRUE(f.coord->complete(*other, 10));
  f.coord.reset();

  auto reopened = Coordinator::open(f.dir / "job", f.clock);
  EXPECT_EQ(reopened->checkpoint_offset(lease->shard_id), 7u);
  EXPECT_EQ(reopened->plan().completed_shards.count(other->shard_id), 1u);
  EXPECT_EQ(reopened->active_leases().size(), 1u);
  EXPECT_TRUE(reopened->checkpoint(*lease, 8));
}

TEST(Coordinator, TornJournalTailIsIgnored) {
  Fixture f(1, 10);
  auto lease = f.coord->lease_shard("job", "w", 1s);
  ASSERT_TRUE(f.coord->checkpoint(*lease, 4));
  f.coord.reset();
  append_text(f.dir / "job" / "journal.jsonl", R"({"event":"checkpoint","shard_id":"s00","off)");
  auto reopened = Coordinator::open(f.dir / "job", f.clock);
  EXPECT_EQ(reopened->checkpoint_offset("s00"), 4u);
}

TEST(Coordinator, OpenUnknownJobFails) {
  TempDir dir;
  ManualClock clock;
  EXPECT_THROW(Coordinator::open(dir / "missing", clock), Error);
}

TEST(AnnotateShard, FaultFreeProducesAllRecords) {
  Fixture f(1, 10);
  MockCaptioner client;
  auto lease = f.coord->lease_shard("job", "w", 1s);
  const auto r = annotate_shard(*lease, client, fast_task(), f.env(*lease));
  EXPECT_EQ(r.outcome, ShardOutcome::completed);
  EXPECT_EQ(r.records.size(), 10u);
  EXPECT_TRUE(r.failures.empty());
  EXPECT_TRUE(f.coord->all_done());
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.caption_text, MockCaptioner::caption_for("images/" + rec.sample_id + ".jpg"));
    EXPECT_EQ(rec.task_id, "job");
  }
}

TEST(AnnotateShard, PermanentFailureIsRecordedAfterRetries) {
  Fixture f(1, 10);
  MockCaptioner::Options mo;
  mo.script = [](const std::string& ref, int) -> std::optional<CaptionFailure> {
    if (ref == "images/s00-3.jpg") return CaptionFailure{CaptionFailureKind::rejected, "refused"};
    return std::nullopt;
  };
  MockCaptioner client(mo);
  TaskSpec t = fast_task();
  t.max_retries = 2;
  auto lease = f.coord->lease_shard("job", "w", 1s);
  const auto r = annotate_shard(*lease, client, t, f.env(*lease));
  EXPECT_EQ(r.outcome, ShardOutcome::completed);
  EXPECT_EQ(r.records.size(), 9u);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].sample_id, "s00-3");
  EXPECT_EQ(r.failures[0].attempts, 3);
  EXPECT_EQ(client.attempts_for("images/s00-3.jpg"), 3);
}

TEST(AnnotateShard, TransientFailureRecovers) {
  Fixture f(1, 4);
  MockCaptioner::Options mo;
  mo.script = [](const std::string&, int attempt) -> std::optional<CaptionFailure> {
    if (attempt == 1) return CaptionFailure{CaptionFailureKind::rejected, "flaky"};
    return std::nullopt;
  };
  MockCaptioner client(mo);
  auto lease = f.coord->lease_shard("job", "w", 1s);
  const auto r = annotate_shard(*lease, client, fast_task(), f.env(*lease));
  EXPECT_EQ(r.records.size(), 4u);
  EXPECT_TRUE(r.failures.empty());
}

TEST(AnnotateShard, ResumeFromCheckpointProducesRemainder) {
  Fixture f(1, 10);
  auto first = f.coord->lease_shard("job", "w1", 1s);
  ASSERT_TRUE(f.coord->checkpoint(*first, 6));
  f.clock.advance(2s);
  auto lease = f.coord->lease_shard("job", "w2", 1s);
  ASSERT_EQ(lease->checkpoint_offset, 6u);
  MockCaptioner client;
  const auto r = annotate_shard(*lease, client, fast_task(), f.env(*lease));
  ASSERT_EQ(r.records.size(), 4u);
  EXPECT_EQ(r.records.front().sample_id, "s00-6");
  EXPECT_EQ(client.total_calls(), 4u);
}

TEST(AnnotateShard, LeaseLostStopsAtLastCheckpoint) {
  Fixture f(1, 10);
  auto lease = f.coord->lease_shard("job", "w", 100ms);
  MockCaptioner client;
  ShardAnnotator a(*lease, client, fast_task(), f.env(*lease));
  ASSERT_TRUE(a.step());
  ASSERT_TRUE(a.step());  // checkpoint at 2
  ASSERT_TRUE(a.step());
  f.clock.advance(200ms);
  auto thief = f.coord->lease_shard("job", "w2", 1s);
  ASSERT_TRUE(thief);
  EXPECT_EQ(thief->checkpoint_offset, 2u);
  EXPECT_FALSE(a.step());
  EXPECT_EQ(a.result().outcome, ShardOutcome::lease_lost);
  EXPECT_EQ(a.result().last_checkpoint, 2u);
  EXPECT_EQ(f.coord->checkpoint_offset("s00"), 2u);
}

TEST(AnnotateShard, UnreachableEndpointKeepsCheckpoint) {
  Fixture f(1, 10);
  MockCaptioner::Options mo;
  mo.script = [](const std::string& ref, int) -> std::optional<CaptionFailure> {
    if (ref == "images/s00-5.jpg") return CaptionFailure{CaptionFailureKind::unreachable, "connection refused"};
    return std::nullopt;
  };
  MockCaptioner client(mo);
  TaskSpec t = fast_task();
  t.flush_interval = 3;
  auto lease = f.coord->lease_shard("job", "w", 1s);
  const auto r = annotate_shard(*lease, client, t, f.env(*lease));
  EXPECT_EQ(r.outcome, ShardOutcome::endpoint_unreachable);
  EXPECT_EQ(r.records.size(), 5u);
  EXPECT_EQ(f.coord->checkpoint_offset("s00"), 5u);
  EXPECT_FALSE(f.coord->all_done());
  EXPECT_NE(r.message.find("s00-5"), std::string::npos);
}

TEST(AnnotateShard, RespectsRateLimit) {
  TaskSpec t = fast_task();
  t.rate_limit = 50;
  Fixture f(1, 11, t);
  TokenBucket bucket(50, 1);
  MockCaptioner client;
  SystemClock clock;
  auto lease = f.coord->lease_shard("job", "w", 60s);
  auto env = f.env(*lease, &bucket);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = annotate_shard(*lease, client, t, env);
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  EXPECT_EQ(r.records.size(), 11u);
  // 11 requests at 50/s with a burst of one need at least 200 ms.
  EXPECT_GE(elapsed, 190ms);
}

TEST(Finalize, PendingShardIsNamed) {
  Fixture f(2, 2);
  auto lease = f.coord->lease_shard("job", "w", 1s);
  MockCaptioner client;
  annotate_shard(*lease, client, fast_task(), f.env(*lease));
  try {
    finalize(f.dir / "job");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::state);
    EXPECT_NE(std::string(e.what()).find("s01"), std::string::npos) << e.what();
  }
}

TEST(Finalize, OverlapFromReleasedShardDedupes) {
  Fixture f(1, 4);
  MockCaptioner client;
  TaskSpec t = fast_task();
  t.flush_interval = 10;
  // First holder writes everything but never checkpoints, then expires.
  auto first = f.coord->lease_shard("job", "w1", 100ms);
  {
    ShardAnnotator a(*first, client, t, f.env(*first));
    for (int i = 0; i < 4; ++i) a.step();
  }
  f.clock.advance(1s);
  auto second = f.coord->lease_shard("job", "w2", 1s);
  ASSERT_EQ(second->checkpoint_offset, 0u);
  const auto r = annotate_shard(*second, client, t, f.env(*second));
  ASSERT_EQ(r.outcome, ShardOutcome::completed);

  const auto m = finalize(f.dir / "job");
  EXPECT_EQ(m.total_samples, 4u);
  const auto recs = read_records_all(f.dir / "job" / "final" / "s00.jsonl");
  ASSERT_EQ(recs.size(), 4u);
  // The later write wins.
  for (const auto& rec : recs) EXPECT_EQ(rec.created_at, kStart + 1s);
  EXPECT_EQ(recs[0].sample_id, "s00-0");
}

TEST(Finalize, IsByteIdenticalOnRerun) {
  Fixture f(3, 5);
  MockCaptioner client;
  while (auto lease = f.coord->lease_shard("job", "w", 1s)) {
    annotate_shard(*lease, client, fast_task(), f.env(*lease));
    f.clock.advance(10ms);
  }
  const auto m1 = finalize(f.dir / "job");
  const auto manifest1 = read_file(f.dir / "job" / "final" / "manifest.json");
  const auto shard1 = read_file(f.dir / "job" / "final" / "s01.jsonl");
  const auto m2 = finalize(f.dir / "job");
  EXPECT_EQ(read_file(f.dir / "job" / "final" / "manifest.json"), manifest1);
  EXPECT_EQ(read_file(f.dir / "job" / "final" / "s01.jsonl"), shard1);
  EXPECT_EQ(m1, m2);
  EXPECT_EQ(m1.total_samples, 15u);
  EXPECT_EQ(m1.kind, ShardKind::captions);
}

TEST(Finalize, FailuresAreListedOnce) {
  Fixture f(1, 3);
  MockCaptioner::Options mo;
  mo.script = [](const std::string& ref, int) -> std::optional<CaptionFailure> {
    if (ref == "images/s00-1.jpg") return CaptionFailure{CaptionFailureKind::rejected, "bad"};
    return std::nullopt;
  };
  MockCaptioner client(mo);
  auto lease = f.coord->lease_shard("job", "w", 1s);
  annotate_shard(*lease, client, fast_task(), f.env(*lease));
  const auto m = finalize(f.dir / "job");
  EXPECT_EQ(m.total_samples, 2u);
  const auto failures = read_file(f.dir / "job" / "final" / "failures.jsonl");
  EXPECT_NE(failures.find("s00-1"), std::string::npos);
  EXPECT_EQ(std::count(failures.begin(), failures.end(), '\n'), 1);
}

TEST(Finalize, ToleratesTornPartLine) {
  Fixture f(1, 3);
  MockCaptioner client;
  auto lease = f.coord->lease_shard("job", "w", 1s);
  annotate_shard(*lease, client, fast_task(), f.env(*lease));
  append_text(f.dir / "job" / "parts" / "s00.1.jsonl", R"({"sample_id":"s00-0","task_)");
  EXPECT_EQ(finalize(f.dir / "job").total_samples, 3u);
}

TEST(RunWorkers, CompletesAllShards) {
  TempDir dir;
  const auto m = make_dataset(dir / "data", 4, 5);
  SystemClock clock;
  auto coord = Coordinator::create(dir / "job", plan_jobs(m, fast_task()), dir / "data", clock);
  RunOptions opts;
  opts.workers = 3;
  opts.poll_interval = 1ms;
  const auto s = run_workers(*coord, [] { return std::make_unique<MockCaptioner>(); }, opts, clock);
  EXPECT_TRUE(s.all_done);
  EXPECT_EQ(s.records, 20u);
  EXPECT_EQ(s.shards_completed, 4u);
  EXPECT_TRUE(s.errors.empty());
  EXPECT_EQ(finalize(dir / "job").total_samples, 20u);
}

TEST(RunWorkers, StopsOnUnreachableEndpoint) {
  TempDir dir;
  const auto m = make_dataset(dir / "data", 2, 3);
  SystemClock clock;
  auto coord = Coordinator::create(dir / "job", plan_jobs(m, fast_task()), dir / "data", clock);
  RunOptions opts;
  opts.retry_backoff = 0ms;
  const auto s = run_workers(
      *coord,
      [] {
        MockCaptioner::Options mo;
        mo.script = [](const std::string&, int) -> std::optional<CaptionFailure> {
          return CaptionFailure{CaptionFailureKind::unreachable, "down"};
        };
        return std::make_unique<MockCaptioner>(mo);
      },
      opts, clock);
  EXPECT_FALSE(s.all_done);
  ASSERT_EQ(s.errors.size(), 1u);
  EXPECT_NE(s.errors[0].find("down"), std::string::npos);
}

TEST(ModelCheck, RandomInterleavingsKeepInvariants) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    TempDir dir;
    const auto out = capcurate::testing::run_interleaving(seed, dir.path());
    ASSERT_TRUE(out.violations.empty()) << "seed " << seed << ": " << out.violations.front();
  }
}

TEST(Throughput, FourWorkersScale) {
  TempDir dir;
  const auto t = capcurate::testing::run_throughput(dir.path(), 4, 8, 8);
  EXPECT_TRUE(t.all_done);
  EXPECT_LE(t.ratio(), 0.5) << t.single_seconds << "s vs " << t.multi_seconds << "s";
}
