#pragma once

// Annotation scenarios shared by the unit tests and the acceptance binary.

#include <chrono>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "capcurate/annotate.hpp"
#include "capcurate/checksum.hpp"
#include "support.hpp"

namespace capcurate::testing {

struct InterleavingOutcome {
  std::vector<std::string> violations;
  std::size_t actions = 0;
  std::size_t crashes = 0;
  std::size_t leases = 0;
};

// Forwards to the coordinator and remembers when each (shard, epoch) lease
// was last confirmed, so the harness can tell which workers still believe
// they hold a lease.
class RecordingAuthority final : public LeaseAuthority {
 public:
  RecordingAuthority(Coordinator& c, const ManualClock& clock) : c_(c), clock_(clock) {}

  bool checkpoint(const ShardLease& lease, std::uint64_t offset) override {
    const bool ok = c_.checkpoint(lease, offset);
    if (ok) renewed_[key(lease)] = clock_.now();
    return ok;
  }
  bool complete(const ShardLease& lease, std::uint64_t offset) override {
    const bool ok = c_.complete(lease, offset);
    if (ok) renewed_.erase(key(lease));
    return ok;
  }
  void granted(const ShardLease& lease) { renewed_[key(lease)] = clock_.now(); }
  std::optional<Timestamp> last_renewal(const ShardLease& lease) const {
    auto it = renewed_.find(key(lease));
    if (it == renewed_.end()) return std::nullopt;
    return it->second;
  }

 private:
  static std::string key(const ShardLease& l) { return l.shard_id + "#" + std::to_string(l.epoch); }
  Coordinator& c_;
  const ManualClock& clock_;
  std::map<std::string, Timestamp> renewed_;
};

struct CrashingCaption : std::runtime_error {
  CrashingCaption() : std::runtime_error("simulated worker crash") {}
};

// One randomized schedule: `workers` simulated workers step annotators,
// crash (drop their annotator, or throw from inside the captioner), and
// the clock jumps so leases expire. Checks lease exclusivity and progress
// monotonicity after every action, then that finalize emits every sample
// exactly once and that a second finalize is byte-identical.
inline InterleavingOutcome run_interleaving(std::uint64_t seed, const std::filesystem::path& root,
                                            std::size_t shards = 3, std::size_t per_shard = 7,
                                            std::size_t workers = 3) {
  using namespace std::chrono_literals;
  InterleavingOutcome out;
  std::mt19937_64 rng(seed);
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };

  const auto data_dir = root / "data";
  const auto manifest = make_dataset(data_dir, shards, per_shard);
  TaskSpec task;
  task.task_id = "job";
  task.dataset_id = manifest.dataset_id;
  task.max_retries = 1;
  task.rate_limit = 1e6;
  task.flush_interval = 1 + rng() % 3;
  const auto lease_duration = 100ms;

  ManualClock clock(parse_timestamp("2024-01-01T00:00:00Z"));
  auto coord = Coordinator::create(root / "job", plan_jobs(manifest, task), data_dir, clock);
  RecordingAuthority authority(*coord, clock);

  bool throw_next = false;
  MockCaptioner::Options mo;
  mo.script = [&](const std::string&, int) -> std::optional<CaptionFailure> {
    if (throw_next) {
      throw_next = false;
      throw CrashingCaption();
    }
    return std::nullopt;
  };
  MockCaptioner client(mo);

  struct Worker {
    std::unique_ptr<ShardAnnotator> annotator;
    ShardLease lease;
  };
  std::vector<Worker> pool(workers);
  std::map<std::string, std::uint64_t> last_offset;

  auto check_invariants = [&] {
    std::map<std::string, int> believers;
    for (const auto& w : pool) {
      if (!w.annotator || w.annotator->finished()) continue;
      auto renewed = authority.last_renewal(w.lease);
      if (renewed && clock.now() < *renewed + w.lease.duration) ++believers[w.lease.shard_id];
    }
    for (const auto& [shard, n] : believers) {
      if (n > 1) out.violations.push_back("two unexpired leases on shard " + shard);
    }
    for (const auto& s : manifest.shards) {
      const auto off = coord->checkpoint_offset(s.shard_id);
      if (off < last_offset[s.shard_id]) out.violations.push_back("checkpoint went backwards on " + s.shard_id);
      last_offset[s.shard_id] = off;
    }
    std::set<std::string> active;
    for (const auto& l : coord->active_leases()) {
      if (!active.insert(l.shard_id).second) out.violations.push_back("coordinator double-leased " + l.shard_id);
    }
  };

  const std::size_t max_actions = 20000;
  while (!coord->all_done() && out.actions < max_actions) {
    ++out.actions;
    const auto r = rng() % 100;
    if (r < 12) {
      clock.advance(std::chrono::milliseconds(rng() % 70));
    } else if (r < 16) {
      auto& w = pool[rng() % pool.size()];
      if (w.annotator) {
        w.annotator.reset();
        ++out.crashes;
      }
    } else {
      auto& w = pool[rng() % pool.size()];
      const std::string worker_id = "w" + std::to_string(&w - pool.data());
      if (!w.annotator || w.annotator->finished()) {
        w.annotator.reset();
        auto lease = coord->lease_shard("job", worker_id, lease_duration);
        if (!lease) {
          clock.advance(10ms);
        } else {
          ++out.leases;
          authority.granted(*lease);
          AnnotatorEnv env{coord->shard_path(lease->shard_id), coord->parts_dir(), &authority, &clock, nullptr, 0ms};
          w.lease = *lease;
          w.annotator = std::make_unique<ShardAnnotator>(*lease, client, task, env);
        }
      } else {
        throw_next = chance(0.03);
        try {
          w.annotator->step();
        } catch (const CrashingCaption&) {
          w.annotator.reset();
          ++out.crashes;
        }
        throw_next = false;
        if (chance(0.3)) clock.advance(std::chrono::milliseconds(rng() % 15));
      }
    }
    check_invariants();
  }
  if (!coord->all_done()) {
    out.violations.push_back("schedule did not finish within " + std::to_string(max_actions) + " actions");
    return out;
  }
  pool.clear();

  const auto m1 = finalize(root / "job");
  std::map<std::string, int> seen;
  for (const auto& s : m1.shards) {
    for (const auto& rec : read_records_all(root / "job" / "final" / s.path)) ++seen[rec.sample_id];
  }
  for (const auto& s : manifest.shards) {
    for (const auto& sample : read_shard_all(data_dir / s.path)) {
      const int n = seen[sample.sample_id];
      if (n != 1) {
        out.violations.push_back("sample " + sample.sample_id + " appears " + std::to_string(n) + " times");
      }
    }
  }
  const auto bytes1 = read_file(root / "job" / "final" / "manifest.json");
  const auto m2 = finalize(root / "job");
  const auto bytes2 = read_file(root / "job" / "final" / "manifest.json");
  if (bytes1 != bytes2 || m1.dump() != m2.dump()) out.violations.push_back("re-finalize changed the manifest");
  return out;
}

struct ThroughputOutcome {
  double single_seconds = 0;
  double multi_seconds = 0;
  bool all_done = true;
  double ratio() const { return multi_seconds / single_seconds; }
};

// Wall clock of a full run with 1 worker and with `workers` workers over the
// same dataset, captioner latency fixed.
inline ThroughputOutcome run_throughput(const std::filesystem::path& root, std::size_t workers = 4,
                                        std::size_t shards = 8, std::size_t per_shard = 12,
                                        std::chrono::milliseconds latency = std::chrono::milliseconds(10)) {
  ThroughputOutcome out;
  const auto manifest = make_dataset(root / "data", shards, per_shard);
  auto timed = [&](std::size_t w, const std::string& job) {
    TaskSpec task;
    task.task_id = job;
    task.dataset_id = manifest.dataset_id;
    task.rate_limit = 1e6;
    SystemClock clock;
    auto coord = Coordinator::create(root / job, plan_jobs(manifest, task), root / "data", clock);
    RunOptions opts;
    opts.workers = w;
    opts.poll_interval = std::chrono::milliseconds(2);
    const auto t0 = std::chrono::steady_clock::now();
    auto summary = run_workers(
        *coord,
        [&] {
          MockCaptioner::Options mo;
          mo.latency = latency;
          return std::make_unique<MockCaptioner>(mo);
        },
        opts, clock);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.all_done = out.all_done && summary.all_done;
    return secs;
  };
  out.single_seconds = timed(1, "single");
  out.multi_seconds = timed(workers, "multi");
  return out;
}

}  // namespace capcurate::testing
