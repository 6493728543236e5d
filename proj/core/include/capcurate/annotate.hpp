#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "capcurate/captioner.hpp"
#include "capcurate/corpus.hpp"
#include "capcurate/journal.hpp"
#include "capcurate/rate_limiter.hpp"
#include "capcurate/time.hpp"

namespace capcurate {

inline constexpr std::string_view kDefaultPromptTemplate = "detail-v1";
inline constexpr std::size_t kDefaultFlushInterval = 64;

struct TaskSpec {
  std::string task_id;
  std::string dataset_id;
  CaptionMode mode = CaptionMode::caption;
  std::string prompt_template_id{kDefaultPromptTemplate};
  int max_retries = 2;
  double rate_limit = 10.0;  // requests per second per worker
  std::size_t flush_interval = kDefaultFlushInterval;

  void validate() const;
  Json to_json() const;
  static TaskSpec from_json(const Json& obj);
};

// Renders the captioning prompt. Recaption prompts carry the alt-text
// verbatim in a dedicated slot; caption prompts have no such slot.
std::string build_prompt(const CaptionSample& sample, CaptionMode mode,
                         std::string_view template_id = kDefaultPromptTemplate);
std::vector<std::string> prompt_template_ids();

struct JobPlan {
  std::string job_id;
  TaskSpec task;
  std::vector<std::string> pending_shards;  // manifest order
  std::set<std::string> completed_shards;

  Json to_json() const;
  static JobPlan from_json(const Json& obj);
};

// All shards pending, in manifest (shard id) order. The job id is the
// task id.
JobPlan plan_jobs(const DatasetManifest& manifest, const TaskSpec& task);

struct ShardLease {
  std::string job_id;
  std::string shard_id;
  std::string worker_id;
  Timestamp lease_expiry{};
  std::uint64_t checkpoint_offset = 0;
  // Increments on every grant of the shard; fences stale holders.
  std::uint64_t epoch = 0;
  std::chrono::milliseconds duration{0};
};

// What a worker reports progress to. Both calls return false when the lease
// is no longer held (expired or superseded); the worker must stop.
class LeaseAuthority {
 public:
  virtual ~LeaseAuthority() = default;
  virtual bool checkpoint(const ShardLease& lease, std::uint64_t offset) = 0;
  virtual bool complete(const ShardLease& lease, std::uint64_t offset) = 0;
};

// Owns lease state for one job. Every transition is appended to
// `<job_dir>/journal.jsonl` before it takes effect, and open() rebuilds the
// state by replaying that journal. Calls are serialised internally.
class Coordinator final : public LeaseAuthority {
 public:
  static std::unique_ptr<Coordinator> create(const std::filesystem::path& job_dir, const JobPlan& plan,
                                             const std::filesystem::path& dataset_root, const Clock& clock);
  static std::unique_ptr<Coordinator> open(const std::filesystem::path& job_dir, const Clock& clock);

  std::optional<ShardLease> lease_shard(std::string_view job_id, std::string_view worker_id,
                                        std::chrono::milliseconds lease_duration);
  bool checkpoint(const ShardLease& lease, std::uint64_t offset) override;
  bool complete(const ShardLease& lease, std::uint64_t offset) override;

  JobPlan plan() const;
  bool all_done() const;
  std::uint64_t checkpoint_offset(std::string_view shard_id) const;
  // Leases that have not expired at the coordinator's current time.
  std::vector<ShardLease> active_leases() const;
  bool has_progress() const;

  const std::string& job_id() const noexcept { return plan_.job_id; }
  const TaskSpec& task() const noexcept { return plan_.task; }
  const DatasetManifest& dataset() const noexcept { return dataset_; }
  const std::filesystem::path& dataset_root() const noexcept { return dataset_root_; }
  const std::filesystem::path& job_dir() const noexcept { return job_dir_; }
  std::filesystem::path parts_dir() const { return job_dir_ / "parts"; }
  std::filesystem::path shard_path(std::string_view shard_id) const;

 private:
  struct ShardState {
    std::uint64_t sample_count = 0;
    std::uint64_t offset = 0;
    bool done = false;
    std::uint64_t epoch = 0;
    std::optional<ShardLease> lease;
  };

  Coordinator(std::filesystem::path job_dir, JobPlan plan, std::filesystem::path dataset_root,
              DatasetManifest dataset, const Clock& clock);

  void apply(const Json& event);
  bool holds(const ShardState& st, const ShardLease& lease, Timestamp now) const;
  ShardState& state_of(const std::string& shard_id);

  std::filesystem::path job_dir_;
  JobPlan plan_;
  std::filesystem::path dataset_root_;
  DatasetManifest dataset_;
  const Clock* clock_;
  std::map<std::string, ShardState, std::less<>> shards_;
  std::unique_ptr<Journal> journal_;
  mutable std::mutex mu_;
};

struct FailureRecord {
  std::string sample_id;
  int attempts = 0;
  std::string error;

  Json to_json() const;
  static FailureRecord from_json(const Json& obj);
};

enum class ShardOutcome { completed, lease_lost, endpoint_unreachable };
std::string_view to_string(ShardOutcome outcome) noexcept;

struct AnnotationResult {
  std::vector<CaptionRecord> records;
  std::vector<FailureRecord> failures;
  ShardOutcome outcome = ShardOutcome::completed;
  std::uint64_t offset = 0;  // samples processed (records + failures), from 0
  std::uint64_t last_checkpoint = 0;
  std::string message;
};

struct AnnotatorEnv {
  std::filesystem::path shard_path;
  std::filesystem::path parts_dir;
  LeaseAuthority* authority = nullptr;
  const Clock* clock = nullptr;
  TokenBucket* limiter = nullptr;  // optional
  std::chrono::milliseconds retry_backoff{0};
};

// Annotates one leased shard, one sample per step(). Output goes to
// `<parts_dir>/<shard>.<epoch>.jsonl` and is flushed before each checkpoint,
// so every checkpointed sample is durable. Sample-level failures are retried
// up to max_retries and then recorded; they never abort the shard.
class ShardAnnotator {
 public:
  ShardAnnotator(ShardLease lease, CaptionerClient& client, const TaskSpec& spec, AnnotatorEnv env);

  // Processes the next sample. Returns false once the shard is finished
  // (completed, lease lost, or endpoint unreachable).
  bool step();
  bool finished() const noexcept { return finished_; }
  const AnnotationResult& result() const noexcept { return result_; }
  AnnotationResult take_result() { return std::move(result_); }

 private:
  void flush_outputs();
  void finish(ShardOutcome outcome, std::string message = {});

  ShardLease lease_;
  CaptionerClient* client_;
  TaskSpec spec_;
  AnnotatorEnv env_;
  std::unique_ptr<ShardReader> reader_;
  std::unique_ptr<JsonlWriter> out_;
  std::unique_ptr<JsonlWriter> failures_out_;
  std::size_t since_flush_ = 0;
  bool finished_ = false;
  AnnotationResult result_;
};

AnnotationResult annotate_shard(const ShardLease& lease, CaptionerClient& client, const TaskSpec& spec,
                                const AnnotatorEnv& env);

struct RunOptions {
  std::size_t workers = 1;
  std::chrono::milliseconds lease_duration{std::chrono::minutes(5)};
  std::chrono::milliseconds poll_interval{20};
  std::chrono::milliseconds retry_backoff{100};
  std::string worker_prefix = "worker";
};

struct RunSummary {
  std::size_t shards_completed = 0;
  std::size_t records = 0;
  std::size_t failures = 0;
  std::size_t leases_lost = 0;
  std::vector<std::string> errors;
  bool all_done = false;
};

using CaptionerFactory = std::function<std::unique_ptr<CaptionerClient>()>;

// Runs `workers` threads against the coordinator until every shard is done
// or a worker hits an unreachable endpoint. Each worker has its own client
// and its own token bucket.
RunSummary run_workers(Coordinator& coordinator, const CaptionerFactory& make_client, const RunOptions& options,
                       const Clock& clock);

// Deduplicates part outputs by (sample_id, task_id), keeping the latest
// created_at, and writes `<job_dir>/final/` with a manifest. Deterministic:
// repeated calls produce byte-identical files.
DatasetManifest finalize(const std::filesystem::path& job_dir);

}  // namespace capcurate
