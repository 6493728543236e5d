#include "capcurate/annotate.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <tuple>
#include <unordered_map>

#include "capcurate/error.hpp"

namespace capcurate {

namespace fs = std::filesystem;

void TaskSpec::validate() const {
  if (task_id.empty()) throw Error(ErrorCode::invalid_argument, "task_id must be non-empty");
  if (max_retries < 0) throw Error(ErrorCode::invalid_argument, "max_retries must be >= 0");
  if (!(rate_limit > 0.0)) throw Error(ErrorCode::invalid_argument, "rate_limit must be > 0");
  if (flush_interval == 0) throw Error(ErrorCode::invalid_argument, "flush_interval must be >= 1");
  const auto ids = prompt_template_ids();
  if (std::find(ids.begin(), ids.end(), prompt_template_id) == ids.end()) {
    throw Error(ErrorCode::invalid_argument, "unknown prompt template '" + prompt_template_id + "'");
  }
}

Json TaskSpec::to_json() const {
  return Json{{"task_id", task_id},
              {"dataset_id", dataset_id},
              {"mode", to_string(mode)},
              {"prompt_template_id", prompt_template_id},
              {"max_retries", max_retries},
              {"rate_limit", rate_limit},
              {"flush_interval", flush_interval}};
}

TaskSpec TaskSpec::from_json(const Json& obj) {
  TaskSpec t;
  t.task_id = obj.at("task_id").get<std::string>();
  t.dataset_id = obj.value("dataset_id", std::string{});
  t.mode = parse_caption_mode(obj.at("mode").get<std::string>());
  t.prompt_template_id = obj.value("prompt_template_id", std::string(kDefaultPromptTemplate));
  t.max_retries = obj.value("max_retries", 2);
  t.rate_limit = obj.value("rate_limit", 10.0);
  t.flush_interval = obj.value("flush_interval", kDefaultFlushInterval);
  t.validate();
  return t;
}

namespace {

struct PromptTemplate {
  std::string_view id;
  std::string_view en_instruction;
  std::string_view cn_instruction;
};

constexpr PromptTemplate kTemplates[] = {
    {"detail-v1",
     "Describe this image in detail. Cover every visible object with its attributes (color, shape, "
     "material, count), the spatial relations between objects, any legible text, and the overall scene "
     "and atmosphere. Describe only what is visible; do not speculate.",
     "请详细描述这张图片。描述所有可见物体及其属性（颜色、形状、材质、数量）、物体之间的空间关系、"
     "图中可辨认的文字，以及整体场景和氛围。只描述可见内容，不要猜测。"},
    {"brief-v1", "Describe this image in one or two sentences, naming the main subject and setting.",
     "请用一两句话描述这张图片，说明主要对象和场景。"},
};

const PromptTemplate& find_template(std::string_view id) {
  for (const auto& t : kTemplates) {
    if (t.id == id) return t;
  }
  throw Error(ErrorCode::invalid_argument, "unknown prompt template '" + std::string(id) + "'");
}

}  // namespace

std::vector<std::string> prompt_template_ids() {
  std::vector<std::string> ids;
  for (const auto& t : kTemplates) ids.emplace_back(t.id);
  return ids;
}

std::string build_prompt(const CaptionSample& sample, CaptionMode mode, std::string_view template_id) {
  const auto& tmpl = find_template(template_id);
  const bool cn = sample.language == Language::CN;
  std::string prompt(cn ? tmpl.cn_instruction : tmpl.en_instruction);
  if (mode == CaptionMode::recaption) {
    if (!sample.alt_text) {
      throw Error(ErrorCode::invalid_argument,
                  "sample '" + sample.sample_id + "': recaption mode requires alt_text");
    }
    prompt += cn ? "\n以下是该图片的原始替代文本，可能不完整或有噪声，仅作为补充背景知识参考：\n"
                 : "\nThe original alt-text for this image follows. It may be incomplete or noisy; use it "
                   "only as supplementary world knowledge.\n";
    prompt += "<alt_text>";
    prompt += *sample.alt_text;
    prompt += "</alt_text>";
  }
  return prompt;
}

Json JobPlan::to_json() const {
  return Json{{"job_id", job_id},
              {"task", task.to_json()},
              {"pending_shards", pending_shards},
              {"completed_shards", completed_shards}};
}

JobPlan JobPlan::from_json(const Json& obj) {
  JobPlan p;
  p.job_id = obj.at("job_id").get<std::string>();
  p.task = TaskSpec::from_json(obj.at("task"));
  p.pending_shards = obj.at("pending_shards").get<std::vector<std::string>>();
  p.completed_shards = obj.value("completed_shards", std::set<std::string>{});
  return p;
}

JobPlan plan_jobs(const DatasetManifest& manifest, const TaskSpec& task) {
  task.validate();
  if (manifest.shards.empty()) {
    throw Error(ErrorCode::invalid_argument, "no shards in dataset '" + manifest.dataset_id + "'");
  }
  JobPlan plan;
  plan.job_id = task.task_id;
  plan.task = task;
  if (plan.task.dataset_id.empty()) plan.task.dataset_id = manifest.dataset_id;
  std::vector<std::string> ids;
  for (const auto& s : manifest.shards) ids.push_back(s.shard_id);
  std::sort(ids.begin(), ids.end());
  plan.pending_shards = std::move(ids);
  return plan;
}

// ---------------------------------------------------------------------------
// Coordinator

namespace {

constexpr std::string_view kPlanFile = "plan.json";
constexpr std::string_view kJournalFile = "journal.jsonl";

Json lease_json(const ShardLease& l) {
  return Json{{"shard_id", l.shard_id},
              {"worker_id", l.worker_id},
              {"epoch", l.epoch},
              {"lease_expiry", format_timestamp(l.lease_expiry)},
              {"checkpoint_offset", l.checkpoint_offset},
              {"duration_ms", l.duration.count()}};
}

}  // namespace

Coordinator::Coordinator(fs::path job_dir, JobPlan plan, fs::path dataset_root, DatasetManifest dataset,
                         const Clock& clock)
    : job_dir_(std::move(job_dir)),
      plan_(std::move(plan)),
      dataset_root_(std::move(dataset_root)),
      dataset_(std::move(dataset)),
      clock_(&clock) {
  auto track = [&](const std::string& id) -> ShardState& {
    const auto* shard = dataset_.find(id);
    if (shard == nullptr) {
      throw Error(ErrorCode::integrity, "plan references shard '" + id + "' missing from dataset manifest");
    }
    auto& st = shards_[id];
    st.sample_count = shard->sample_count;
    return st;
  };
  for (const auto& id : plan_.pending_shards) track(id);
  for (const auto& id : plan_.completed_shards) {
    auto& st = track(id);
    st.done = true;
    st.offset = st.sample_count;
  }
}

std::unique_ptr<Coordinator> Coordinator::create(const fs::path& job_dir, const JobPlan& plan,
                                                 const fs::path& dataset_root, const Clock& clock) {
  if (fs::exists(job_dir / kJournalFile)) {
    throw Error(ErrorCode::conflict, "job directory already holds a journal: " + job_dir.string());
  }
  auto dataset = load_manifest(dataset_root);
  fs::create_directories(job_dir / "parts");
  Json plan_json = plan.to_json();
  plan_json["dataset_root"] = fs::absolute(dataset_root).lexically_normal().string();
  atomic_write_file(job_dir / kPlanFile, plan_json.dump(2) + "\n");
  std::unique_ptr<Coordinator> c(new Coordinator(job_dir, plan, dataset_root, std::move(dataset), clock));
  c->journal_ = std::make_unique<Journal>(job_dir / kJournalFile);
  return c;
}

std::unique_ptr<Coordinator> Coordinator::open(const fs::path& job_dir, const Clock& clock) {
  const auto plan_path = job_dir / kPlanFile;
  if (!fs::exists(plan_path)) {
    throw Error(ErrorCode::not_found, "unknown job: no plan at " + plan_path.string());
  }
  const Json plan_json = Json::parse(read_file(plan_path));
  JobPlan plan = JobPlan::from_json(plan_json);
  const fs::path root = plan_json.at("dataset_root").get<std::string>();
  auto dataset = load_manifest(root);
  std::unique_ptr<Coordinator> c(new Coordinator(job_dir, std::move(plan), root, std::move(dataset), clock));
  Journal::replay(job_dir / kJournalFile, [&](const Json& ev) { c->apply(ev); });
  fs::create_directories(job_dir / "parts");
  c->journal_ = std::make_unique<Journal>(job_dir / kJournalFile);
  return c;
}

Coordinator::ShardState& Coordinator::state_of(const std::string& shard_id) {
  auto it = shards_.find(shard_id);
  if (it == shards_.end()) {
    throw Error(ErrorCode::not_found, "unknown shard '" + shard_id + "' in job '" + plan_.job_id + "'");
  }
  return it->second;
}

void Coordinator::apply(const Json& ev) {
  const std::string kind = ev.at("event").get<std::string>();
  auto& st = state_of(ev.at("shard_id").get<std::string>());
  if (kind == "lease_granted") {
    ShardLease l;
    l.job_id = plan_.job_id;
    l.shard_id = ev.at("shard_id").get<std::string>();
    l.worker_id = ev.at("worker_id").get<std::string>();
    l.epoch = ev.at("epoch").get<std::uint64_t>();
    l.lease_expiry = parse_timestamp(ev.at("lease_expiry").get<std::string>());
    l.checkpoint_offset = ev.at("checkpoint_offset").get<std::uint64_t>();
    l.duration = std::chrono::milliseconds(ev.at("duration_ms").get<std::int64_t>());
    st.epoch = l.epoch;
    st.lease = std::move(l);
  } else if (kind == "checkpoint") {
    st.offset = std::max(st.offset, ev.at("offset").get<std::uint64_t>());
    if (st.lease) st.lease->lease_expiry = parse_timestamp(ev.at("lease_expiry").get<std::string>());
  } else if (kind == "shard_done") {
    st.offset = st.sample_count;
    st.done = true;
    st.lease.reset();
  } else {
    throw Error(ErrorCode::parse, "unknown journal event '" + kind + "'");
  }
}

bool Coordinator::holds(const ShardState& st, const ShardLease& lease, Timestamp now) const {
  return !st.done && st.lease && st.epoch == lease.epoch && st.lease->worker_id == lease.worker_id &&
         now < st.lease->lease_expiry;
}

std::optional<ShardLease> Coordinator::lease_shard(std::string_view job_id, std::string_view worker_id,
                                                   std::chrono::milliseconds lease_duration) {
  if (job_id != plan_.job_id) {
    throw Error(ErrorCode::not_found, "unknown job '" + std::string(job_id) + "'");
  }
  if (worker_id.empty()) throw Error(ErrorCode::invalid_argument, "worker_id must be non-empty");
  if (lease_duration.count() <= 0) throw Error(ErrorCode::invalid_argument, "lease duration must be positive");

  std::lock_guard lock(mu_);
  const Timestamp now = clock_->now();
  for (const auto& id : plan_.pending_shards) {
    auto& st = shards_.at(id);
    if (st.done) continue;
    if (st.lease && now < st.lease->lease_expiry) continue;
    ShardLease l;
    l.job_id = plan_.job_id;
    l.shard_id = id;
    l.worker_id = std::string(worker_id);
    l.epoch = st.epoch + 1;
    l.lease_expiry = now + lease_duration;
    l.checkpoint_offset = st.offset;
    l.duration = lease_duration;
    Json ev = lease_json(l);
    ev["event"] = "lease_granted";
    journal_->append(ev);
    st.epoch = l.epoch;
    st.lease = l;
    return l;
  }
  return std::nullopt;
}

bool Coordinator::checkpoint(const ShardLease& lease, std::uint64_t offset) {
  std::lock_guard lock(mu_);
  auto& st = state_of(lease.shard_id);
  const Timestamp now = clock_->now();
  if (!holds(st, lease, now)) return false;
  if (offset < st.offset || offset > st.sample_count) {
    throw Error(ErrorCode::state, "shard '" + lease.shard_id + "': checkpoint offset " + std::to_string(offset) +
                                      " outside [" + std::to_string(st.offset) + ", " +
                                      std::to_string(st.sample_count) + "]");
  }
  const Timestamp expiry = now + st.lease->duration;
  journal_->append(Json{{"event", "checkpoint"},
                        {"shard_id", lease.shard_id},
                        {"worker_id", lease.worker_id},
                        {"epoch", lease.epoch},
                        {"offset", offset},
                        {"lease_expiry", format_timestamp(expiry)}});
  st.offset = offset;
  st.lease->lease_expiry = expiry;
  return true;
}

bool Coordinator::complete(const ShardLease& lease, std::uint64_t offset) {
  std::lock_guard lock(mu_);
  auto& st = state_of(lease.shard_id);
  if (!holds(st, lease, clock_->now())) return false;
  if (offset != st.sample_count) {
    throw Error(ErrorCode::state, "shard '" + lease.shard_id + "': completed at offset " + std::to_string(offset) +
                                      " but holds " + std::to_string(st.sample_count) + " samples");
  }
  journal_->append(Json{{"event", "shard_done"},
                        {"shard_id", lease.shard_id},
                        {"worker_id", lease.worker_id},
                        {"epoch", lease.epoch},
                        {"offset", offset}});
  st.offset = offset;
  st.done = true;
  st.lease.reset();
  return true;
}

JobPlan Coordinator::plan() const {
  std::lock_guard lock(mu_);
  JobPlan p = plan_;
  p.pending_shards.clear();
  for (const auto& id : plan_.pending_shards) {
    if (shards_.at(id).done) {
      p.completed_shards.insert(id);
    } else {
      p.pending_shards.push_back(id);
    }
  }
  return p;
}

bool Coordinator::all_done() const {
  std::lock_guard lock(mu_);
  return std::all_of(shards_.begin(), shards_.end(), [](const auto& kv) { return kv.second.done; });
}

std::uint64_t Coordinator::checkpoint_offset(std::string_view shard_id) const {
  std::lock_guard lock(mu_);
  auto it = shards_.find(shard_id);
  if (it == shards_.end()) throw Error(ErrorCode::not_found, "unknown shard '" + std::string(shard_id) + "'");
  return it->second.offset;
}

std::vector<ShardLease> Coordinator::active_leases() const {
  std::lock_guard lock(mu_);
  const Timestamp now = clock_->now();
  std::vector<ShardLease> out;
  for (const auto& [id, st] : shards_) {
    if (!st.done && st.lease && now < st.lease->lease_expiry) out.push_back(*st.lease);
  }
  return out;
}

bool Coordinator::has_progress() const {
  std::lock_guard lock(mu_);
  return std::any_of(shards_.begin(), shards_.end(),
                     [](const auto& kv) { return kv.second.epoch > 0 || kv.second.done; });
}

fs::path Coordinator::shard_path(std::string_view shard_id) const {
  const auto* s = dataset_.find(shard_id);
  if (s == nullptr) throw Error(ErrorCode::not_found, "unknown shard '" + std::string(shard_id) + "'");
  return dataset_root_ / s->path;
}

// ---------------------------------------------------------------------------
// Annotation

Json FailureRecord::to_json() const {
  return Json{{"sample_id", sample_id}, {"attempts", attempts}, {"error", error}};
}

FailureRecord FailureRecord::from_json(const Json& obj) {
  return FailureRecord{obj.at("sample_id").get<std::string>(), obj.at("attempts").get<int>(),
                       obj.value("error", std::string{})};
}

std::string_view to_string(ShardOutcome outcome) noexcept {
  switch (outcome) {
    case ShardOutcome::completed: return "completed";
    case ShardOutcome::lease_lost: return "lease_lost";
    case ShardOutcome::endpoint_unreachable: return "endpoint_unreachable";
  }
  return "completed";
}

namespace {

std::string part_stem(const ShardLease& lease) { return lease.shard_id + "." + std::to_string(lease.epoch); }

}  // namespace

ShardAnnotator::ShardAnnotator(ShardLease lease, CaptionerClient& client, const TaskSpec& spec, AnnotatorEnv env)
    : lease_(std::move(lease)), client_(&client), spec_(spec), env_(std::move(env)) {
  spec_.validate();
  if (env_.authority == nullptr || env_.clock == nullptr) {
    throw Error(ErrorCode::invalid_argument, "annotator needs a lease authority and a clock");
  }
  reader_ = std::make_unique<ShardReader>(env_.shard_path);
  for (std::uint64_t i = 0; i < lease_.checkpoint_offset; ++i) {
    if (!reader_->next()) {
      throw Error(ErrorCode::state, "shard '" + lease_.shard_id + "': checkpoint offset " +
                                        std::to_string(lease_.checkpoint_offset) + " beyond end of shard");
    }
  }
  fs::create_directories(env_.parts_dir);
  const auto stem = part_stem(lease_);
  out_ = std::make_unique<JsonlWriter>(env_.parts_dir / (stem + ".jsonl"), JsonlWriter::Mode::append);
  failures_out_ =
      std::make_unique<JsonlWriter>(env_.parts_dir / (stem + ".failures.jsonl"), JsonlWriter::Mode::append);
  result_.offset = lease_.checkpoint_offset;
  result_.last_checkpoint = lease_.checkpoint_offset;
}

void ShardAnnotator::flush_outputs() {
  out_->flush();
  failures_out_->flush();
  since_flush_ = 0;
}

void ShardAnnotator::finish(ShardOutcome outcome, std::string message) {
  finished_ = true;
  result_.outcome = outcome;
  result_.message = std::move(message);
}

bool ShardAnnotator::step() {
  if (finished_) return false;

  auto sample = reader_->next();
  if (!sample) {
    flush_outputs();
    if (env_.authority->complete(lease_, result_.offset)) {
      result_.last_checkpoint = result_.offset;
      finish(ShardOutcome::completed);
    } else {
      finish(ShardOutcome::lease_lost, "lease lost before completion");
    }
    return false;
  }

  const int max_attempts = 1 + spec_.max_retries;
  int attempts = 0;
  std::optional<CaptionFailure> last_failure;
  std::optional<std::string> caption;
  std::string prompt;
  try {
    prompt = build_prompt(*sample, spec_.mode, spec_.prompt_template_id);
  } catch (const Error& e) {
    last_failure = CaptionFailure{CaptionFailureKind::rejected, e.what()};
  }
  if (!last_failure) {
    while (attempts < max_attempts) {
      if (attempts > 0 && env_.retry_backoff.count() > 0) std::this_thread::sleep_for(env_.retry_backoff * attempts);
      if (env_.limiter != nullptr) env_.limiter->acquire();
      ++attempts;
      auto outcome = client_->generate(prompt, sample->image_ref);
      if (auto* text = std::get_if<std::string>(&outcome); text != nullptr && !text->empty()) {
        caption = std::move(*text);
        last_failure.reset();
        break;
      }
      last_failure = std::holds_alternative<CaptionFailure>(outcome)
                         ? std::get<CaptionFailure>(outcome)
                         : CaptionFailure{CaptionFailureKind::rejected, "empty caption"};
    }
  }

  if (caption) {
    CaptionRecord rec;
    rec.sample_id = sample->sample_id;
    rec.task_id = spec_.task_id;
    rec.caption_text = std::move(*caption);
    rec.captioner_id = client_->model_id();
    rec.mode = spec_.mode;
    rec.created_at = env_.clock->now();
    out_->write(rec.to_json());
    result_.records.push_back(std::move(rec));
  } else if (last_failure->kind == CaptionFailureKind::unreachable) {
    // The sample is not consumed; a later lease retries it.
    flush_outputs();
    if (result_.offset > result_.last_checkpoint && env_.authority->checkpoint(lease_, result_.offset)) {
      result_.last_checkpoint = result_.offset;
    }
    finish(ShardOutcome::endpoint_unreachable, "endpoint unreachable after " + std::to_string(attempts) +
                                                   " attempts on sample '" + sample->sample_id +
                                                   "': " + last_failure->message);
    return false;
  } else {
    FailureRecord f{sample->sample_id, attempts, last_failure->message};
    failures_out_->write(f.to_json());
    result_.failures.push_back(std::move(f));
  }

  ++result_.offset;
  if (++since_flush_ >= spec_.flush_interval) {
    flush_outputs();
    if (!env_.authority->checkpoint(lease_, result_.offset)) {
      finish(ShardOutcome::lease_lost, "lease lost at offset " + std::to_string(result_.offset));
      return false;
    }
    result_.last_checkpoint = result_.offset;
  }
  return true;
}

AnnotationResult annotate_shard(const ShardLease& lease, CaptionerClient& client, const TaskSpec& spec,
                                const AnnotatorEnv& env) {
  ShardAnnotator annotator(lease, client, spec, env);
  while (annotator.step()) {
  }
  return annotator.take_result();
}

RunSummary run_workers(Coordinator& coordinator, const CaptionerFactory& make_client, const RunOptions& options,
                       const Clock& clock) {
  if (options.workers == 0) throw Error(ErrorCode::invalid_argument, "workers must be >= 1");
  const TaskSpec task = coordinator.task();
  RunSummary summary;
  std::mutex summary_mu;
  std::atomic<bool> stop{false};

  auto worker_main = [&](std::size_t index) {
    const std::string worker_id = options.worker_prefix + "-" + std::to_string(index);
    auto client = make_client();
    TokenBucket bucket(task.rate_limit, std::max(1.0, task.rate_limit));
    while (!stop.load()) {
      auto lease = coordinator.lease_shard(coordinator.job_id(), worker_id, options.lease_duration);
      if (!lease) {
        if (coordinator.all_done()) return;
        std::this_thread::sleep_for(options.poll_interval);
        continue;
      }
      AnnotatorEnv env;
      env.shard_path = coordinator.shard_path(lease->shard_id);
      env.parts_dir = coordinator.parts_dir();
      env.authority = &coordinator;
      env.clock = &clock;
      env.limiter = &bucket;
      env.retry_backoff = options.retry_backoff;
      AnnotationResult r;
      try {
        r = annotate_shard(*lease, *client, task, env);
      } catch (const std::exception& e) {
        std::lock_guard lock(summary_mu);
        summary.errors.push_back(worker_id + ": shard '" + lease->shard_id + "': " + e.what());
        stop = true;
        return;
      }
      std::lock_guard lock(summary_mu);
      summary.records += r.records.size();
      summary.failures += r.failures.size();
      switch (r.outcome) {
        case ShardOutcome::completed: ++summary.shards_completed; break;
        case ShardOutcome::lease_lost: ++summary.leases_lost; break;
        case ShardOutcome::endpoint_unreachable:
          summary.errors.push_back(worker_id + ": shard '" + lease->shard_id + "': " + r.message);
          stop = true;
          return;
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(options.workers);
  for (std::size_t i = 0; i < options.workers; ++i) threads.emplace_back(worker_main, i);
  for (auto& t : threads) t.join();
  summary.all_done = coordinator.all_done();
  return summary;
}

// ---------------------------------------------------------------------------
// Finalize

namespace {

// Matches "<shard_id>.<epoch>.jsonl" and, with `failures`, the
// ".failures.jsonl" sibling.
bool is_part_of(const std::string& filename, const std::string& shard_id, bool failures) {
  const std::string prefix = shard_id + ".";
  const std::string suffix = failures ? ".failures.jsonl" : ".jsonl";
  if (filename.size() <= prefix.size() + suffix.size()) return false;
  if (filename.compare(0, prefix.size(), prefix) != 0) return false;
  if (filename.compare(filename.size() - suffix.size(), suffix.size(), suffix) != 0) return false;
  const std::string middle = filename.substr(prefix.size(), filename.size() - prefix.size() - suffix.size());
  return !middle.empty() && std::all_of(middle.begin(), middle.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::vector<fs::path> part_files(const fs::path& dir, const std::string& shard_id, bool failures) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_part_of(e.path().filename().string(), shard_id, failures)) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Later created_at wins; ties fall back to content so the choice does not
// depend on file order.
bool supersedes(const CaptionRecord& a, const CaptionRecord& b) {
  return std::tie(a.created_at, a.captioner_id, a.caption_text) > std::tie(b.created_at, b.captioner_id, b.caption_text);
}

}  // namespace

DatasetManifest finalize(const fs::path& job_dir) {
  SystemClock clock;
  auto coord = Coordinator::open(job_dir, clock);
  const JobPlan plan = coord->plan();
  if (!plan.pending_shards.empty()) {
    std::string list;
    for (const auto& id : plan.pending_shards) list += (list.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::state, "cannot finalize job '" + plan.job_id + "': pending shards: " + list);
  }

  const fs::path final_dir = job_dir / "final";
  fs::create_directories(final_dir);

  DatasetManifest manifest;
  manifest.dataset_id = plan.job_id;
  manifest.kind = ShardKind::captions;
  Timestamp latest{};
  std::string failures_content;

  std::vector<std::string> shard_ids(plan.completed_shards.begin(), plan.completed_shards.end());
  for (const auto& shard_id : shard_ids) {
    using Key = std::pair<std::string, std::string>;
    std::map<Key, CaptionRecord> best;
    for (const auto& part : part_files(coord->parts_dir(), shard_id, false)) {
      // A crashed worker can leave a torn final line; replay skips it.
      Journal::replay(part, [&](const Json& obj) {
        auto rec = CaptionRecord::from_json(obj, 0);
        Key key{rec.sample_id, rec.task_id};
        auto it = best.find(key);
        if (it == best.end()) {
          best.emplace(std::move(key), rec);
        } else if (supersedes(rec, it->second)) {
          it->second = rec;
        }
      });
    }
    std::map<std::string, FailureRecord> failed;
    for (const auto& part : part_files(coord->parts_dir(), shard_id, true)) {
      Journal::replay(part, [&](const Json& obj) {
        auto f = FailureRecord::from_json(obj);
        auto [it, inserted] = failed.emplace(f.sample_id, f);
        if (!inserted && f.attempts > it->second.attempts) it->second = f;
      });
    }

    // Emit in the source shard's sample order.
    std::vector<CaptionRecord> ordered;
    ShardReader source(coord->shard_path(shard_id));
    for (const auto& sample : source) {
      bool any = false;
      for (auto it = best.lower_bound(Key{sample.sample_id, std::string{}});
           it != best.end() && it->first.first == sample.sample_id; ++it) {
        latest = std::max(latest, it->second.created_at);
        ordered.push_back(it->second);
        any = true;
      }
      if (!any) {
        if (auto f = failed.find(sample.sample_id); f != failed.end()) {
          Json fj = f->second.to_json();
          fj["shard_id"] = shard_id;
          failures_content += fj.dump() + "\n";
        }
      }
    }
    auto shard_manifest = write_records(ordered, final_dir / (shard_id + std::string(kShardExtension)));
    shard_manifest.status = ShardStatus::done;
    manifest.total_samples += shard_manifest.sample_count;
    manifest.shards.push_back(std::move(shard_manifest));
  }
  manifest.created_at = latest;
  atomic_write_file(final_dir / "failures.jsonl", failures_content);
  save_manifest(manifest, final_dir);
  return manifest;
}

}  // namespace capcurate
