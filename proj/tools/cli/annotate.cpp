#include "capcurate/annotate.hpp"

#include "capcurate/error.hpp"
#include "common.hpp"

namespace capcurate::cli {

namespace {

struct AnnotateArgs {
  std::string job;
  std::string jobs_root = "jobs";
  std::string dataset;
  std::string mode = "caption";
  std::string prompt = std::string(kDefaultPromptTemplate);
  int max_retries = 2;
  double rate_limit = 10.0;
  std::size_t flush_interval = kDefaultFlushInterval;
  std::size_t workers = 1;
  std::string endpoint;
  std::string model = "captioner";
  int lease_seconds = 300;
  int timeout_seconds = 60;
};

std::filesystem::path job_dir(const AnnotateArgs& a) { return std::filesystem::path(a.jobs_root) / a.job; }

Json summary_json(const RunSummary& s, const Coordinator& c) {
  return Json{{"job_id", c.job_id()},
              {"shards_completed", s.shards_completed},
              {"records", s.records},
              {"failures", s.failures},
              {"leases_lost", s.leases_lost},
              {"errors", s.errors},
              {"all_done", s.all_done},
              {"pending_shards", c.plan().pending_shards}};
}

void run_job(const AnnotateArgs& a, bool resuming) {
  if (a.endpoint.empty()) throw Error(ErrorCode::invalid_argument, "--endpoint is required");
  SystemClock clock;
  auto coord = Coordinator::open(job_dir(a), clock);
  if (!resuming && coord->has_progress()) {
    throw Error(ErrorCode::state, "job '" + a.job + "' already has progress; use 'annotate resume'");
  }
  if (resuming) {
    for (const auto& shard : coord->plan().pending_shards) {
      log() << "resume " << shard << " at offset " << coord->checkpoint_offset(shard) << "\n";
    }
  }
  RunOptions opts;
  opts.workers = a.workers;
  opts.lease_duration = std::chrono::seconds(a.lease_seconds);
  const auto endpoint = a.endpoint;
  const auto model = a.model;
  const auto timeout = std::chrono::seconds(a.timeout_seconds);
  const auto summary =
      run_workers(*coord, [&] { return make_captioner(endpoint, model, timeout); }, opts, clock);
  emit(summary_json(summary, *coord), "");
  if (!summary.all_done) throw Error(ErrorCode::state, "job '" + a.job + "' stopped with shards pending");
}

}  // namespace

void add_annotate(CLI::App& app) {
  auto args = std::make_shared<AnnotateArgs>();
  auto* cmd = app.add_subcommand("annotate", "Caption or recaption a sharded dataset");
  cmd->require_subcommand(1);
  auto common = [args](CLI::App* sub) {
    sub->add_option("--job", args->job, "Job id")->required();
    sub->add_option("--jobs-root", args->jobs_root, "Directory holding job directories")->capture_default_str();
  };
  auto worker_opts = [args](CLI::App* sub) {
    sub->add_option("--workers", args->workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--endpoint", args->endpoint, "Captioner URL, or mock://?latency_ms=N");
    sub->add_option("--model", args->model, "model_id sent to the captioner")->capture_default_str();
    sub->add_option("--lease-seconds", args->lease_seconds, "Shard lease duration")->capture_default_str();
    sub->add_option("--timeout-seconds", args->timeout_seconds, "Per-request timeout")->capture_default_str();
  };

  auto* plan = cmd->add_subcommand("plan", "Create a job over a dataset");
  common(plan);
  plan->add_option("--dataset", args->dataset, "Dataset directory or manifest.json")->required();
  plan->add_option("--mode", args->mode, "caption | recaption")
      ->capture_default_str()
      ->check(CLI::IsMember({"caption", "recaption"}));
  plan->add_option("--prompt-template", args->prompt, "Prompt template id")->capture_default_str();
  plan->add_option("--max-retries", args->max_retries)->capture_default_str();
  plan->add_option("--rate-limit", args->rate_limit, "Requests per second per worker")->capture_default_str();
  plan->add_option("--flush-interval", args->flush_interval, "Samples between checkpoints")->capture_default_str();
  plan->callback([args] {
    TaskSpec task;
    task.task_id = args->job;
    task.mode = parse_caption_mode(args->mode);
    task.prompt_template_id = args->prompt;
    task.max_retries = args->max_retries;
    task.rate_limit = args->rate_limit;
    task.flush_interval = args->flush_interval;
    const auto manifest = load_manifest(args->dataset);
    SystemClock clock;
    auto coord = Coordinator::create(job_dir(*args), plan_jobs(manifest, task), dataset_root_of(args->dataset), clock);
    emit(coord->plan().to_json(), "");
  });

  auto* run = cmd->add_subcommand("run", "Run workers until every shard is done");
  common(run);
  worker_opts(run);
  run->callback([args] { run_job(*args, false); });

  auto* resume = cmd->add_subcommand("resume", "Continue a job from its checkpoints");
  common(resume);
  worker_opts(resume);
  resume->callback([args] { run_job(*args, true); });

  auto* fin = cmd->add_subcommand("finalize", "Dedupe parts into final shards and a manifest");
  common(fin);
  fin->callback([args] {
    const auto manifest = finalize(job_dir(*args));
    emit(manifest.to_json(), "");
  });
}

}  // namespace capcurate::cli
