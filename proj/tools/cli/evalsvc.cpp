#include <csignal>

#include "capcurate/eval_server.hpp"
#include "capcurate/eval_service.hpp"
#include "common.hpp"

namespace capcurate::cli {

namespace {

// Blocks SIGINT/SIGTERM before any server thread starts so that every thread
// inherits the mask, then waits for one of them.
sigset_t shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

}  // namespace

void add_evalsvc(CLI::App& app) {
  struct Args {
    std::string data = "evalsvc-data";
    std::string host = "127.0.0.1";
    int port = 8080;
    std::string images, public_url;
    std::string task, request, out;
  };
  auto args = std::make_shared<Args>();
  auto* cmd = app.add_subcommand("evalsvc", "Blinded pairwise rating service");
  cmd->require_subcommand(1);
  auto data_opt = [args](CLI::App* sub) {
    sub->add_option("--data", args->data, "Service state directory")->capture_default_str();
  };

  auto* serve = cmd->add_subcommand("serve", "Serve the rating API over HTTP");
  data_opt(serve);
  serve->add_option("--host", args->host)->capture_default_str();
  serve->add_option("--port", args->port)->capture_default_str();
  serve->add_option("--images", args->images, "Directory served under /images/");
  serve->add_option("--public-url", args->public_url, "Base URL for image links");
  serve->callback([args] {
    EvalService service(args->data);
    EvalServer::Options o;
    if (!args->images.empty()) o.image_root = args->images;
    o.public_base_url = args->public_url;
    EvalServer server(service, o);
    auto signals = shutdown_signals();
    const int port = server.start(args->host, args->port);
    log() << "evalsvc listening on http://" << args->host << ":" << port << " (data " << args->data << ")\n";
    int sig = 0;
    sigwait(&signals, &sig);
    log() << "shutting down\n";
    server.stop();
  });

  auto* create = cmd->add_subcommand("create", "Create a task from a request JSON file");
  data_opt(create);
  create->add_option("--request", args->request, "JSON with pairs, raters, gold_fraction, seed")->required();
  create->callback([args] {
    EvalService service(args->data);
    const auto id = service.create_task(CreateTaskRequest::from_json(Json::parse(read_file(args->request))));
    emit(Json{{"task_id", id}, {"gold_count", service.task(id).gold.size()}}, "");
  });

  auto* report = cmd->add_subcommand("report", "GSB and gold report for a task");
  data_opt(report);
  report->add_option("--task", args->task)->required();
  report->add_option("--out", args->out);
  report->callback([args] {
    EvalService service(args->data);
    emit(service.report(args->task).to_json(), args->out);
  });
}

}  // namespace capcurate::cli
