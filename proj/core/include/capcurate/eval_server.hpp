#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "capcurate/error.hpp"
#include "capcurate/eval_service.hpp"

namespace capcurate {

// JSON over HTTP for the rating console:
//   POST /tasks                      CreateTaskRequest -> {"task_id","gold_count"}
//   GET  /tasks/{id}/next?rater=R    PresentedPair | {"done":true}
//   POST /tasks/{id}/judgments       Submission -> {"accepted","submission_id","duplicate"}
//   GET  /tasks/{id}/report          TaskReport
//   GET  /images/{ref}               file under image_root, when configured
// Errors are {"error": message} with 400, 404 or 409.
class EvalServer {
 public:
  struct Options {
    // Directory served under /images/. Relative image refs become URLs
    // under it; refs that already are http(s) URLs pass through.
    std::optional<std::filesystem::path> image_root;
    // Base used to build image URLs; defaults to this server's own address.
    std::string public_base_url;
  };

  explicit EvalServer(EvalService& service);
  EvalServer(EvalService& service, Options options);
  ~EvalServer();
  EvalServer(const EvalServer&) = delete;
  EvalServer& operator=(const EvalServer&) = delete;

  // Binds (port 0 picks a free one), serves on a background thread and
  // returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void serve_forever(const std::string& host, int port);
  void stop();

  std::string image_url(const std::string& image_ref) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

int http_status_for(ErrorCode code) noexcept;

}  // namespace capcurate
