#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>

#include "capcurate/jsonl.hpp"

namespace capcurate {

enum class CaptionFailureKind {
  rejected,     // endpoint answered but produced no usable caption
  unreachable,  // transport failure: refused, timed out, 5xx
};

struct CaptionFailure {
  CaptionFailureKind kind = CaptionFailureKind::rejected;
  std::string message;
};

// Either a non-empty caption or a typed failure.
using CaptionOutcome = std::variant<std::string, CaptionFailure>;

class CaptionerClient {
 public:
  virtual ~CaptionerClient() = default;
  virtual CaptionOutcome generate(const std::string& prompt, const std::string& image_ref) = 0;
  virtual std::string model_id() const = 0;
};

// Wire format: POST <endpoint> {"prompt","image_ref","model_id"} -> {"caption"}.
Json make_caption_request(const std::string& prompt, const std::string& image_ref, const std::string& model_id);
// Returns the caption or a `rejected` failure for a malformed/empty body.
CaptionOutcome parse_caption_response(const std::string& body);

class HttpCaptionerClient final : public CaptionerClient {
 public:
  HttpCaptionerClient(std::string endpoint, std::string model_id,
                      std::chrono::milliseconds timeout = std::chrono::seconds(60));
  ~HttpCaptionerClient() override;

  CaptionOutcome generate(const std::string& prompt, const std::string& image_ref) override;
  std::string model_id() const override { return model_id_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string model_id_;
};

// In-process captioner for tests and dry runs. Captions are a deterministic
// function of the image reference. A script can fail chosen attempts.
class MockCaptioner final : public CaptionerClient {
 public:
  struct Options {
    std::string model_id = "mock-captioner";
    std::chrono::milliseconds latency{0};
    // Called with (image_ref, 1-based attempt number for that image).
    std::function<std::optional<CaptionFailure>(const std::string&, int)> script;
  };

  MockCaptioner() = default;
  explicit MockCaptioner(Options options) : options_(std::move(options)) {}

  CaptionOutcome generate(const std::string& prompt, const std::string& image_ref) override;
  std::string model_id() const override { return options_.model_id; }

  int attempts_for(const std::string& image_ref) const;
  std::uint64_t total_calls() const;
  std::string last_prompt() const;

  static std::string caption_for(const std::string& image_ref);

 private:
  Options options_;
  mutable std::mutex mu_;
  std::map<std::string, int> attempts_;
  std::uint64_t calls_ = 0;
  std::string last_prompt_;
};

// Builds a client from an endpoint URI. "mock://" yields a MockCaptioner;
// the query "?latency_ms=N" sets its latency. Anything else is HTTP.
std::unique_ptr<CaptionerClient> make_captioner(const std::string& endpoint, const std::string& model_id,
                                                std::chrono::milliseconds timeout = std::chrono::seconds(60));

// Local HTTP server speaking the captioner wire format and a minimal
// chat-completion endpoint for judge testing.
class MockCaptionServer {
 public:
  struct Options {
    std::string caption_path = "/caption";
    std::string chat_path = "/v1/chat/completions";
    std::chrono::milliseconds latency{0};
    std::string judge_reply = "Score: 4/5. The caption covers most visual elements.";
    // Number of initial caption requests answered with HTTP 503.
    int fail_first = 0;
  };

  MockCaptionServer();
  explicit MockCaptionServer(Options options);
  ~MockCaptionServer();
  MockCaptionServer(const MockCaptionServer&) = delete;
  MockCaptionServer& operator=(const MockCaptionServer&) = delete;

  // Binds (port 0 picks a free port), starts a background thread, and
  // returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving in the calling thread.
  void serve_forever(const std::string& host, int port);
  void stop();
  std::uint64_t requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace capcurate
