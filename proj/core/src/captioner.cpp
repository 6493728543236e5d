#include "capcurate/captioner.hpp"

#include <httplib.h>

#include <atomic>
#include <thread>

#include "capcurate/error.hpp"
#include "capcurate/http_endpoint.hpp"

namespace capcurate {

Json make_caption_request(const std::string& prompt, const std::string& image_ref, const std::string& model_id) {
  return Json{{"prompt", prompt}, {"image_ref", image_ref}, {"model_id", model_id}};
}

CaptionOutcome parse_caption_response(const std::string& body) {
  Json obj;
  try {
    obj = Json::parse(body);
  } catch (const Json::parse_error&) {
    return CaptionFailure{CaptionFailureKind::rejected, "response is not JSON"};
  }
  if (!obj.is_object() || !obj.contains("caption") || !obj["caption"].is_string()) {
    return CaptionFailure{CaptionFailureKind::rejected, "response has no string 'caption'"};
  }
  auto caption = obj["caption"].get<std::string>();
  if (caption.find_first_not_of(" \t\r\n") == std::string::npos) {
    return CaptionFailure{CaptionFailureKind::rejected, "empty caption"};
  }
  return caption;
}

struct HttpCaptionerClient::Impl {
  HttpEndpoint endpoint;
  httplib::Client client;

  Impl(const HttpEndpoint& ep, std::chrono::milliseconds timeout)
      : endpoint(ep), client(ep.host, ep.port) {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_keep_alive(true);
  }
};

HttpCaptionerClient::HttpCaptionerClient(std::string endpoint, std::string model_id,
                                         std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>(HttpEndpoint::parse(endpoint), timeout)), model_id_(std::move(model_id)) {}

HttpCaptionerClient::~HttpCaptionerClient() = default;

CaptionOutcome HttpCaptionerClient::generate(const std::string& prompt, const std::string& image_ref) {
  const std::string body = make_caption_request(prompt, image_ref, model_id_).dump();
  auto res = impl_->client.Post(impl_->endpoint.path, body, "application/json");
  if (!res) {
    return CaptionFailure{CaptionFailureKind::unreachable, "transport error: " + httplib::to_string(res.error())};
  }
  if (res->status >= 500 || res->status == 429) {
    return CaptionFailure{CaptionFailureKind::unreachable, "HTTP " + std::to_string(res->status)};
  }
  if (res->status != 200) {
    return CaptionFailure{CaptionFailureKind::rejected, "HTTP " + std::to_string(res->status) + ": " + res->body};
  }
  return parse_caption_response(res->body);
}

std::string MockCaptioner::caption_for(const std::string& image_ref) {
  return "A detailed photograph of " + image_ref + " showing the main subject in clear light.";
}

CaptionOutcome MockCaptioner::generate(const std::string& prompt, const std::string& image_ref) {
  int attempt = 0;
  {
    std::lock_guard lock(mu_);
    attempt = ++attempts_[image_ref];
    ++calls_;
    last_prompt_ = prompt;
  }
  if (options_.latency.count() > 0) std::this_thread::sleep_for(options_.latency);
  if (options_.script) {
    if (auto failure = options_.script(image_ref, attempt)) return *failure;
  }
  return caption_for(image_ref);
}

int MockCaptioner::attempts_for(const std::string& image_ref) const {
  std::lock_guard lock(mu_);
  auto it = attempts_.find(image_ref);
  return it == attempts_.end() ? 0 : it->second;
}

std::uint64_t MockCaptioner::total_calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string MockCaptioner::last_prompt() const {
  std::lock_guard lock(mu_);
  return last_prompt_;
}

std::unique_ptr<CaptionerClient> make_captioner(const std::string& endpoint, const std::string& model_id,
                                                std::chrono::milliseconds timeout) {
  constexpr std::string_view kMock = "mock://";
  if (endpoint.rfind(kMock, 0) == 0) {
    MockCaptioner::Options opts;
    opts.model_id = model_id;
    const auto q = endpoint.find("latency_ms=");
    if (q != std::string::npos) {
      opts.latency = std::chrono::milliseconds(std::stoll(endpoint.substr(q + 11)));
    }
    return std::make_unique<MockCaptioner>(std::move(opts));
  }
  return std::make_unique<HttpCaptionerClient>(endpoint, model_id, timeout);
}

struct MockCaptionServer::Impl {
  Options options;
  httplib::Server server;
  std::thread thread;
  std::atomic<std::uint64_t> requests{0};
  std::atomic<int> failures_left{0};

  explicit Impl(Options o) : options(std::move(o)), failures_left(options.fail_first) {
    server.Post(options.caption_path, [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      if (options.latency.count() > 0) std::this_thread::sleep_for(options.latency);
      if (failures_left.fetch_sub(1) > 0) {
        res.status = 503;
        res.set_content(R"({"error":"warming up"})", "application/json");
        return;
      }
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const Json::parse_error&) {
        res.status = 400;
        res.set_content(R"({"error":"body is not JSON"})", "application/json");
        return;
      }
      if (!body.contains("image_ref") || !body["image_ref"].is_string() || !body.contains("prompt")) {
        res.status = 400;
        res.set_content(R"({"error":"prompt and image_ref are required"})", "application/json");
        return;
      }
      res.set_content(Json{{"caption", MockCaptioner::caption_for(body["image_ref"].get<std::string>())}}.dump(),
                      "application/json");
    });
    server.Post(options.chat_path, [this](const httplib::Request&, httplib::Response& res) {
      ++requests;
      Json reply{{"choices", Json::array({Json{{"index", 0},
                                               {"message", Json{{"role", "assistant"},
                                                                {"content", options.judge_reply}}}}})}};
      res.set_content(reply.dump(), "application/json");
    });
  }
};

MockCaptionServer::MockCaptionServer() : MockCaptionServer(Options{}) {}
MockCaptionServer::MockCaptionServer(Options options) : impl_(std::make_unique<Impl>(std::move(options))) {}

MockCaptionServer::~MockCaptionServer() { stop(); }

int MockCaptionServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void MockCaptionServer::serve_forever(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void MockCaptionServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::uint64_t MockCaptionServer::requests() const { return impl_->requests.load(); }

}  // namespace capcurate
