#include "capcurate/eval_server.hpp"

#include <httplib.h>

#include <thread>

#include "capcurate/error.hpp"

namespace capcurate {

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::parse:
    case ErrorCode::unparseable:
      return 400;
    case ErrorCode::not_found:
      return 404;
    case ErrorCode::conflict:
    case ErrorCode::state:
      return 409;
    default:
      return 500;
  }
}

namespace {

std::string percent_encode_path(const std::string& s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == '/') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 15]);
    }
  }
  return out;
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, Json{{"error", message}});
}

Json parse_body(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::invalid_argument, std::string("request body is not JSON: ") + e.what());
  }
}

}  // namespace

struct EvalServer::Impl {
  EvalService& service;
  Options options;
  httplib::Server server;
  std::thread thread;
  std::string self_base;

  Impl(EvalService& s, Options o) : service(s), options(std::move(o)) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    auto guarded = [](auto fn) {
      return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
          fn(req, res);
        } catch (const Error& e) {
          send_error(res, http_status_for(e.code()), e.what());
        } catch (const std::exception& e) {
          send_error(res, 500, e.what());
        }
      };
    };

    server.Post("/tasks", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto request = CreateTaskRequest::from_json(parse_body(req));
                  const auto id = service.create_task(request);
                  send_json(res, 201, Json{{"task_id", id}, {"gold_count", service.task(id).gold.size()}});
                }));

    server.Get(R"(/tasks/([^/]+)/next)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const std::string task_id = req.matches[1];
                 const std::string rater = req.get_param_value("rater");
                 if (rater.empty()) throw Error(ErrorCode::invalid_argument, "query parameter 'rater' is required");
                 auto item = service.next_item(task_id, rater);
                 if (!item) {
                   send_json(res, 200, Json{{"task_id", task_id}, {"done", true}});
                   return;
                 }
                 Json body = item->to_public_json();
                 body["image_ref"] = url_for(item->image_ref);
                 send_json(res, 200, body);
               }));

    server.Post(R"(/tasks/([^/]+)/judgments)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const std::string task_id = req.matches[1];
                  const auto ack = service.submit(task_id, Submission::from_json(parse_body(req)));
                  send_json(res, 200, ack.to_json());
                }));

    server.Get(R"(/tasks/([^/]+)/report)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, service.report(req.matches[1]).to_json());
               }));

    if (options.image_root) server.set_mount_point("/images", options.image_root->string());
  }

  std::string url_for(const std::string& ref) const {
    if (ref.rfind("http://", 0) == 0 || ref.rfind("https://", 0) == 0) return ref;
    std::string base = options.public_base_url.empty() ? self_base : options.public_base_url;
    while (!base.empty() && base.back() == '/') base.pop_back();
    std::string path = ref;
    while (!path.empty() && path.front() == '/') path.erase(path.begin());
    return base + "/images/" + percent_encode_path(path);
  }
};

EvalServer::EvalServer(EvalService& service) : EvalServer(service, Options{}) {}
EvalServer::EvalServer(EvalService& service, Options options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

EvalServer::~EvalServer() { stop(); }

int EvalServer::start(const std::string& host, int port) {
  const int bound =
      port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  impl_->self_base = "http://" + host + ":" + std::to_string(bound);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void EvalServer::serve_forever(const std::string& host, int port) {
  impl_->self_base = "http://" + host + ":" + std::to_string(port);
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void EvalServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string EvalServer::image_url(const std::string& image_ref) const { return impl_->url_for(image_ref); }

}  // namespace capcurate
