#include "capcurate/judge.hpp"

#include <httplib.h>

#include <atomic>
#include <cctype>
#include <cmath>
#include <future>
#include <regex>

#include "capcurate/http_endpoint.hpp"
#include "capcurate/rate_limiter.hpp"

namespace capcurate {

struct HttpJudgeClient::Impl {
  HttpEndpoint endpoint;
  httplib::Client client;

  Impl(const HttpEndpoint& ep, std::chrono::milliseconds timeout) : endpoint(ep), client(ep.host, ep.port) {
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
  }
};

HttpJudgeClient::HttpJudgeClient(std::string endpoint, std::string model_id, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>(HttpEndpoint::parse(endpoint), timeout)), model_id_(std::move(model_id)) {}

HttpJudgeClient::~HttpJudgeClient() = default;

std::string HttpJudgeClient::complete(const std::string& prompt) {
  Json body{{"model", model_id_},
            {"temperature", 0},
            {"messages", Json::array({Json{{"role", "user"}, {"content", prompt}}})}};
  auto res = impl_->client.Post(impl_->endpoint.path, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::transport, "judge endpoint: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::transport, "judge endpoint: HTTP " + std::to_string(res->status));
  }
  try {
    const auto obj = Json::parse(res->body);
    return obj.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::transport, std::string("judge endpoint returned a malformed completion: ") + e.what());
  }
}

MockJudge::MockJudge(std::string fixed_reply)
    : script_([reply = std::move(fixed_reply)](const std::string&, int) { return reply; }) {}

MockJudge::MockJudge(Script script) : script_(std::move(script)) {}

std::string MockJudge::complete(const std::string& prompt) {
  int n = 0;
  {
    std::lock_guard lock(mu_);
    n = ++calls_;
  }
  return script_(prompt, n);
}

int MockJudge::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::unique_ptr<JudgeClient> make_judge(const std::string& endpoint, const std::string& model_id) {
  if (endpoint.rfind("mock://", 0) == 0) {
    const auto q = endpoint.find("reply=");
    if (q == std::string::npos) return std::make_unique<MockJudge>(std::string("Score: 4/5"));
    // Percent-decode the reply so it can carry '/' and spaces.
    const std::string enc = endpoint.substr(q + 6);
    std::string reply;
    for (std::size_t i = 0; i < enc.size(); ++i) {
      if (enc[i] == '%' && i + 2 < enc.size() && std::isxdigit(static_cast<unsigned char>(enc[i + 1])) &&
          std::isxdigit(static_cast<unsigned char>(enc[i + 2]))) {
        reply += static_cast<char>(std::stoi(enc.substr(i + 1, 2), nullptr, 16));
        i += 2;
      } else {
        reply += enc[i] == '+' ? ' ' : enc[i];
      }
    }
    return std::make_unique<MockJudge>(reply);
  }
  return std::make_unique<HttpJudgeClient>(endpoint, model_id);
}

Json JudgeScore::to_json() const {
  return Json{{"raw", raw}, {"scale", scale}, {"rescaled", rescaled}, {"rationale_text", rationale_text},
              {"attempts", attempts}};
}

double rescale_score(double raw, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::invalid_argument, "score scale must be positive");
  if (!(raw >= 0.0 && raw <= scale)) {
    throw Error(ErrorCode::invalid_argument, "score outside its scale");
  }
  return raw / scale * 100.0;
}

std::optional<ParsedScore> parse_judge_score(const std::string& reply) {
  static const std::regex fraction(R"((\d+(?:\.\d+)?)\s*/\s*(\d+(?:\.\d+)?))");
  static const std::regex labelled(R"(score\s*[:=]?\s*(?:is\s*)?(\d+(?:\.\d+)?))", std::regex::icase);
  static const std::regex leading(R"(^\s*(\d+(?:\.\d+)?)(?![\d/]))");

  auto by_magnitude = [](double v) -> std::optional<ParsedScore> {
    if (v < 0.0 || v > 100.0) return std::nullopt;
    return ParsedScore{v, v <= 5.0 ? 5.0 : 100.0};
  };

  std::smatch m;
  if (std::regex_search(reply, m, fraction)) {
    const double x = std::stod(m[1]);
    const double n = std::stod(m[2]);
    if (n > 0.0 && x >= 0.0 && x <= n) return ParsedScore{x, n};
  }
  if (std::regex_search(reply, m, labelled)) return by_magnitude(std::stod(m[1]));
  if (std::regex_search(reply, m, leading)) return by_magnitude(std::stod(m[1]));
  return std::nullopt;
}

std::string render_judge_prompt(const std::string& candidate, std::span<const std::string> references,
                                const std::string& template_id) {
  if (template_id != kDefaultJudgeTemplate) {
    throw Error(ErrorCode::invalid_argument, "unknown judge template '" + template_id + "'");
  }
  std::string out =
      "You are evaluating an image caption. The reference captions below describe the same image.\n"
      "Judge the candidate on the precision and recall of visual elements:\n"
      "- precision: objects, attributes, counts, text and relations it states must appear in the references;\n"
      "- recall: visual elements present in the references should be covered by the candidate.\n"
      "Penalise hallucinated content more than omissions of minor details.\n\n";
  for (std::size_t i = 0; i < references.size(); ++i) {
    out += "Reference " + std::to_string(i + 1) + ": " + references[i] + "\n";
  }
  out += "\nCandidate: " + candidate + "\n\n";
  out += "Reply with one line \"Score: X/5\" (X from 0 to 5), then a short rationale.";
  return out;
}

namespace {

std::string join_replies(const std::vector<std::string>& replies) {
  std::string out = "judge reply was not parseable after " + std::to_string(replies.size()) + " attempts";
  if (!replies.empty()) out += "; last reply: " + replies.back();
  return out;
}

}  // namespace

UnparseableReply::UnparseableReply(std::vector<std::string> replies)
    : Error(ErrorCode::unparseable, join_replies(replies)), replies_(std::move(replies)) {}

JudgeScore judge_caption(const std::string& candidate, std::span<const std::string> references, JudgeClient& judge,
                         int attempts) {
  if (references.empty()) throw Error(ErrorCode::invalid_argument, "judge_caption needs at least one reference");
  if (attempts < 1) throw Error(ErrorCode::invalid_argument, "attempts must be >= 1");
  const std::string prompt = render_judge_prompt(candidate, references);
  std::vector<std::string> replies;
  for (int a = 1; a <= attempts; ++a) {
    std::string reply = judge.complete(prompt);
    if (auto parsed = parse_judge_score(reply)) {
      JudgeScore s;
      s.raw = parsed->raw;
      s.scale = parsed->scale;
      s.rescaled = rescale_score(parsed->raw, parsed->scale);
      s.rationale_text = std::move(reply);
      s.attempts = a;
      return s;
    }
    replies.push_back(std::move(reply));
  }
  throw UnparseableReply(std::move(replies));
}

Json JudgeItemResult::to_json() const {
  Json j{{"id", id}};
  if (score) {
    j["score"] = score->to_json();
  } else {
    j["error"] = error;
  }
  return j;
}

std::vector<JudgeItemResult> judge_batch(std::span<const JudgeItem> items,
                                         const std::function<std::unique_ptr<JudgeClient>()>& factory,
                                         const JudgeBatchOptions& options) {
  if (options.parallelism == 0) throw Error(ErrorCode::invalid_argument, "parallelism must be >= 1");
  if (!(options.rate_limit > 0.0)) throw Error(ErrorCode::invalid_argument, "rate limit must be positive");
  std::vector<JudgeItemResult> results(items.size());
  TokenBucket limiter(options.rate_limit, std::max(1.0, options.rate_limit));
  std::atomic<std::size_t> next{0};
  const std::size_t threads = std::min(options.parallelism, std::max<std::size_t>(1, items.size()));
  std::vector<std::future<void>> futs;
  for (std::size_t t = 0; t < threads; ++t) {
    futs.push_back(std::async(std::launch::async, [&] {
      auto client = factory();
      for (std::size_t i = next++; i < items.size(); i = next++) {
        auto& r = results[i];
        r.id = items[i].id;
        try {
          limiter.acquire();
          r.score = judge_caption(items[i].candidate, items[i].references, *client, options.attempts);
        } catch (const Error& e) {
          r.error = std::string(to_string(e.code())) + ": " + e.what();
        }
      }
    }));
  }
  for (auto& f : futs) f.get();
  return results;
}

}  // namespace capcurate
