#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capcurate/error.hpp"
#include "capcurate/jsonl.hpp"

namespace capcurate {

// Judge-model caption scoring. A JudgeClient turns a prompt into a reply
// string and throws Error(transport) when the endpoint cannot be used.
class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string model_id() const = 0;
};

// OpenAI-style chat completion: POST {"model","messages":[{"role":"user",...}]}
// and read choices[0].message.content.
class HttpJudgeClient final : public JudgeClient {
 public:
  HttpJudgeClient(std::string endpoint, std::string model_id,
                  std::chrono::milliseconds timeout = std::chrono::seconds(120));
  ~HttpJudgeClient() override;

  std::string complete(const std::string& prompt) override;
  std::string model_id() const override { return model_id_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string model_id_;
};

class MockJudge final : public JudgeClient {
 public:
  // Called with (prompt, 1-based call number).
  using Script = std::function<std::string(const std::string&, int)>;

  explicit MockJudge(std::string fixed_reply);
  explicit MockJudge(Script script);

  std::string complete(const std::string& prompt) override;
  std::string model_id() const override { return "mock-judge"; }
  int calls() const;

 private:
  Script script_;
  mutable std::mutex mu_;
  int calls_ = 0;
};

// "mock://?reply=..." yields a MockJudge with a fixed reply; anything else
// is an HTTP chat endpoint.
std::unique_ptr<JudgeClient> make_judge(const std::string& endpoint, const std::string& model_id);

struct JudgeScore {
  double raw = 0.0;
  double scale = 5.0;  // detected full-scale value of `raw`
  double rescaled = 0.0;  // in [0, 100]
  std::string rationale_text;
  int attempts = 1;

  Json to_json() const;
};

struct ParsedScore {
  double raw = 0.0;
  double scale = 5.0;
};

// Accepts "score: X/N", "X/N", a labelled "score: X" and a reply that starts
// with a number. A value without a denominator is on the 0-5 scale when
// <= 5, else on 0-100. Anything else is nullopt.
std::optional<ParsedScore> parse_judge_score(const std::string& reply);
double rescale_score(double raw, double scale);

inline constexpr const char* kDefaultJudgeTemplate = "precision-recall-v1";
std::string render_judge_prompt(const std::string& candidate, std::span<const std::string> references,
                                const std::string& template_id = kDefaultJudgeTemplate);

// The judge's replies were never parseable. replies() holds every raw reply.
class UnparseableReply : public Error {
 public:
  explicit UnparseableReply(std::vector<std::string> replies);
  const std::vector<std::string>& replies() const noexcept { return replies_; }

 private:
  std::vector<std::string> replies_;
};

inline constexpr int kJudgeAttempts = 3;

JudgeScore judge_caption(const std::string& candidate, std::span<const std::string> references, JudgeClient& judge,
                         int attempts = kJudgeAttempts);

struct JudgeItem {
  std::string id;
  std::string candidate;
  std::vector<std::string> references;
};

struct JudgeItemResult {
  std::string id;
  std::optional<JudgeScore> score;
  std::string error;  // set when score is empty

  Json to_json() const;
};

struct JudgeBatchOptions {
  std::size_t parallelism = 4;
  double rate_limit = 10.0;  // requests per second across the batch
  int attempts = kJudgeAttempts;
};

// Bounded-parallel scoring. Each worker thread gets its own client from the
// factory; results keep input order. Per-item failures are reported, not
// thrown.
std::vector<JudgeItemResult> judge_batch(std::span<const JudgeItem> items,
                                         const std::function<std::unique_ptr<JudgeClient>()>& factory,
                                         const JudgeBatchOptions& options = {});

}  // namespace capcurate
