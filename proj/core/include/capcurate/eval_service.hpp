#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "capcurate/journal.hpp"
#include "capcurate/jsonl.hpp"
#include "capcurate/quality.hpp"

namespace capcurate {

// One comparison. Canonical candidate A is the left-source caption and B the
// right-source caption; raters never see the sources or this orientation.
struct EvalPair {
  std::string pair_id;
  std::string image_ref;
  std::string caption_left;
  std::string caption_right;
  std::string caption_left_source;
  std::string caption_right_source;
  std::optional<Verdict> expected_verdict;  // needed for a pair to be gold

  Json to_json() const;
  static EvalPair from_json(const Json& obj);
};

struct EvalTask {
  std::string task_id;
  std::vector<EvalPair> pairs;
  std::map<std::string, Verdict> gold;
  double gold_fraction = 0.10;
  std::uint64_t seed = 0;
  std::vector<std::string> raters;

  Json to_json() const;
  static EvalTask from_json(const Json& obj);
};

struct CreateTaskRequest {
  std::optional<std::string> task_id;
  std::vector<EvalPair> pairs;
  double gold_fraction = 0.10;
  std::uint64_t seed = 0;
  std::vector<std::string> raters;

  static CreateTaskRequest from_json(const Json& obj);
};

// What a rater sees. presented_order stays on the server.
struct PresentedPair {
  std::string task_id;
  std::string pair_id;
  std::string image_ref;
  std::string caption_A;  // shown on the left
  std::string caption_B;  // shown on the right
  PresentedOrder presented_order = PresentedOrder::AB;

  // Client payload; omits presented_order.
  Json to_public_json() const;
};

struct Submission {
  std::string rater_id;
  std::string pair_id;
  int score_left = 0;
  int score_right = 0;
  RaterVerdict verdict = RaterVerdict::same;
  std::string submission_id;  // retry token

  static Submission from_json(const Json& obj);
};

struct SubmitAck {
  std::string submission_id;
  bool duplicate = false;

  Json to_json() const;
};

struct RaterReport {
  std::string rater_id;
  std::uint64_t judgments = 0;
  GsbReport gsb;
  std::optional<GoldResult> gold;
  bool flagged = false;
};

struct TaskReport {
  std::string task_id;
  GsbReport gsb;
  std::optional<GoldResult> gold;
  std::vector<RaterReport> raters;

  Json to_json() const;
};

// Gold pairs are the pairs with an expected verdict; round(fraction * n) of
// them are chosen by the smallest keyed hash of pair_id.
std::vector<std::string> choose_gold(const std::vector<EvalPair>& pairs, double gold_fraction, std::uint64_t seed);

// Deterministic per (seed, rater, pair): the same rater always sees a pair
// in the same order.
PresentedOrder presentation_order(std::uint64_t seed, const std::string& rater_id, const std::string& pair_id);

// Blinded GSB collection. State lives in an append-only journal under the
// data directory and is rebuilt from it on construction.
class EvalService {
 public:
  explicit EvalService(std::filesystem::path data_dir);
  ~EvalService();
  EvalService(const EvalService&) = delete;
  EvalService& operator=(const EvalService&) = delete;

  std::string create_task(const CreateTaskRequest& request);
  EvalTask task(const std::string& task_id) const;
  std::vector<std::string> task_ids() const;

  // nullopt when the rater has judged every pair.
  std::optional<PresentedPair> next_item(const std::string& task_id, const std::string& rater_id);
  SubmitAck submit(const std::string& task_id, const Submission& submission);
  TaskReport report(const std::string& task_id) const;

  std::vector<GsbJudgment> judgments(const std::string& task_id) const;

  const std::filesystem::path& data_dir() const noexcept { return data_dir_; }

 private:
  struct RaterState {
    std::optional<std::string> presented;  // pair awaiting a verdict
    std::set<std::string> judged;
  };
  struct TaskState {
    EvalTask task;
    std::map<std::string, const EvalPair*> by_id;
    std::map<std::string, RaterState> raters;
    std::vector<GsbJudgment> judgments;
    std::map<std::string, std::size_t> by_token;  // submission_id -> judgment index
    std::vector<std::string> submission_rater;    // parallel to judgments
  };

  void apply(const Json& event);
  TaskState& state_of(const std::string& task_id);
  const TaskState& state_of(const std::string& task_id) const;
  static RaterState& rater_of(TaskState& t, const std::string& rater_id);
  std::vector<std::string> order_for(const TaskState& t, const std::string& rater_id) const;

  std::filesystem::path data_dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::unique_ptr<TaskState>> tasks_;
  std::unique_ptr<Journal> journal_;
};

}  // namespace capcurate
