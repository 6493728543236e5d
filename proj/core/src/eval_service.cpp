#include "capcurate/eval_service.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "capcurate/checksum.hpp"
#include "capcurate/error.hpp"

namespace capcurate {

namespace fs = std::filesystem;

namespace {

std::string get_string(const Json& obj, const char* name, bool required = true) {
  auto it = obj.find(std::string(name));
  if (it == obj.end() || it->is_null()) {
    if (required) throw Error(ErrorCode::invalid_argument, std::string("missing field '") + name + "'");
    return {};
  }
  if (!it->is_string()) throw Error(ErrorCode::invalid_argument, std::string("field '") + name + "' must be a string");
  return it->get<std::string>();
}

int get_score(const Json& obj, const char* name) {
  auto it = obj.find(std::string(name));
  if (it == obj.end() || !it->is_number_integer()) {
    throw Error(ErrorCode::invalid_argument, std::string("field '") + name + "' must be an integer 1..5");
  }
  const auto v = it->get<std::int64_t>();
  if (v < 1 || v > 5) {
    throw Error(ErrorCode::invalid_argument, std::string("field '") + name + "' must lie in 1..5, got " +
                                                 std::to_string(v));
  }
  return static_cast<int>(v);
}

}  // namespace

Json EvalPair::to_json() const {
  Json j{{"pair_id", pair_id},
         {"image_ref", image_ref},
         {"caption_left", caption_left},
         {"caption_right", caption_right},
         {"caption_left_source", caption_left_source},
         {"caption_right_source", caption_right_source}};
  j["expected_verdict"] = expected_verdict ? Json(std::string(to_string(*expected_verdict))) : Json(nullptr);
  return j;
}

EvalPair EvalPair::from_json(const Json& obj) {
  if (!obj.is_object()) throw Error(ErrorCode::invalid_argument, "pair must be an object");
  EvalPair p;
  p.pair_id = get_string(obj, "pair_id");
  p.image_ref = get_string(obj, "image_ref");
  p.caption_left = get_string(obj, "caption_left");
  p.caption_right = get_string(obj, "caption_right");
  p.caption_left_source = get_string(obj, "caption_left_source");
  p.caption_right_source = get_string(obj, "caption_right_source");
  const auto ev = get_string(obj, "expected_verdict", false);
  if (!ev.empty()) p.expected_verdict = parse_verdict(ev);
  if (p.pair_id.empty()) throw Error(ErrorCode::invalid_argument, "pair_id must be non-empty");
  return p;
}

Json EvalTask::to_json() const {
  Json ps = Json::array();
  for (const auto& p : pairs) ps.push_back(p.to_json());
  Json g = Json::object();
  for (const auto& [id, v] : gold) g[id] = std::string(to_string(v));
  return Json{{"task_id", task_id}, {"pairs", ps},   {"gold", g},
              {"gold_fraction", gold_fraction}, {"seed", seed}, {"raters", raters}};
}

EvalTask EvalTask::from_json(const Json& obj) {
  EvalTask t;
  t.task_id = obj.at("task_id").get<std::string>();
  for (const auto& p : obj.at("pairs")) t.pairs.push_back(EvalPair::from_json(p));
  for (const auto& [id, v] : obj.at("gold").items()) t.gold[id] = parse_verdict(v.get<std::string>());
  t.gold_fraction = obj.at("gold_fraction").get<double>();
  t.seed = obj.at("seed").get<std::uint64_t>();
  t.raters = obj.at("raters").get<std::vector<std::string>>();
  return t;
}

CreateTaskRequest CreateTaskRequest::from_json(const Json& obj) {
  if (!obj.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
  CreateTaskRequest r;
  const auto id = get_string(obj, "task_id", false);
  if (!id.empty()) r.task_id = id;
  auto pairs = obj.find(std::string("pairs"));
  if (pairs == obj.end() || !pairs->is_array()) throw Error(ErrorCode::invalid_argument, "missing 'pairs' array");
  for (const auto& p : *pairs) r.pairs.push_back(EvalPair::from_json(p));
  try {
    if (obj.contains("gold_fraction")) r.gold_fraction = obj.at("gold_fraction").get<double>();
    if (obj.contains("seed")) r.seed = obj.at("seed").get<std::uint64_t>();
    if (obj.contains("raters")) r.raters = obj.at("raters").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("bad task request: ") + e.what());
  }
  return r;
}

Json PresentedPair::to_public_json() const {
  return Json{{"task_id", task_id}, {"pair_id", pair_id}, {"image_ref", image_ref},
              {"caption_A", caption_A}, {"caption_B", caption_B}, {"done", false}};
}

Submission Submission::from_json(const Json& obj) {
  if (!obj.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
  Submission s;
  s.rater_id = get_string(obj, "rater_id");
  s.pair_id = get_string(obj, "pair_id");
  s.score_left = get_score(obj, "score_left");
  s.score_right = get_score(obj, "score_right");
  s.verdict = parse_rater_verdict(get_string(obj, "verdict"));
  s.submission_id = get_string(obj, "submission_id", false);
  return s;
}

Json SubmitAck::to_json() const {
  return Json{{"accepted", true}, {"submission_id", submission_id}, {"duplicate", duplicate}};
}

Json TaskReport::to_json() const {
  Json rs = Json::array();
  for (const auto& r : raters) {
    rs.push_back(Json{{"rater_id", r.rater_id},
                      {"judgments", r.judgments},
                      {"gsb", r.gsb.to_json()},
                      {"gold", r.gold ? r.gold->to_json() : Json(nullptr)},
                      {"flagged", r.flagged}});
  }
  return Json{{"task_id", task_id},
              {"gsb", gsb.to_json()},
              {"gold", gold ? gold->to_json() : Json(nullptr)},
              {"gold_threshold", kGoldThreshold},
              {"raters", rs}};
}

std::vector<std::string> choose_gold(const std::vector<EvalPair>& pairs, double gold_fraction, std::uint64_t seed) {
  if (!(gold_fraction >= 0.0 && gold_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "gold_fraction must lie in [0, 1]");
  }
  const auto want = static_cast<std::size_t>(std::llround(gold_fraction * static_cast<double>(pairs.size())));
  std::vector<std::pair<std::uint64_t, std::string>> eligible;
  for (const auto& p : pairs) {
    if (p.expected_verdict) eligible.emplace_back(stable_hash64(p.pair_id, seed), p.pair_id);
  }
  if (eligible.size() < want) {
    throw Error(ErrorCode::invalid_argument, "gold_fraction needs " + std::to_string(want) +
                                                 " pairs with expected_verdict, only " +
                                                 std::to_string(eligible.size()) + " have one");
  }
  std::sort(eligible.begin(), eligible.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < want; ++i) out.push_back(eligible[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

PresentedOrder presentation_order(std::uint64_t seed, const std::string& rater_id, const std::string& pair_id) {
  const std::uint64_t h = splitmix64(seed ^ stable_hash64(rater_id, 0x5241544552ULL) ^ stable_hash64(pair_id, 0x50414952ULL));
  return (h & 1U) == 0 ? PresentedOrder::AB : PresentedOrder::BA;
}

// ---------------------------------------------------------------------------

EvalService::EvalService(fs::path data_dir) : data_dir_(std::move(data_dir)) {
  fs::create_directories(data_dir_);
  const auto path = data_dir_ / "journal.jsonl";
  if (fs::exists(path)) Journal::replay(path, [this](const Json& e) { apply(e); });
  journal_ = std::make_unique<Journal>(path);
}

EvalService::~EvalService() = default;

EvalService::TaskState& EvalService::state_of(const std::string& task_id) {
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw Error(ErrorCode::not_found, "unknown task '" + task_id + "'");
  return *it->second;
}

const EvalService::TaskState& EvalService::state_of(const std::string& task_id) const {
  auto it = tasks_.find(task_id);
  if (it == tasks_.end()) throw Error(ErrorCode::not_found, "unknown task '" + task_id + "'");
  return *it->second;
}

EvalService::RaterState& EvalService::rater_of(TaskState& t, const std::string& rater_id) {
  auto it = t.raters.find(rater_id);
  if (it == t.raters.end()) {
    throw Error(ErrorCode::not_found, "rater '" + rater_id + "' is not registered for task '" + t.task.task_id + "'");
  }
  return it->second;
}

void EvalService::apply(const Json& e) {
  const auto type = e.at("type").get<std::string>();
  if (type == "task_created") {
    auto st = std::make_unique<TaskState>();
    st->task = EvalTask::from_json(e.at("task"));
    for (const auto& p : st->task.pairs) st->by_id[p.pair_id] = &p;
    for (const auto& r : st->task.raters) st->raters[r];
    const auto id = st->task.task_id;
    tasks_[id] = std::move(st);
  } else if (type == "presented") {
    auto& t = state_of(e.at("task_id").get<std::string>());
    rater_of(t, e.at("rater_id").get<std::string>()).presented = e.at("pair_id").get<std::string>();
  } else if (type == "judgment") {
    auto& t = state_of(e.at("task_id").get<std::string>());
    auto j = GsbJudgment::from_json(e.at("judgment"));
    auto& r = rater_of(t, j.rater_id);
    r.judged.insert(j.pair_id);
    if (r.presented == j.pair_id) r.presented.reset();
    t.by_token[e.at("submission_id").get<std::string>()] = t.judgments.size();
    t.submission_rater.push_back(j.rater_id);
    t.judgments.push_back(std::move(j));
  } else {
    throw Error(ErrorCode::parse, "unknown journal event '" + type + "'");
  }
}

std::string EvalService::create_task(const CreateTaskRequest& request) {
  if (request.pairs.empty()) throw Error(ErrorCode::invalid_argument, "task needs at least one pair");
  if (request.raters.empty()) throw Error(ErrorCode::invalid_argument, "task needs at least one rater");
  std::set<std::string> seen;
  for (const auto& p : request.pairs) {
    if (!seen.insert(p.pair_id).second) throw Error(ErrorCode::invalid_argument, "duplicate pair_id '" + p.pair_id + "'");
  }
  std::set<std::string> raters;
  for (const auto& r : request.raters) {
    if (r.empty()) throw Error(ErrorCode::invalid_argument, "rater ids must be non-empty");
    if (!raters.insert(r).second) throw Error(ErrorCode::invalid_argument, "duplicate rater '" + r + "'");
  }
  EvalTask task;
  task.pairs = request.pairs;
  task.gold_fraction = request.gold_fraction;
  task.seed = request.seed;
  task.raters = request.raters;
  for (const auto& id : choose_gold(task.pairs, task.gold_fraction, task.seed)) {
    auto it = std::find_if(task.pairs.begin(), task.pairs.end(), [&](const EvalPair& p) { return p.pair_id == id; });
    task.gold[id] = *it->expected_verdict;
  }
  if (request.task_id) {
    task.task_id = *request.task_id;
  } else {
    task.task_id = "task-" + checksum_bytes(task.to_json().dump()).substr(7, 16);
  }

  std::unique_lock lock(mu_);
  if (tasks_.count(task.task_id) != 0) {
    throw Error(ErrorCode::conflict, "task '" + task.task_id + "' already exists");
  }
  const Json event{{"type", "task_created"}, {"task", task.to_json()}};
  journal_->append(event);
  apply(event);
  return task.task_id;
}

EvalTask EvalService::task(const std::string& task_id) const {
  std::shared_lock lock(mu_);
  return state_of(task_id).task;
}

std::vector<std::string> EvalService::task_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : tasks_) out.push_back(id);
  return out;
}

std::vector<std::string> EvalService::order_for(const TaskState& t, const std::string& rater_id) const {
  const std::uint64_t key = t.task.seed ^ stable_hash64(rater_id, 0x4f52444552ULL);
  std::vector<std::pair<std::uint64_t, std::string>> keyed;
  for (const auto& p : t.task.pairs) keyed.emplace_back(stable_hash64(p.pair_id, key), p.pair_id);
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::string> out;
  for (auto& [_, id] : keyed) out.push_back(std::move(id));
  return out;
}

std::optional<PresentedPair> EvalService::next_item(const std::string& task_id, const std::string& rater_id) {
  std::unique_lock lock(mu_);
  auto& t = state_of(task_id);
  auto& r = rater_of(t, rater_id);
  std::optional<std::string> pick = r.presented;
  if (!pick) {
    for (const auto& id : order_for(t, rater_id)) {
      if (r.judged.count(id) == 0) {
        pick = id;
        break;
      }
    }
    if (!pick) return std::nullopt;
    const Json event{{"type", "presented"}, {"task_id", task_id}, {"rater_id", rater_id}, {"pair_id", *pick}};
    journal_->append(event);
    apply(event);
  }
  const EvalPair& p = *t.by_id.at(*pick);
  PresentedPair out;
  out.task_id = task_id;
  out.pair_id = p.pair_id;
  out.image_ref = p.image_ref;
  out.presented_order = presentation_order(t.task.seed, rater_id, p.pair_id);
  const bool ab = out.presented_order == PresentedOrder::AB;
  out.caption_A = ab ? p.caption_left : p.caption_right;
  out.caption_B = ab ? p.caption_right : p.caption_left;
  return out;
}

SubmitAck EvalService::submit(const std::string& task_id, const Submission& s) {
  for (int v : {s.score_left, s.score_right}) {
    if (v < 1 || v > 5) {
      throw Error(ErrorCode::invalid_argument, "scores must be integers in 1..5, got " + std::to_string(v));
    }
  }
  std::unique_lock lock(mu_);
  auto& t = state_of(task_id);
  auto& r = rater_of(t, s.rater_id);
  const std::string token =
      s.submission_id.empty() ? s.rater_id + "/" + s.pair_id : s.submission_id;
  if (auto it = t.by_token.find(token); it != t.by_token.end()) {
    const auto& prior = t.judgments[it->second];
    if (prior.rater_id != s.rater_id || prior.pair_id != s.pair_id) {
      throw Error(ErrorCode::conflict, "submission_id '" + token + "' was used for another judgment");
    }
    return SubmitAck{token, true};
  }
  if (t.by_id.count(s.pair_id) == 0) {
    throw Error(ErrorCode::not_found, "unknown pair '" + s.pair_id + "' in task '" + task_id + "'");
  }
  if (r.judged.count(s.pair_id) != 0) {
    throw Error(ErrorCode::conflict, "rater '" + s.rater_id + "' already judged pair '" + s.pair_id + "'");
  }
  if (r.presented != s.pair_id) {
    throw Error(ErrorCode::state, "pair '" + s.pair_id + "' is not currently presented to rater '" + s.rater_id + "'");
  }
  GsbJudgment j;
  j.pair_id = s.pair_id;
  j.rater_id = s.rater_id;
  j.presented_order = presentation_order(t.task.seed, s.rater_id, s.pair_id);
  const bool ab = j.presented_order == PresentedOrder::AB;
  j.score_a = ab ? s.score_left : s.score_right;
  j.score_b = ab ? s.score_right : s.score_left;
  j.verdict = unblind(s.verdict, j.presented_order);
  const Json event{{"type", "judgment"}, {"task_id", task_id}, {"submission_id", token}, {"judgment", j.to_json()}};
  journal_->append(event);
  apply(event);
  return SubmitAck{token, false};
}

std::vector<GsbJudgment> EvalService::judgments(const std::string& task_id) const {
  std::shared_lock lock(mu_);
  return state_of(task_id).judgments;
}

namespace {

// Gold accuracy over the gold pairs these judgments cover; nullopt when none.
std::optional<GoldResult> gold_over(const std::vector<GsbJudgment>& js, const std::map<std::string, Verdict>& gold) {
  std::map<std::string, Verdict> covered;
  for (const auto& j : js) {
    if (auto it = gold.find(j.pair_id); it != gold.end()) covered.insert(*it);
  }
  if (covered.empty()) return std::nullopt;
  return gold_accuracy(js, covered);
}

}  // namespace

TaskReport EvalService::report(const std::string& task_id) const {
  std::shared_lock lock(mu_);
  const auto& t = state_of(task_id);
  if (t.judgments.empty()) throw Error(ErrorCode::state, "task '" + task_id + "' has no judgments yet");
  TaskReport rep;
  rep.task_id = task_id;
  rep.gsb = gsb_aggregate(t.judgments);
  rep.gold = gold_over(t.judgments, t.task.gold);
  for (const auto& rater : t.task.raters) {
    std::vector<GsbJudgment> mine;
    for (const auto& j : t.judgments) {
      if (j.rater_id == rater) mine.push_back(j);
    }
    if (mine.empty()) continue;
    RaterReport rr;
    rr.rater_id = rater;
    rr.judgments = mine.size();
    rr.gsb = gsb_aggregate(mine);
    rr.gold = gold_over(mine, t.task.gold);
    rr.flagged = rr.gold && !rr.gold->pass;
    rep.raters.push_back(std::move(rr));
  }
  return rep;
}

}  // namespace capcurate
