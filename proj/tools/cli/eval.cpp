#include <map>

#include "capcurate/error.hpp"
#include "capcurate/judge.hpp"
#include "capcurate/quality.hpp"
#include "common.hpp"

namespace capcurate::cli {

namespace {

// Objects of a JSONL file keyed by their "id" field.
std::map<std::string, Json> by_id(const std::string& path) {
  std::map<std::string, Json> out;
  JsonlReader reader(path);
  while (auto obj = reader.next()) {
    const auto id = field::required_string(*obj, "id", reader.line_number());
    if (!out.emplace(id, std::move(*obj)).second) {
      throw Error(ErrorCode::invalid_argument, path + ": duplicate id '" + id + "'");
    }
  }
  return out;
}

std::string text_of(const Json& obj, const std::string& path) {
  for (const char* key : {"text", "prediction", "answer", "caption"}) {
    auto it = obj.find(std::string(key));
    if (it != obj.end() && it->is_string()) return it->get<std::string>();
  }
  throw Error(ErrorCode::parse, path + ": record '" + obj.at("id").get<std::string>() + "' has no text field");
}

}  // namespace

void add_eval(CLI::App& app) {
  auto* cmd = app.add_subcommand("eval", "Caption quality metrics");
  cmd->require_subcommand(1);

  struct AnlsArgs {
    std::string pred, ref, out;
    double tau = kDefaultAnlsThreshold;
  };
  auto anls_args = std::make_shared<AnlsArgs>();
  auto* anls_cmd = cmd->add_subcommand("anls", "ANLS of predictions against references, paired by id");
  anls_cmd->add_option("--pred", anls_args->pred, "JSONL with id and text")->required();
  anls_cmd->add_option("--ref", anls_args->ref, "JSONL with id and text")->required();
  anls_cmd->add_option("--tau", anls_args->tau)->capture_default_str();
  anls_cmd->add_option("--out", anls_args->out);
  anls_cmd->callback([a = anls_args] {
    const auto preds = by_id(a->pred);
    const auto refs = by_id(a->ref);
    std::vector<std::string> ids, p, r;
    for (const auto& [id, obj] : refs) {
      auto it = preds.find(id);
      if (it == preds.end()) throw Error(ErrorCode::invalid_argument, "no prediction for reference '" + id + "'");
      ids.push_back(id);
      p.push_back(text_of(it->second, a->pred));
      r.push_back(text_of(obj, a->ref));
    }
    if (preds.size() != refs.size()) log() << "ignoring " << preds.size() - refs.size() << " predictions without a reference\n";
    const auto score = ocr_benchmark_score(p, r, a->tau);
    Json j = score.to_json();
    Json per = Json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) per[ids[i]] = score.per_sample[i];
    j["per_sample"] = per;
    emit(j, a->out);
  });

  struct JudgeArgs {
    std::string candidates, refs, endpoint, model = "judge", out;
    std::size_t parallelism = 4;
    double rate_limit = 10.0;
  };
  auto judge_args = std::make_shared<JudgeArgs>();
  auto* judge_cmd = cmd->add_subcommand("judge", "Score candidate captions with an LLM judge");
  judge_cmd->add_option("--candidates", judge_args->candidates, "JSONL with id and caption")->required();
  judge_cmd->add_option("--refs", judge_args->refs, "JSONL with id and references (array)")->required();
  judge_cmd->add_option("--endpoint", judge_args->endpoint, "Chat-completions URL, or mock://?reply=...")->required();
  judge_cmd->add_option("--model", judge_args->model)->capture_default_str();
  judge_cmd->add_option("--parallelism", judge_args->parallelism)->capture_default_str();
  judge_cmd->add_option("--rate-limit", judge_args->rate_limit, "Requests per second")->capture_default_str();
  judge_cmd->add_option("--out", judge_args->out, "Result JSONL (stdout summary always)");
  judge_cmd->callback([a = judge_args] {
    const auto cands = by_id(a->candidates);
    const auto refs = by_id(a->refs);
    std::vector<JudgeItem> items;
    for (const auto& [id, obj] : cands) {
      JudgeItem item{id, text_of(obj, a->candidates), {}};
      auto it = refs.find(id);
      if (it != refs.end()) item.references = it->second.at("references").get<std::vector<std::string>>();
      items.push_back(std::move(item));
    }
    JudgeBatchOptions o;
    o.parallelism = a->parallelism;
    o.rate_limit = a->rate_limit;
    const auto results = judge_batch(items, [a] { return make_judge(a->endpoint, a->model); }, o);
    double sum = 0;
    std::size_t scored = 0;
    std::unique_ptr<JsonlWriter> writer;
    if (!a->out.empty()) writer = std::make_unique<JsonlWriter>(a->out, JsonlWriter::Mode::truncate);
    for (const auto& r : results) {
      if (r.score) {
        sum += r.score->rescaled;
        ++scored;
      }
      if (writer) writer->write(r.to_json());
    }
    if (writer) writer->flush();
    emit(Json{{"items", results.size()},
              {"scored", scored},
              {"errors", results.size() - scored},
              {"mean_rescaled", scored ? Json(sum / static_cast<double>(scored)) : Json(nullptr)}},
         "");
  });

  struct GsbArgs {
    std::string judgments, gold, out;
    double threshold = kGoldThreshold;
  };
  auto gsb_args = std::make_shared<GsbArgs>();
  auto* gsb_cmd = cmd->add_subcommand("gsb", "Aggregate Good/Same/Bad judgments");
  gsb_cmd->add_option("--judgments", gsb_args->judgments, "JSONL of judgments")->required();
  gsb_cmd->add_option("--gold", gsb_args->gold, "JSON object pair_id -> G|S|B");
  gsb_cmd->add_option("--gold-threshold", gsb_args->threshold)->capture_default_str();
  gsb_cmd->add_option("--out", gsb_args->out);
  gsb_cmd->callback([a = gsb_args] {
    std::vector<GsbJudgment> js;
    JsonlReader reader(a->judgments);
    while (auto obj = reader.next()) js.push_back(GsbJudgment::from_json(*obj, reader.line_number()));
    Json j = {{"gsb", gsb_aggregate(js).to_json()}};
    if (!a->gold.empty()) {
      const Json g = Json::parse(read_file(a->gold));
      if (!g.is_object()) throw Error(ErrorCode::parse, a->gold + ": expected an object of pair_id -> verdict");
      std::map<std::string, Verdict> gold;
      for (auto it = g.begin(); it != g.end(); ++it) {
        if (!it.value().is_string()) throw Error(ErrorCode::parse, a->gold + ": verdict of '" + it.key() + "' is not a string");
        gold[it.key()] = parse_verdict(it.value().get<std::string>());
      }
      j["gold"] = gold_accuracy(js, gold, a->threshold).to_json();
    }
    emit(j, a->out);
  });
}

}  // namespace capcurate::cli
