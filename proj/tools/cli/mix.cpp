#include <sstream>

#include "capcurate/error.hpp"
#include "capcurate/mixture.hpp"
#include "common.hpp"

namespace capcurate::cli {

namespace {

struct OracleArgs {
  std::string oracle_cmd;
  std::string ledger;
};

void add_oracle_opts(CLI::App* sub, OracleArgs& a) {
  sub->add_option("--oracle-cmd", a.oracle_cmd,
                  "Shell command: reads {\"mixture\",\"budget\"} JSON on stdin, prints a score")
      ->required();
  sub->add_option("--ledger", a.ledger, "Append every quick evaluation to this JSONL file");
}

std::unique_ptr<QuickEvalLedger> open_ledger(const OracleArgs& a) {
  return a.ledger.empty() ? nullptr : std::make_unique<QuickEvalLedger>(a.ledger);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, ',');) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

}  // namespace

void add_mix(CLI::App& app) {
  auto* cmd = app.add_subcommand("mix", "Data mixture experiments");
  cmd->require_subcommand(1);

  struct SubsetArgs {
    std::string dataset, out, strata = "source_dataset";
    std::uint64_t k = 0, seed = 0;
  };
  auto sa = std::make_shared<SubsetArgs>();
  auto* subset = cmd->add_subcommand("subset", "Stratified subset with near-equal counts per stratum");
  subset->add_option("--dataset", sa->dataset, "Sample dataset directory or manifest.json")->required();
  subset->add_option("--k", sa->k, "Subset size")->required();
  subset->add_option("--strata", sa->strata, "source_dataset | language")->capture_default_str();
  subset->add_option("--seed", sa->seed)->capture_default_str();
  subset->add_option("--out", sa->out, "Output dataset directory")->required();
  subset->callback([sa] {
    StratifiedSubsetOptions o{sa->k, strata_key_by_name(sa->strata), sa->seed};
    const auto m = stratified_subset(load_manifest(sa->dataset), dataset_root_of(sa->dataset), o, sa->out);
    emit(m.to_json(), "");
  });

  struct QuickArgs {
    OracleArgs oracle;
    std::string mixture;
    std::uint64_t k = 0;
  };
  auto qa = std::make_shared<QuickArgs>();
  auto* quick = cmd->add_subcommand("quickeval", "Score one mixture at k samples");
  quick->add_option("--mixture", qa->mixture, "MixtureSpec JSON")->required();
  quick->add_option("--k", qa->k, "Sample budget")->required();
  add_oracle_opts(quick, qa->oracle);
  quick->callback([qa] {
    CommandOracle oracle(qa->oracle.oracle_cmd);
    auto ledger = open_ledger(qa->oracle);
    const auto m = MixtureSpec::load(qa->mixture);
    const double score = quick_quality_eval(m, qa->k, oracle, ledger.get());
    emit(Json{{"mixture_hash", m.hash()}, {"k", qa->k}, {"score", score}}, "");
  });

  struct ComposeArgs {
    OracleArgs oracle;
    std::string mixture, out;
    std::uint64_t k = 0;
    int max_passes = kDefaultMaxPasses;
  };
  auto ca = std::make_shared<ComposeArgs>();
  auto* compose = cmd->add_subcommand("compose", "Greedy group-halving search");
  compose->add_option("--mixture", ca->mixture, "Initial MixtureSpec JSON")->required();
  compose->add_option("--k", ca->k, "Quick-eval budget per trial")->required();
  compose->add_option("--max-passes", ca->max_passes)->capture_default_str()->check(CLI::PositiveNumber);
  compose->add_option("--out", ca->out, "Result JSON (stdout when omitted)");
  add_oracle_opts(compose, ca->oracle);
  compose->callback([ca] {
    CommandOracle oracle(ca->oracle.oracle_cmd);
    auto ledger = open_ledger(ca->oracle);
    try {
      emit(composition_search(MixtureSpec::load(ca->mixture), oracle, ca->k, ca->max_passes, ledger.get()).to_json(),
           ca->out);
    } catch (const SearchAborted& e) {
      Json partial = e.partial().to_json();
      partial["aborted"] = e.what();
      emit(partial, ca->out);
      throw;
    }
  });

  struct IncArgs {
    OracleArgs oracle;
    std::string mixture, dataset_id, group;
    double weight = 1.0, epsilon = kDefaultIncrementalEpsilon;
    int repeat = 1;
    std::uint64_t k = 0;
  };
  auto ia = std::make_shared<IncArgs>();
  auto* inc = cmd->add_subcommand("incremental", "Decide whether adding a dataset helps");
  inc->add_option("--mixture", ia->mixture, "Base MixtureSpec JSON")->required();
  inc->add_option("--dataset-id", ia->dataset_id)->required();
  inc->add_option("--group", ia->group, "Group to add it to (created if absent)")->required();
  inc->add_option("--weight", ia->weight, "Weight of a new group")->capture_default_str();
  inc->add_option("--repeat", ia->repeat, "Repeat factor of a new group")->capture_default_str();
  inc->add_option("--k", ia->k)->required();
  inc->add_option("--epsilon", ia->epsilon, "Tolerated score drop")->capture_default_str();
  add_oracle_opts(inc, ia->oracle);
  inc->callback([ia] {
    CommandOracle oracle(ia->oracle.oracle_cmd);
    auto ledger = open_ledger(ia->oracle);
    const NewDataset ds{ia->dataset_id, ia->group, ia->weight, ia->repeat};
    emit(incremental_eval(MixtureSpec::load(ia->mixture), ds, oracle, ia->k, ia->epsilon, ledger.get()).to_json(), "");
  });

  struct PlanArgs {
    std::string stages, out;
  };
  auto pa = std::make_shared<PlanArgs>();
  auto* plan = cmd->add_subcommand("plan", "Validate a staged curriculum");
  plan->add_option("--stages", pa->stages, "JSON array of stages")->required();
  plan->add_option("--out", pa->out);
  plan->callback([pa] {
    const Json j = Json::parse(read_file(pa->stages));
    if (!j.is_array()) throw Error(ErrorCode::parse, pa->stages + ": expected a JSON array of stages");
    std::vector<CurriculumStage> stages;
    for (const auto& s : j) stages.push_back(CurriculumStage::from_json(s));
    emit(curriculum_plan(std::move(stages)).to_json(), pa->out);
  });

  struct RankArgs {
    std::string grid, datasets, sizes, out;
    std::string oracle_cmd;
  };
  auto ra = std::make_shared<RankArgs>();
  auto* rank = cmd->add_subcommand("rankcheck", "Spearman rank agreement of datasets across sizes");
  rank->add_option("--grid", ra->grid, "JSON {dataset: {size: score}}");
  rank->add_option("--oracle-cmd", ra->oracle_cmd, "Score single-dataset mixtures instead of reading --grid");
  rank->add_option("--datasets", ra->datasets, "Comma-separated dataset ids (with --oracle-cmd)");
  rank->add_option("--sizes", ra->sizes, "Comma-separated sample budgets (with --oracle-cmd)");
  rank->add_option("--out", ra->out);
  rank->callback([ra] {
    ScoreGrid grid;
    if (!ra->grid.empty()) {
      grid = score_grid_from_json(Json::parse(read_file(ra->grid)));
    } else if (!ra->oracle_cmd.empty()) {
      const auto datasets = split_csv(ra->datasets);
      const auto sizes = split_csv(ra->sizes);
      if (datasets.empty() || sizes.empty()) {
        throw Error(ErrorCode::invalid_argument, "--oracle-cmd needs --datasets and --sizes");
      }
      CommandOracle oracle(ra->oracle_cmd);
      for (const auto& d : datasets) {
        MixtureSpec m;
        m.groups = {{"caption", {d}, 1.0, 1}};
        for (const auto& s : sizes) {
          const auto k = std::stoull(s);
          m.total_budget = k;
          grid[d][k] = quick_quality_eval(m, k, oracle);
        }
      }
    } else {
      throw Error(ErrorCode::invalid_argument, "give --grid or --oracle-cmd");
    }
    emit(rank_consistency(grid).to_json(), ra->out);
  });
}

}  // namespace capcurate::cli
