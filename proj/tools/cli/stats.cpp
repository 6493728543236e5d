#include "capcurate/text_stats.hpp"

#include "common.hpp"

namespace capcurate::cli {

void add_stats(CLI::App& app) {
  struct Args {
    std::string dataset;
    std::optional<std::uint64_t> subset;
    std::uint64_t seed = 0;
    std::string out;
    std::string language = "EN";
    std::size_t threads = 0;
    bool no_novelty = false;
  };
  auto args = std::make_shared<Args>();
  auto* cmd = app.add_subcommand("stats", "Per-sample lexical statistics of a dataset");
  cmd->add_option("--dataset", args->dataset, "Dataset directory or manifest.json")->required();
  cmd->add_option("--subset", args->subset, "Analyse a seeded subset of this many samples");
  cmd->add_option("--seed", args->seed)->capture_default_str();
  cmd->add_option("--out", args->out, "Report path (stdout when omitted)");
  cmd->add_option("--caption-language", args->language, "Language of caption shards: EN | CN")->capture_default_str();
  cmd->add_option("--threads", args->threads, "0 = hardware concurrency")->capture_default_str();
  cmd->add_flag("--no-novelty", args->no_novelty, "Skip the corpus-novel columns");
  cmd->callback([args] {
    CorpusStatsOptions o;
    o.subset_size = args->subset;
    o.seed = args->seed;
    o.caption_language = parse_language(args->language);
    o.threads = args->threads;
    o.track_novelty = !args->no_novelty;
    const auto report = corpus_stats(load_manifest(args->dataset), dataset_root_of(args->dataset), o);
    emit(report.to_json(), args->out);
  });
}

}  // namespace capcurate::cli
