#include "capcurate/corpus.hpp"

#include "common.hpp"

namespace capcurate::cli {

void add_dataset(CLI::App& app) {
  struct Args {
    std::string dir;
    std::string kind = "samples";
  };
  auto args = std::make_shared<Args>();
  auto* cmd = app.add_subcommand("dataset", "Shard directories and manifests");
  cmd->require_subcommand(1);

  auto* manifest = cmd->add_subcommand("manifest", "Scan *.jsonl shards and write manifest.json");
  manifest->add_option("--dir", args->dir, "Shard directory")->required();
  manifest->add_option("--kind", args->kind, "samples | captions")
      ->capture_default_str()
      ->check(CLI::IsMember({"samples", "captions"}));
  manifest->callback([args] {
    const std::filesystem::path dir = args->dir;
    // An existing manifest is the prior: rewritten shards are an error.
    std::optional<DatasetManifest> prior;
    if (std::filesystem::exists(dir / kManifestFile)) prior = load_manifest(dir);
    const auto m = build_manifest(dir, parse_shard_kind(args->kind), prior ? &*prior : nullptr);
    save_manifest(m, dir);
    emit(m.to_json(), "");
  });

  auto* verify = cmd->add_subcommand("verify", "Check every shard against its recorded checksum");
  verify->add_option("--dir", args->dir, "Dataset directory or manifest.json")->required();
  verify->callback([args] {
    const auto m = load_manifest(args->dir);
    verify_manifest(m, dataset_root_of(args->dir));
    emit(Json{{"dataset_id", m.dataset_id}, {"shards", m.shards.size()}, {"total_samples", m.total_samples}, {"ok", true}},
         "");
  });
}

}  // namespace capcurate::cli
