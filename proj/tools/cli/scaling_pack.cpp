#include <cstdio>

#include "capcurate/error.hpp"
#include "capcurate/packer.hpp"
#include "capcurate/scaling.hpp"
#include "common.hpp"

namespace capcurate::cli {

void add_scaling(CLI::App& app) {
  struct Args {
    std::string points, out, csv;
  };
  auto args = std::make_shared<Args>();
  auto* cmd = app.add_subcommand("scaling", "Log-linear data scaling fits");
  cmd->require_subcommand(1);
  auto* fit = cmd->add_subcommand("fit", "Fit score = a ln(size) + b");
  fit->add_option("--points", args->points, "JSONL with data_size, score, optional label")->required();
  fit->add_option("--out", args->out, "Fit JSON (stdout when omitted)");
  fit->add_option("--csv", args->csv, "Also write size,score,fitted rows here");
  fit->callback([args] {
    const auto pts = read_score_points(args->points);
    const auto f = fit_log(pts);
    if (!args->csv.empty()) {
      atomic_write_file(args->csv, fit_csv(pts, f));
      log() << "wrote " << args->csv << "\n";
    }
    emit(f.to_json(), args->out);
  });
}

void add_pack(CLI::App& app) {
  struct Args {
    std::uint32_t capacity = 4096;
    std::string dist = "lognormal:5,1";
    std::size_t n = 10000;
    std::uint64_t seed = 42;
    std::size_t micro_batch = kDefaultMicroBatch;
    std::string manifest;
  };
  auto args = std::make_shared<Args>();
  auto* cmd = app.add_subcommand("pack", "Sequence packing");
  cmd->require_subcommand(1);
  auto* bench = cmd->add_subcommand("bench", "Packed vs pad-to-capacity waste on synthetic lengths");
  bench->add_option("--capacity", args->capacity)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--dist", args->dist, "lognormal:MU,SIGMA")->capture_default_str();
  bench->add_option("--n", args->n)->capture_default_str();
  bench->add_option("--seed", args->seed)->capture_default_str();
  bench->add_option("--micro-batch", args->micro_batch)->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--manifest", args->manifest, "Write the packed batches as JSONL");
  bench->callback([args] {
    double mu = 0, sigma = 0;
    char tail = 0;
    if (std::sscanf(args->dist.c_str(), "lognormal:%lf,%lf%c", &mu, &sigma, &tail) != 2) {
      throw Error(ErrorCode::invalid_argument, "unsupported --dist '" + args->dist + "' (expected lognormal:MU,SIGMA)");
    }
    const auto seqs = lognormal_sequences(args->n, mu, sigma, args->capacity, args->seed);
    const auto result = pack_bench(seqs, args->capacity, args->micro_batch);
    if (!args->manifest.empty()) write_pack_manifest(pack(seqs, args->capacity, args->micro_batch).batches, args->manifest);
    emit(result.to_json(), "");
  });
}

}  // namespace capcurate::cli
