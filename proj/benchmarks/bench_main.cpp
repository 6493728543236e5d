#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "capcurate/packer.hpp"
#include "capcurate/quality.hpp"
#include "capcurate/scaling.hpp"
#include "capcurate/text_stats.hpp"

using namespace capcurate;

namespace {

std::string random_ascii(std::mt19937_64& rng, std::size_t len) {
  std::string s(len, ' ');
  for (auto& c : s) c = static_cast<char>('a' + rng() % 26);
  return s;
}

void BM_Anls(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto len = static_cast<std::size_t>(state.range(0));
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int i = 0; i < 256; ++i) pairs.emplace_back(random_ascii(rng, len), random_ascii(rng, len));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(anls(a, b));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Anls)->Arg(12)->Arg(64)->Arg(256);

void BM_PackLognormal(benchmark::State& state) {
  const auto seqs = lognormal_sequences(10000, 5.0, 1.0, 4096, 42);
  const auto mb = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pack(seqs, 4096, mb));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seqs.size()));
}
BENCHMARK(BM_PackLognormal)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_AnalyzeSample(benchmark::State& state) {
  const std::string caption =
      "A red barn stands in a wide green field under a pale blue sky, with two horses grazing near a wooden fence "
      "and a narrow dirt road leading toward distant hills.";
  const auto& seg = default_segmenter(Language::EN);
  const auto& tagger = LexiconTagger::bundled();
  for (auto _ : state) benchmark::DoNotOptimize(analyze_sample(caption, seg, tagger));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_AnalyzeSample);

void BM_AccumulatorMerge(benchmark::State& state) {
  const auto& seg = default_segmenter(Language::EN);
  const auto& tagger = LexiconTagger::bundled();
  std::mt19937_64 rng(5);
  const char* words[] = {"red", "barn", "dog", "field", "sky", "runs", "big", "the", "a", "near", "blue", "cat"};
  StatsAccumulator a, b;
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    for (int w = 0; w < 12; ++w) s += std::string(words[rng() % std::size(words)]) + " ";
    (i % 2 ? a : b).add(analyze_sample(s, seg, tagger));
  }
  for (auto _ : state) {
    StatsAccumulator m = a;
    m.merge(b);
    benchmark::DoNotOptimize(m.novel_means());
  }
}
BENCHMARK(BM_AccumulatorMerge)->Unit(benchmark::kMillisecond);

void BM_FitLog(benchmark::State& state) {
  std::mt19937_64 rng(9);
  std::vector<ScorePoint> pts;
  for (int i = 0; i < state.range(0); ++i) {
    const double x = 1e3 + static_cast<double>(rng() % 1000000);
    pts.push_back({x, 2 * std::log(x), ""});
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_log(pts));
}
BENCHMARK(BM_FitLog)->Arg(50)->Arg(5000);

}  // namespace

BENCHMARK_MAIN();
