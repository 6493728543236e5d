#pragma once

#include <cctype>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "capcurate/corpus.hpp"
#include "capcurate/text_stats.hpp"
#include "support.hpp"

namespace capcurate::testing {

using Tokens = std::vector<std::string>;

inline LexiconTagger toy_tagger() {
  return LexiconTagger({{"dog", PosTag::NOUN},
                        {"cat", PosTag::NOUN},
                        {"barn", PosTag::NOUN},
                        {"chased", PosTag::VERB},
                        {"sits", PosTag::VERB},
                        {"big", PosTag::ADJ},
                        {"red", PosTag::ADJ}},
                       "toy");
}

// Independent recomputation: per-sample distinct sets straight from the
// token list, document frequencies by brute force over all samples.
struct NaiveItems {
  std::size_t tokens = 0;
  std::set<Tokens> kinds[5];
};

inline NaiveItems naive_items(const Tokens& toks, const PosTagger& tagger) {
  NaiveItems it;
  it.tokens = toks.size();
  for (int n = 2; n <= 3; ++n) {
    for (std::size_t i = 0; i + n <= toks.size(); ++i) it.kinds[n - 2].insert(Tokens(toks.begin() + i, toks.begin() + i + n));
  }
  const auto tags = tagger.tag(toks);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (tags[i] == PosTag::NOUN) it.kinds[2].insert({toks[i]});
    if (tags[i] == PosTag::VERB) it.kinds[3].insert({toks[i]});
    if (tags[i] == PosTag::ADJ) it.kinds[4].insert({toks[i]});
  }
  return it;
}

struct NaiveReport {
  std::size_t n = 0;
  double distinct[6] = {};
  double novel[6] = {};
};

inline NaiveReport naive_report(const std::vector<std::string>& captions, const PosTagger& tagger) {
  std::vector<NaiveItems> all;
  for (const auto& c : captions) all.push_back(naive_items(segment(c, Language::EN), tagger));
  NaiveReport r;
  r.n = all.size();
  std::uint64_t tokens = 0, sums[5] = {}, novel[5] = {};
  for (const auto& it : all) {
    tokens += it.tokens;
    for (int k = 0; k < 5; ++k) {
      sums[k] += it.kinds[k].size();
      for (const auto& item : it.kinds[k]) {
        int df = 0;
        for (const auto& other : all) df += other.kinds[k].count(item) ? 1 : 0;
        if (df == 1) ++novel[k];
      }
    }
  }
  const double n = static_cast<double>(r.n);
  r.distinct[0] = r.novel[0] = static_cast<double>(tokens) / n;
  for (int k = 0; k < 5; ++k) {
    r.distinct[k + 1] = static_cast<double>(sums[k]) / n;
    r.novel[k + 1] = static_cast<double>(novel[k]) / n;
  }
  return r;
}

inline std::vector<double> as_vec(const StatsAccumulator::Means& m) {
  return {m.avg_len, m.uni_2gram, m.uni_3gram, m.uni_noun, m.uni_verb, m.uni_adj};
}

inline const char* kWords[] = {"dog", "cat", "barn", "red", "big", "chased", "sits", "the", "a", "on", "field", "sky"};

inline std::string random_caption(std::mt19937_64& rng) {
  const int len = static_cast<int>(rng() % 12);
  std::string s;
  for (int i = 0; i < len; ++i) {
    if (i) s += rng() % 5 == 0 ? ", " : " ";
    std::string w = kWords[rng() % std::size(kWords)];
    if (rng() % 4 == 0) w[0] = static_cast<char>(std::toupper(w[0]));
    s += w;
  }
  if (rng() % 2) s += ".";
  return s;
}

// Writes captions as alt-text of sample shards split into `shards` files.
inline DatasetManifest write_corpus(const std::filesystem::path& dir, const std::vector<std::string>& captions,
                             std::size_t shards) {
  std::filesystem::create_directories(dir);
  std::vector<std::vector<CaptionSample>> parts(shards);
  for (std::size_t i = 0; i < captions.size(); ++i) {
    parts[i % shards].push_back(capcurate::testing::make_sample("c" + std::to_string(i), captions[i]));
  }
  for (std::size_t s = 0; s < shards; ++s) write_shard(parts[s], dir / ("p" + std::to_string(s) + ".jsonl"));
  auto m = build_manifest(dir, ShardKind::samples, nullptr, Timestamp{});
  save_manifest(m, dir);
  return m;
}

inline StatsAccumulator accumulate(const std::vector<std::string>& captions, const PosTagger& tagger) {
  StatsAccumulator acc;
  for (const auto& c : captions) acc.add(analyze_sample(c, default_segmenter(Language::EN), tagger));
  return acc;
}

}  // namespace capcurate::testing
