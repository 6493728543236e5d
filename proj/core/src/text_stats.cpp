#include "capcurate/text_stats.hpp"

#include <algorithm>
#include <atomic>
#include <tuple>
#include <future>
#include <queue>
#include <thread>

#include "capcurate/checksum.hpp"
#include "capcurate/error.hpp"

namespace capcurate {

namespace {

constexpr char kJoin = '\x1f';

std::string join_window(std::span<const std::string> tokens, std::size_t start, std::size_t n) {
  std::string key = tokens[start];
  for (std::size_t k = 1; k < n; ++k) {
    key.push_back(kJoin);
    key += tokens[start + k];
  }
  return key;
}

std::set<std::string> windows(std::span<const std::string> tokens, std::size_t n) {
  std::set<std::string> out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) out.insert(join_window(tokens, i, n));
  return out;
}

}  // namespace

std::size_t ngram_stats(std::span<const std::string> tokens, int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n-gram order must be >= 1, got " + std::to_string(n));
  return windows(tokens, static_cast<std::size_t>(n)).size();
}

SampleStats SampleItems::stats() const {
  return SampleStats{token_count, bigrams.size(), trigrams.size(), nouns.size(), verbs.size(), adjs.size()};
}

SampleItems analyze_sample(std::string_view caption, const Segmenter& segmenter, const PosTagger& tagger) {
  const auto tokens = segmenter.segment(caption);
  SampleItems items;
  items.token_count = tokens.size();
  items.bigrams = windows(tokens, 2);
  items.trigrams = windows(tokens, 3);
  const auto tags = tagger.tag(tokens);
  if (tags.size() != tokens.size()) {
    throw Error(ErrorCode::state, "tagger '" + tagger.id() + "' returned " + std::to_string(tags.size()) +
                                      " tags for " + std::to_string(tokens.size()) + " tokens");
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    switch (tags[i]) {
      case PosTag::NOUN: items.nouns.insert(tokens[i]); break;
      case PosTag::VERB: items.verbs.insert(tokens[i]); break;
      case PosTag::ADJ: items.adjs.insert(tokens[i]); break;
      case PosTag::OTHER: break;
    }
  }
  return items;
}

SampleStats sample_stats(std::string_view caption, Language lang, const Segmenter& segmenter,
                         const PosTagger& tagger) {
  if (segmenter.language() != lang) {
    throw Error(ErrorCode::invalid_argument, "segmenter '" + segmenter.id() + "' does not handle " +
                                                 std::string(to_string(lang)));
  }
  return analyze_sample(caption, segmenter, tagger).stats();
}

// ---------------------------------------------------------------------------
// Accumulator

void StatsAccumulator::add(const SampleItems& items) {
  ++count_;
  tokens_ += items.token_count;
  const std::set<std::string>* sets[kKinds] = {&items.bigrams, &items.trigrams, &items.nouns, &items.verbs,
                                               &items.adjs};
  for (int k = 0; k < kKinds; ++k) {
    sums_[k] += sets[k]->size();
    if (track_novelty_) {
      for (const auto& item : *sets[k]) ++df_[k][item];
    }
  }
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  if (track_novelty_ != other.track_novelty_) {
    throw Error(ErrorCode::invalid_argument, "cannot merge accumulators with different novelty tracking");
  }
  count_ += other.count_;
  tokens_ += other.tokens_;
  for (int k = 0; k < kKinds; ++k) {
    sums_[k] += other.sums_[k];
    for (const auto& [item, n] : other.df_[k]) df_[k][item] += n;
  }
}

std::uint64_t StatsAccumulator::singletons(const DocFreq& df) {
  return static_cast<std::uint64_t>(std::count_if(df.begin(), df.end(), [](const auto& kv) { return kv.second == 1; }));
}

StatsAccumulator::Means StatsAccumulator::distinct_means() const {
  if (count_ == 0) return {};
  const auto n = static_cast<double>(count_);
  return Means{static_cast<double>(tokens_) / n,           static_cast<double>(sums_[kBigram]) / n,
               static_cast<double>(sums_[kTrigram]) / n,    static_cast<double>(sums_[kNoun]) / n,
               static_cast<double>(sums_[kVerb]) / n,       static_cast<double>(sums_[kAdj]) / n};
}

StatsAccumulator::Means StatsAccumulator::novel_means() const {
  if (!track_novelty_) throw Error(ErrorCode::state, "novelty was not tracked");
  if (count_ == 0) return {};
  const auto n = static_cast<double>(count_);
  return Means{static_cast<double>(tokens_) / n,
               static_cast<double>(singletons(df_[kBigram])) / n,
               static_cast<double>(singletons(df_[kTrigram])) / n,
               static_cast<double>(singletons(df_[kNoun])) / n,
               static_cast<double>(singletons(df_[kVerb])) / n,
               static_cast<double>(singletons(df_[kAdj])) / n};
}

bool StatsAccumulator::operator==(const StatsAccumulator& other) const {
  if (track_novelty_ != other.track_novelty_ || count_ != other.count_ || tokens_ != other.tokens_) return false;
  for (int k = 0; k < kKinds; ++k) {
    if (sums_[k] != other.sums_[k] || df_[k] != other.df_[k]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Corpus report

Json CorpusStatsReport::to_json() const {
  auto means_json = [](const StatsAccumulator::Means& m, bool with_len) {
    Json j{{"uni_2gram", m.uni_2gram}, {"uni_3gram", m.uni_3gram}, {"uni_noun", m.uni_noun},
           {"uni_verb", m.uni_verb},   {"uni_adj", m.uni_adj}};
    if (with_len) j["avg_len"] = m.avg_len;
    return j;
  };
  Json j = means_json(distinct, true);
  j["dataset_id"] = dataset_id;
  j["sample_count"] = sample_count;
  j["subset_size"] = subset_size ? Json(*subset_size) : Json("all");
  j["seed"] = seed;
  j["unique_definition"] = "distinct-within-sample";
  j["corpus_novel"] = novel ? means_json(*novel, false) : Json(nullptr);
  j["segmenter_id"] = segmenter_id;
  j["tagger_id"] = tagger_id;
  return j;
}

std::uint64_t subset_key(std::string_view id, std::uint64_t seed) noexcept { return stable_hash64(id, seed); }

namespace {

struct Candidate {
  std::uint64_t key = 0;
  std::string id;
  std::string text;
  Language lang = Language::EN;

  bool operator<(const Candidate& o) const { return std::tie(key, id) < std::tie(o.key, o.id); }
};

// Calls fn(id, text, lang) for every analysable line in the shard.
template <class Fn>
void for_each_text(const DatasetManifest& manifest, const std::filesystem::path& file, Language caption_lang, Fn&& fn) {
  if (manifest.kind == ShardKind::captions) {
    RecordReader reader(file);
    for (const auto& r : reader) fn(r.sample_id + kJoin + r.task_id, r.caption_text, caption_lang);
  } else {
    ShardReader reader(file);
    for (const auto& s : reader) {
      if (s.alt_text) fn(s.sample_id, *s.alt_text, s.language);
    }
  }
}

template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, std::size_t threads, Fn&& fn) {
  std::vector<T> results(n);
  if (n == 0) return results;
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> futs;
  for (std::size_t t = 0; t < threads; ++t) {
    futs.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < n; i = next++) results[i] = fn(i);
    }));
  }
  for (auto& f : futs) f.get();
  return results;
}

}  // namespace

CorpusStatsReport corpus_stats(const DatasetManifest& manifest, const std::filesystem::path& root,
                               const CorpusStatsOptions& options) {
  if (manifest.total_samples == 0) {
    throw Error(ErrorCode::invalid_argument, "dataset '" + manifest.dataset_id + "' is empty");
  }
  if (options.subset_size) {
    if (*options.subset_size == 0) throw Error(ErrorCode::invalid_argument, "subset size must be >= 1");
    if (*options.subset_size > manifest.total_samples) {
      throw Error(ErrorCode::invalid_argument, "subset size " + std::to_string(*options.subset_size) +
                                                   " exceeds dataset size " + std::to_string(manifest.total_samples));
    }
  }
  const Segmenter& en = options.en_segmenter ? *options.en_segmenter : default_segmenter(Language::EN);
  const Segmenter& cn = options.cn_segmenter ? *options.cn_segmenter : default_segmenter(Language::CN);
  const PosTagger& tagger = options.tagger ? *options.tagger : LexiconTagger::bundled();
  auto seg_for = [&](Language l) -> const Segmenter& { return l == Language::EN ? en : cn; };
  const std::size_t threads = options.threads != 0 ? options.threads
                                                   : std::max<unsigned>(1, std::thread::hardware_concurrency());
  const std::size_t n_shards = manifest.shards.size();

  StatsAccumulator total(options.track_novelty);
  if (!options.subset_size) {
    auto parts = parallel_map<StatsAccumulator>(n_shards, threads, [&](std::size_t i) {
      StatsAccumulator acc(options.track_novelty);
      for_each_text(manifest, root / manifest.shards[i].path, options.caption_language,
                    [&](const std::string&, const std::string& text, Language lang) {
                      acc.add(analyze_sample(text, seg_for(lang), tagger));
                    });
      return acc;
    });
    for (const auto& p : parts) total.merge(p);
  } else {
    const std::uint64_t k = *options.subset_size;
    // Bottom-k by keyed hash: a per-shard bounded max-heap, then a merge.
    auto heaps = parallel_map<std::vector<Candidate>>(n_shards, threads, [&](std::size_t i) {
      std::priority_queue<Candidate> heap;
      for_each_text(manifest, root / manifest.shards[i].path, options.caption_language,
                    [&](const std::string& id, const std::string& text, Language lang) {
                      Candidate c{subset_key(id, options.seed), id, {}, lang};
                      if (heap.size() < k) {
                        c.text = text;
                        heap.push(std::move(c));
                      } else if (c < heap.top()) {
                        c.text = text;
                        heap.pop();
                        heap.push(std::move(c));
                      }
                    });
      std::vector<Candidate> out;
      out.reserve(heap.size());
      while (!heap.empty()) {
        out.push_back(heap.top());
        heap.pop();
      }
      return out;
    });
    std::vector<Candidate> all;
    for (auto& h : heaps) std::move(h.begin(), h.end(), std::back_inserter(all));
    std::sort(all.begin(), all.end());
    if (all.size() > k) all.resize(k);
    if (all.size() < k) {
      throw Error(ErrorCode::invalid_argument, "subset size " + std::to_string(k) + " exceeds the " +
                                                   std::to_string(all.size()) + " analysable samples");
    }
    const std::size_t chunks = std::min<std::size_t>(threads, all.size());
    auto parts = parallel_map<StatsAccumulator>(chunks, threads, [&](std::size_t c) {
      StatsAccumulator acc(options.track_novelty);
      for (std::size_t i = c; i < all.size(); i += chunks) {
        acc.add(analyze_sample(all[i].text, seg_for(all[i].lang), tagger));
      }
      return acc;
    });
    for (const auto& p : parts) total.merge(p);
  }
  if (total.sample_count() == 0) {
    throw Error(ErrorCode::invalid_argument, "dataset '" + manifest.dataset_id + "' has no analysable text");
  }

  CorpusStatsReport report;
  report.dataset_id = manifest.dataset_id;
  report.sample_count = total.sample_count();
  report.subset_size = options.subset_size;
  report.seed = options.seed;
  report.distinct = total.distinct_means();
  if (options.track_novelty) report.novel = total.novel_means();
  report.segmenter_id = en.id() + "+" + cn.id();
  report.tagger_id = tagger.id();
  return report;
}

}  // namespace capcurate
