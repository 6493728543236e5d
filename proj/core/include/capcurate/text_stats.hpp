#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "capcurate/corpus.hpp"

namespace capcurate {

enum class PosTag { NOUN, VERB, ADJ, OTHER };
std::string_view to_string(PosTag tag) noexcept;
PosTag parse_pos_tag(std::string_view text);

class Segmenter {
 public:
  virtual ~Segmenter() = default;
  virtual std::vector<std::string> segment(std::string_view text) const = 0;
  virtual Language language() const = 0;
  virtual std::string id() const = 0;
};

// Unicode word runs, lowercased, punctuation and symbols dropped. An
// apostrophe between letters and a '.'/',' between digits stay inside the
// word ("dog's", "3.5").
class EnglishSegmenter final : public Segmenter {
 public:
  std::vector<std::string> segment(std::string_view text) const override;
  Language language() const override { return Language::EN; }
  std::string id() const override { return "en-uword-v1"; }
};

// Greedy forward longest match over CJK runs with a single-character
// fallback; non-CJK runs are segmented with the English rules.
class ChineseSegmenter final : public Segmenter {
 public:
  // Uses the bundled lexicon.
  ChineseSegmenter();
  explicit ChineseSegmenter(std::unordered_set<std::string> lexicon, std::string id = "cn-maxmatch-custom");

  std::vector<std::string> segment(std::string_view text) const override;
  Language language() const override { return Language::CN; }
  std::string id() const override { return id_; }

 private:
  std::unordered_set<std::string> lexicon_;
  std::size_t max_word_chars_ = 1;
  std::string id_;
};

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  // Exactly one tag per token.
  virtual std::vector<PosTag> tag(std::span<const std::string> tokens) const = 0;
  virtual std::string id() const = 0;
};

// Context-free dictionary tagger. Unknown Latin-script words fall back to a
// small suffix table when enabled; anything else unknown is OTHER.
class LexiconTagger final : public PosTagger {
 public:
  LexiconTagger(std::unordered_map<std::string, PosTag> lexicon, std::string id, bool suffix_fallback = false);

  // Bundled EN + CN lexicon with EN suffix fallback.
  static const LexiconTagger& bundled();

  std::vector<PosTag> tag(std::span<const std::string> tokens) const override;
  PosTag tag_one(const std::string& token) const;
  std::string id() const override { return id_; }
  std::size_t size() const noexcept { return lexicon_.size(); }

 private:
  std::unordered_map<std::string, PosTag> lexicon_;
  std::string id_;
  bool suffix_fallback_;
};

const Segmenter& default_segmenter(Language lang);
std::vector<std::string> segment(std::string_view text, Language lang, const Segmenter* segmenter = nullptr);

// Number of distinct contiguous n-token windows. Throws for n < 1.
std::size_t ngram_stats(std::span<const std::string> tokens, int n);

struct SampleStats {
  std::uint64_t token_count = 0;
  std::uint64_t distinct_2grams = 0;
  std::uint64_t distinct_3grams = 0;
  std::uint64_t distinct_nouns = 0;
  std::uint64_t distinct_verbs = 0;
  std::uint64_t distinct_adjs = 0;

  bool operator==(const SampleStats&) const = default;
};

// The distinct items one caption contributes; SampleStats is their sizes.
struct SampleItems {
  std::uint64_t token_count = 0;
  std::set<std::string> bigrams;
  std::set<std::string> trigrams;
  std::set<std::string> nouns;
  std::set<std::string> verbs;
  std::set<std::string> adjs;

  SampleStats stats() const;
};

SampleItems analyze_sample(std::string_view caption, const Segmenter& segmenter, const PosTagger& tagger);
SampleStats sample_stats(std::string_view caption, Language lang, const Segmenter& segmenter,
                         const PosTagger& tagger);

// Exact, mergeable per-corpus totals. Besides the per-sample sums it keeps a
// document frequency for every item so the corpus-novel column (items that
// occur in no other sample) can be derived after any merge order.
class StatsAccumulator {
 public:
  explicit StatsAccumulator(bool track_novelty = true) : track_novelty_(track_novelty) {}

  void add(const SampleItems& items);
  void merge(const StatsAccumulator& other);

  std::uint64_t sample_count() const noexcept { return count_; }
  bool tracks_novelty() const noexcept { return track_novelty_; }

  struct Means {
    double avg_len = 0;
    double uni_2gram = 0;
    double uni_3gram = 0;
    double uni_noun = 0;
    double uni_verb = 0;
    double uni_adj = 0;
    bool operator==(const Means&) const = default;
  };
  Means distinct_means() const;
  // Per-sample mean count of items whose document frequency is exactly 1.
  Means novel_means() const;

  bool operator==(const StatsAccumulator& other) const;

 private:
  using DocFreq = std::unordered_map<std::string, std::uint64_t>;
  enum Kind { kBigram, kTrigram, kNoun, kVerb, kAdj, kKinds };

  static std::uint64_t singletons(const DocFreq& df);

  bool track_novelty_;
  std::uint64_t count_ = 0;
  std::uint64_t tokens_ = 0;
  std::uint64_t sums_[kKinds] = {};
  DocFreq df_[kKinds];
};

struct CorpusStatsOptions {
  std::optional<std::uint64_t> subset_size;  // nullopt = all samples
  std::uint64_t seed = 0;
  // Language for caption shards (records carry no language field).
  Language caption_language = Language::EN;
  const Segmenter* en_segmenter = nullptr;  // defaults to bundled
  const Segmenter* cn_segmenter = nullptr;
  const PosTagger* tagger = nullptr;
  bool track_novelty = true;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

struct CorpusStatsReport {
  std::string dataset_id;
  std::uint64_t sample_count = 0;
  std::optional<std::uint64_t> subset_size;
  std::uint64_t seed = 0;
  StatsAccumulator::Means distinct;
  std::optional<StatsAccumulator::Means> novel;
  std::string segmenter_id;
  std::string tagger_id;

  Json to_json() const;
};

// Text analysed per sample: caption_text for caption shards, alt_text for
// sample shards (samples without alt-text are skipped).
CorpusStatsReport corpus_stats(const DatasetManifest& manifest, const std::filesystem::path& root,
                               const CorpusStatsOptions& options);

// Stable per-sample selection key: the subset is the `k` smallest keys.
std::uint64_t subset_key(std::string_view id, std::uint64_t seed) noexcept;

}  // namespace capcurate
