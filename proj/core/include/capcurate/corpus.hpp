#pragma once

#include <cstdint>
#include <filesystem>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "capcurate/jsonl.hpp"
#include "capcurate/time.hpp"

namespace capcurate {

enum class Language { EN, CN };
enum class CaptionMode { caption, recaption };
enum class ShardStatus { pending, leased, done };
// What a shard's lines hold: source samples or generated captions.
enum class ShardKind { samples, captions };

std::string_view to_string(Language lang) noexcept;
std::string_view to_string(CaptionMode mode) noexcept;
std::string_view to_string(ShardStatus status) noexcept;
std::string_view to_string(ShardKind kind) noexcept;
Language parse_language(std::string_view text);
CaptionMode parse_caption_mode(std::string_view text);
ShardStatus parse_shard_status(std::string_view text);
ShardKind parse_shard_kind(std::string_view text);

// A source image reference with optional web alt-text.
struct CaptionSample {
  std::string sample_id;
  std::string image_ref;
  std::optional<std::string> alt_text;
  std::string source_dataset;
  Language language = Language::EN;

  Json to_json() const;
  // Throws ParseError naming the line and the offending field.
  static CaptionSample from_json(const Json& obj, std::size_t line);

  bool operator==(const CaptionSample&) const = default;
};

// A generated caption attached to a sample. task_id scopes deduplication
// when several annotation tasks write into the same output.
struct CaptionRecord {
  std::string sample_id;
  std::string task_id;
  std::string caption_text;
  std::string captioner_id;
  CaptionMode mode = CaptionMode::caption;
  Timestamp created_at{};

  Json to_json() const;
  static CaptionRecord from_json(const Json& obj, std::size_t line);

  bool operator==(const CaptionRecord&) const = default;
};

struct ShardManifest {
  std::string shard_id;
  std::string path;  // relative to the dataset root
  std::uint64_t sample_count = 0;
  std::string checksum;  // "<algorithm>:<hex>"
  ShardStatus status = ShardStatus::pending;

  Json to_json() const;
  static ShardManifest from_json(const Json& obj);

  bool operator==(const ShardManifest&) const = default;
};

struct DatasetManifest {
  std::string dataset_id;
  ShardKind kind = ShardKind::samples;
  std::vector<ShardManifest> shards;  // sorted by shard_id
  std::uint64_t total_samples = 0;
  Timestamp created_at{};

  Json to_json() const;
  static DatasetManifest from_json(const Json& obj);
  // Canonical serialisation; identical manifests produce identical bytes.
  std::string dump() const;

  const ShardManifest* find(std::string_view shard_id) const;

  bool operator==(const DatasetManifest&) const = default;
};

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kShardExtension = ".jsonl";

// Streaming reader over one shard file. Holds one line in memory at a time.
template <class Record>
class BasicShardReader {
 public:
  explicit BasicShardReader(const std::filesystem::path& path) : reader_(path) {}

  std::optional<Record> next() {
    auto obj = reader_.next();
    if (!obj) return std::nullopt;
    return Record::from_json(*obj, reader_.line_number());
  }

  std::size_t line_number() const noexcept { return reader_.line_number(); }

  class iterator {
   public:
    using value_type = Record;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    explicit iterator(BasicShardReader* owner) : owner_(owner) { ++*this; }

    const Record& operator*() const { return *current_; }
    const Record* operator->() const { return &*current_; }
    iterator& operator++() {
      current_ = owner_->next();
      return *this;
    }
    void operator++(int) { ++*this; }
    bool operator==(std::default_sentinel_t) const { return !current_.has_value(); }

   private:
    BasicShardReader* owner_ = nullptr;
    std::optional<Record> current_;
  };

  iterator begin() { return iterator(this); }
  std::default_sentinel_t end() const { return {}; }

 private:
  JsonlReader reader_;
};

using ShardReader = BasicShardReader<CaptionSample>;
using RecordReader = BasicShardReader<CaptionRecord>;

// Opens a sample shard for streaming iteration.
ShardReader read_shard(const std::filesystem::path& path);
std::vector<CaptionSample> read_shard_all(const std::filesystem::path& path);
std::vector<CaptionRecord> read_records_all(const std::filesystem::path& path);

// Writes samples atomically; the manifest's path is the file name and the
// shard id is its stem. Rejects duplicate sample ids, listing all of them.
ShardManifest write_shard(std::span<const CaptionSample> samples, const std::filesystem::path& path);
ShardManifest write_records(std::span<const CaptionRecord> records, const std::filesystem::path& path);

// Scans `<dir>/*.jsonl` in name order, validating every line. When `prior`
// is given, any shard it lists whose bytes changed raises an integrity error.
DatasetManifest build_manifest(const std::filesystem::path& dir, ShardKind kind = ShardKind::samples,
                               const DatasetManifest* prior = nullptr,
                               std::optional<Timestamp> created_at = std::nullopt);

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& dir);
// Accepts either the dataset directory or the manifest file itself.
DatasetManifest load_manifest(const std::filesystem::path& dir_or_file);
std::filesystem::path dataset_root_of(const std::filesystem::path& dir_or_file);

// Recomputes checksums and counts; throws on any mismatch.
void verify_manifest(const DatasetManifest& manifest, const std::filesystem::path& root);

}  // namespace capcurate
