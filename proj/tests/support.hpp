#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "capcurate/corpus.hpp"

namespace capcurate::testing {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "capcurate-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline CaptionSample make_sample(const std::string& id, std::optional<std::string> alt = std::nullopt,
                                 std::string source = "SA1B", Language lang = Language::EN) {
  return CaptionSample{id, "images/" + id + ".jpg", std::move(alt), std::move(source), lang};
}

inline std::vector<CaptionSample> make_samples(const std::string& prefix, std::size_t n, bool with_alt = true) {
  std::vector<CaptionSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = prefix + "-" + std::to_string(i);
    out.push_back(make_sample(id, with_alt ? std::optional<std::string>("alt text for " + id) : std::nullopt));
  }
  return out;
}

// Writes `shards` shards of `per_shard` samples under dir and saves the
// manifest. Shard ids are "s00", "s01", ...
inline DatasetManifest make_dataset(const std::filesystem::path& dir, std::size_t shards, std::size_t per_shard,
                                    bool with_alt = true) {
  std::filesystem::create_directories(dir);
  for (std::size_t s = 0; s < shards; ++s) {
    char name[24];
    std::snprintf(name, sizeof name, "s%02zu", s);
    write_shard(make_samples(name, per_shard, with_alt), dir / (std::string(name) + ".jsonl"));
  }
  auto m = build_manifest(dir, ShardKind::samples, nullptr, Timestamp{});
  save_manifest(m, dir);
  return m;
}

}  // namespace capcurate::testing
