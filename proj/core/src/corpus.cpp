#include "capcurate/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "capcurate/checksum.hpp"
#include "capcurate/error.hpp"

namespace capcurate {

namespace fs = std::filesystem;

std::string_view to_string(Language lang) noexcept { return lang == Language::EN ? "EN" : "CN"; }

std::string_view to_string(CaptionMode mode) noexcept {
  return mode == CaptionMode::caption ? "caption" : "recaption";
}

std::string_view to_string(ShardStatus status) noexcept {
  switch (status) {
    case ShardStatus::pending: return "pending";
    case ShardStatus::leased: return "leased";
    case ShardStatus::done: return "done";
  }
  return "pending";
}

std::string_view to_string(ShardKind kind) noexcept {
  return kind == ShardKind::samples ? "samples" : "captions";
}

Language parse_language(std::string_view text) {
  if (text == "EN") return Language::EN;
  if (text == "CN") return Language::CN;
  throw Error(ErrorCode::invalid_argument, "unsupported language '" + std::string(text) + "' (EN|CN)");
}

CaptionMode parse_caption_mode(std::string_view text) {
  if (text == "caption") return CaptionMode::caption;
  if (text == "recaption") return CaptionMode::recaption;
  throw Error(ErrorCode::invalid_argument, "unknown mode '" + std::string(text) + "' (caption|recaption)");
}

ShardStatus parse_shard_status(std::string_view text) {
  if (text == "pending") return ShardStatus::pending;
  if (text == "leased") return ShardStatus::leased;
  if (text == "done") return ShardStatus::done;
  throw Error(ErrorCode::invalid_argument, "unknown shard status '" + std::string(text) + "'");
}

ShardKind parse_shard_kind(std::string_view text) {
  if (text == "samples") return ShardKind::samples;
  if (text == "captions") return ShardKind::captions;
  throw Error(ErrorCode::invalid_argument, "unknown shard kind '" + std::string(text) + "'");
}

Json CaptionSample::to_json() const {
  return Json{{"sample_id", sample_id},
              {"image_ref", image_ref},
              {"alt_text", alt_text ? Json(*alt_text) : Json(nullptr)},
              {"source_dataset", source_dataset},
              {"language", to_string(language)}};
}

CaptionSample CaptionSample::from_json(const Json& obj, std::size_t line) {
  CaptionSample s;
  s.sample_id = field::required_string(obj, "sample_id", line);
  if (s.sample_id.empty()) throw ParseError(line, "sample_id", "must be non-empty");
  s.image_ref = field::required_string(obj, "image_ref", line);
  if (s.image_ref.empty()) throw ParseError(line, "image_ref", "must be non-empty");
  s.alt_text = field::optional_string(obj, "alt_text", line);
  s.source_dataset = field::required_string(obj, "source_dataset", line);
  const auto lang = field::required_string(obj, "language", line);
  try {
    s.language = parse_language(lang);
  } catch (const Error& e) {
    throw ParseError(line, "language", e.what());
  }
  return s;
}

Json CaptionRecord::to_json() const {
  return Json{{"sample_id", sample_id},       {"task_id", task_id},
              {"caption_text", caption_text}, {"captioner_id", captioner_id},
              {"mode", to_string(mode)},      {"created_at", format_timestamp(created_at)}};
}

CaptionRecord CaptionRecord::from_json(const Json& obj, std::size_t line) {
  CaptionRecord r;
  r.sample_id = field::required_string(obj, "sample_id", line);
  if (r.sample_id.empty()) throw ParseError(line, "sample_id", "must be non-empty");
  r.task_id = field::required_string(obj, "task_id", line);
  r.caption_text = field::required_string(obj, "caption_text", line);
  if (r.caption_text.empty()) throw ParseError(line, "caption_text", "must be non-empty");
  r.captioner_id = field::required_string(obj, "captioner_id", line);
  try {
    r.mode = parse_caption_mode(field::required_string(obj, "mode", line));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line, "mode", e.what());
  }
  try {
    r.created_at = parse_timestamp(field::required_string(obj, "created_at", line));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line, "created_at", e.what());
  }
  return r;
}

Json ShardManifest::to_json() const {
  return Json{{"shard_id", shard_id},
              {"path", path},
              {"sample_count", sample_count},
              {"checksum", checksum},
              {"status", to_string(status)}};
}

ShardManifest ShardManifest::from_json(const Json& obj) {
  ShardManifest m;
  m.shard_id = obj.at("shard_id").get<std::string>();
  m.path = obj.at("path").get<std::string>();
  m.sample_count = obj.at("sample_count").get<std::uint64_t>();
  m.checksum = obj.at("checksum").get<std::string>();
  m.status = parse_shard_status(obj.value("status", std::string("pending")));
  return m;
}

Json DatasetManifest::to_json() const {
  Json shards_json = Json::array();
  for (const auto& s : shards) shards_json.push_back(s.to_json());
  return Json{{"dataset_id", dataset_id},
              {"kind", to_string(kind)},
              {"checksum_algorithm", kChecksumAlgorithm},
              {"shards", std::move(shards_json)},
              {"total_samples", total_samples},
              {"created_at", format_timestamp(created_at)}};
}

DatasetManifest DatasetManifest::from_json(const Json& obj) {
  DatasetManifest m;
  try {
    m.dataset_id = obj.at("dataset_id").get<std::string>();
    m.kind = parse_shard_kind(obj.value("kind", std::string("samples")));
    for (const auto& s : obj.at("shards")) m.shards.push_back(ShardManifest::from_json(s));
    m.total_samples = obj.at("total_samples").get<std::uint64_t>();
    m.created_at = parse_timestamp(obj.at("created_at").get<std::string>());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed manifest: ") + e.what());
  }
  std::uint64_t sum = 0;
  std::set<std::string> ids;
  for (const auto& s : m.shards) {
    sum += s.sample_count;
    if (!ids.insert(s.shard_id).second) {
      throw Error(ErrorCode::integrity, "manifest lists shard '" + s.shard_id + "' twice");
    }
  }
  if (sum != m.total_samples) {
    throw Error(ErrorCode::integrity, "manifest total_samples " + std::to_string(m.total_samples) +
                                          " != sum of shard counts " + std::to_string(sum));
  }
  return m;
}

std::string DatasetManifest::dump() const { return to_json().dump(2) + "\n"; }

const ShardManifest* DatasetManifest::find(std::string_view shard_id) const {
  for (const auto& s : shards) {
    if (s.shard_id == shard_id) return &s;
  }
  return nullptr;
}

ShardReader read_shard(const fs::path& path) { return ShardReader(path); }

std::vector<CaptionSample> read_shard_all(const fs::path& path) {
  ShardReader reader(path);
  std::vector<CaptionSample> out;
  for (const auto& s : reader) out.push_back(s);
  return out;
}

std::vector<CaptionRecord> read_records_all(const fs::path& path) {
  RecordReader reader(path);
  std::vector<CaptionRecord> out;
  for (const auto& r : reader) out.push_back(r);
  return out;
}

namespace {

template <class Record>
ShardManifest write_lines(std::span<const Record> items, const fs::path& path) {
  std::unordered_set<std::string_view> seen;
  std::set<std::string> dups;
  for (const auto& item : items) {
    if (!seen.insert(item.sample_id).second) dups.insert(item.sample_id);
  }
  if (!dups.empty()) {
    std::string list;
    for (const auto& d : dups) list += (list.empty() ? "" : ", ") + d;
    throw Error(ErrorCode::invalid_argument, "duplicate sample_id in batch: " + list);
  }
  std::string content;
  for (const auto& item : items) {
    content += item.to_json().dump();
    content.push_back('\n');
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  atomic_write_file(path, content);

  ShardManifest m;
  m.shard_id = path.stem().string();
  m.path = path.filename().string();
  m.sample_count = items.size();
  m.checksum = checksum_bytes(content);
  return m;
}

template <class Record>
std::uint64_t count_valid_lines(const fs::path& path) {
  BasicShardReader<Record> reader(path);
  std::uint64_t n = 0;
  while (reader.next()) ++n;
  return n;
}

}  // namespace

ShardManifest write_shard(std::span<const CaptionSample> samples, const fs::path& path) {
  return write_lines(samples, path);
}

ShardManifest write_records(std::span<const CaptionRecord> records, const fs::path& path) {
  return write_lines(records, path);
}

DatasetManifest build_manifest(const fs::path& dir, ShardKind kind, const DatasetManifest* prior,
                               std::optional<Timestamp> created_at) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::not_found, "not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == kShardExtension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  DatasetManifest m;
  m.dataset_id = fs::absolute(dir).lexically_normal().filename().string();
  if (m.dataset_id.empty()) m.dataset_id = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  m.kind = kind;
  m.created_at = created_at.value_or(now_utc());

  for (const auto& file : files) {
    ShardManifest s;
    s.shard_id = file.stem().string();
    s.path = file.filename().string();
    try {
      s.sample_count = kind == ShardKind::samples ? count_valid_lines<CaptionSample>(file)
                                                  : count_valid_lines<CaptionRecord>(file);
      s.checksum = checksum_file(file);
    } catch (const Error& e) {
      throw Error(e.code(), "shard '" + s.shard_id + "': " + e.what());
    }
    if (prior != nullptr) {
      if (const auto* before = prior->find(s.shard_id); before != nullptr) {
        if (before->checksum != s.checksum) {
          throw Error(ErrorCode::integrity, "shard '" + s.shard_id + "': checksum mismatch (manifest " +
                                                before->checksum + ", file " + s.checksum + ")");
        }
        s.status = before->status;
      }
    }
    m.total_samples += s.sample_count;
    m.shards.push_back(std::move(s));
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& dir) {
  fs::create_directories(dir);
  atomic_write_file(dir / kManifestFile, manifest.dump());
}

fs::path dataset_root_of(const fs::path& dir_or_file) {
  return fs::is_directory(dir_or_file) ? dir_or_file : dir_or_file.parent_path();
}

DatasetManifest load_manifest(const fs::path& dir_or_file) {
  const fs::path file = fs::is_directory(dir_or_file) ? dir_or_file / kManifestFile : dir_or_file;
  const std::string text = read_file(file);
  Json obj;
  try {
    obj = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::parse, file.string() + ": " + e.what());
  }
  return DatasetManifest::from_json(obj);
}

void verify_manifest(const DatasetManifest& manifest, const fs::path& root) {
  for (const auto& s : manifest.shards) {
    const fs::path file = root / s.path;
    std::string actual;
    try {
      actual = checksum_file(file);
    } catch (const Error& e) {
      throw Error(e.code(), "shard '" + s.shard_id + "': " + e.what());
    }
    if (actual != s.checksum) {
      throw Error(ErrorCode::integrity, "shard '" + s.shard_id + "': checksum mismatch");
    }
    const std::uint64_t n = manifest.kind == ShardKind::samples ? count_valid_lines<CaptionSample>(file)
                                                                 : count_valid_lines<CaptionRecord>(file);
    if (n != s.sample_count) {
      throw Error(ErrorCode::integrity, "shard '" + s.shard_id + "': sample_count " +
                                            std::to_string(s.sample_count) + " but file holds " +
                                            std::to_string(n));
    }
  }
}

}  // namespace capcurate
