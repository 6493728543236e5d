#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace capcurate {

using Json = nlohmann::json;

// Streams a line-delimited JSON file one object at a time. Blank lines are
// skipped but still counted, so line numbers match what an editor shows.
class JsonlReader {
 public:
  explicit JsonlReader(const std::filesystem::path& path);

  // Returns nullopt at end of file. Throws ParseError on malformed JSON or a
  // non-object line.
  std::optional<Json> next();

  std::size_t line_number() const noexcept { return line_; }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::string buf_;
  std::size_t line_ = 0;
};

class JsonlWriter {
 public:
  enum class Mode { truncate, append };

  JsonlWriter(const std::filesystem::path& path, Mode mode);

  void write(const Json& record);
  void write_raw_line(std::string_view line);
  void flush();
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

// Writes to a sibling temporary file and renames it into place.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

// Field accessors for parsing objects read from JSONL. Failures raise
// ParseError naming the field and line.
namespace field {
std::string required_string(const Json& obj, std::string_view name, std::size_t line);
std::optional<std::string> optional_string(const Json& obj, std::string_view name, std::size_t line);
std::int64_t required_int(const Json& obj, std::string_view name, std::size_t line);
double required_number(const Json& obj, std::string_view name, std::size_t line);
}  // namespace field

}  // namespace capcurate
