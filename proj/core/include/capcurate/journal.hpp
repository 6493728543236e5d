#pragma once

#include <filesystem>
#include <functional>
#include <mutex>

#include "capcurate/jsonl.hpp"

namespace capcurate {

// Append-only line-delimited JSON event log. Every append is flushed before
// returning, so an acknowledged event survives a process crash.
class Journal {
 public:
  explicit Journal(const std::filesystem::path& path);

  void append(const Json& event);
  const std::filesystem::path& path() const noexcept { return path_; }

  // Invokes `fn` for every complete event in file order. A torn final line
  // (no trailing newline, unparseable) is ignored as an interrupted write.
  static void replay(const std::filesystem::path& path, const std::function<void(const Json&)>& fn);

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  JsonlWriter writer_;
};

}  // namespace capcurate
