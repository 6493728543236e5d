#include "capcurate/journal.hpp"

#include "capcurate/error.hpp"

namespace capcurate {

Journal::Journal(const std::filesystem::path& path)
    : path_(path), writer_(path, JsonlWriter::Mode::append) {}

void Journal::append(const Json& event) {
  std::lock_guard lock(mu_);
  writer_.write(event);
  writer_.flush();
}

void Journal::replay(const std::filesystem::path& path, const std::function<void(const Json&)>& fn) {
  if (!std::filesystem::exists(path)) return;
  const std::string text = read_file(path);
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string_view raw(text.data() + pos, (terminated ? nl : text.size()) - pos);
    pos = terminated ? nl + 1 : text.size();
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Json event;
    try {
      event = Json::parse(raw);
    } catch (const Json::parse_error& e) {
      if (!terminated) return;
      throw ParseError(line, "journal", e.what());
    }
    fn(event);
  }
}

}  // namespace capcurate
