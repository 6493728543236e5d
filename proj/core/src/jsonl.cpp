#include "capcurate/jsonl.hpp"

#include <cstdio>

#include "capcurate/error.hpp"

namespace capcurate {

JsonlReader::JsonlReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) {
    throw Error(ErrorCode::io, "cannot open " + path.string());
  }
}

std::optional<Json> JsonlReader::next() {
  while (std::getline(in_, buf_)) {
    ++line_;
    if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
    if (buf_.find_first_not_of(" \t") == std::string::npos) continue;
    Json obj;
    try {
      obj = Json::parse(buf_);
    } catch (const Json::parse_error& e) {
      throw ParseError(line_, "json", e.what());
    }
    if (!obj.is_object()) {
      throw ParseError(line_, "json", "expected an object");
    }
    return obj;
  }
  if (in_.bad()) {
    throw Error(ErrorCode::io, "read failed: " + path_.string());
  }
  return std::nullopt;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, Mode mode)
    : path_(path),
      out_(path, std::ios::binary | (mode == Mode::append ? std::ios::app : std::ios::trunc)) {
  if (!out_) {
    throw Error(ErrorCode::io, "cannot open for writing " + path.string());
  }
}

void JsonlWriter::write(const Json& record) { write_raw_line(record.dump()); }

void JsonlWriter::write_raw_line(std::string_view line) {
  out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  out_.put('\n');
  if (!out_) {
    throw Error(ErrorCode::io, "write failed: " + path_.string());
  }
}

void JsonlWriter::flush() {
  out_.flush();
  if (!out_) {
    throw Error(ErrorCode::io, "flush failed: " + path_.string());
  }
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::io, "cannot open for writing " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw Error(ErrorCode::io, "write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::io, "rename failed: " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io, "cannot open " + path.string());
  }
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

namespace field {

namespace {
const Json* find(const Json& obj, std::string_view name) {
  auto it = obj.find(std::string(name));
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}
}  // namespace

std::string required_string(const Json& obj, std::string_view name, std::size_t line) {
  const Json* v = find(obj, name);
  if (v == nullptr) throw ParseError(line, std::string(name), "missing required field");
  if (!v->is_string()) throw ParseError(line, std::string(name), "expected a string");
  return v->get<std::string>();
}

std::optional<std::string> optional_string(const Json& obj, std::string_view name, std::size_t line) {
  const Json* v = find(obj, name);
  if (v == nullptr) return std::nullopt;
  if (!v->is_string()) throw ParseError(line, std::string(name), "expected a string");
  return v->get<std::string>();
}

std::int64_t required_int(const Json& obj, std::string_view name, std::size_t line) {
  const Json* v = find(obj, name);
  if (v == nullptr) throw ParseError(line, std::string(name), "missing required field");
  if (!v->is_number_integer()) throw ParseError(line, std::string(name), "expected an integer");
  return v->get<std::int64_t>();
}

double required_number(const Json& obj, std::string_view name, std::size_t line) {
  const Json* v = find(obj, name);
  if (v == nullptr) throw ParseError(line, std::string(name), "missing required field");
  if (!v->is_number()) throw ParseError(line, std::string(name), "expected a number");
  return v->get<double>();
}

}  // namespace field

}  // namespace capcurate
