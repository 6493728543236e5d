#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace capcurate {

enum class ErrorCode {
  invalid_argument,
  parse,
  io,
  integrity,
  not_found,
  conflict,
  state,
  transport,
  unparseable,
};

std::string_view to_string(ErrorCode code) noexcept;

// Base exception for every failure raised by the library. The code lets
// callers (CLI, HTTP layer) map failures without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A malformed line in a line-delimited JSON file. what() reads
// "line <n>: <field>: <detail>" so the offending location is visible.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& detail)
      : Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + field + ": " + detail),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace capcurate
