#include "capcurate/error.hpp"

namespace capcurate {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::integrity: return "integrity";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::state: return "state";
    case ErrorCode::transport: return "transport";
    case ErrorCode::unparseable: return "unparseable";
  }
  return "unknown";
}

}  // namespace capcurate
