#include "capcurate/http_endpoint.hpp"

#include <charconv>

#include "capcurate/error.hpp"

namespace capcurate {

std::string HttpEndpoint::base_url() const { return scheme + "://" + host + ":" + std::to_string(port); }

HttpEndpoint HttpEndpoint::parse(std::string_view uri) {
  HttpEndpoint ep;
  const auto sep = uri.find("://");
  if (sep == std::string_view::npos) {
    throw Error(ErrorCode::invalid_argument, "endpoint must be scheme://host[:port][/path]: " + std::string(uri));
  }
  ep.scheme = std::string(uri.substr(0, sep));
  if (ep.scheme != "http") {
    throw Error(ErrorCode::invalid_argument, "unsupported endpoint scheme '" + ep.scheme + "' (http only)");
  }
  std::string_view rest = uri.substr(sep + 3);
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  ep.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    const auto port_text = authority.substr(colon + 1);
    int port = 0;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port <= 0 || port > 65535) {
      throw Error(ErrorCode::invalid_argument, "bad port in endpoint: " + std::string(uri));
    }
    ep.port = port;
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) {
    throw Error(ErrorCode::invalid_argument, "endpoint has no host: " + std::string(uri));
  }
  ep.host = std::string(authority);
  return ep;
}

}  // namespace capcurate
