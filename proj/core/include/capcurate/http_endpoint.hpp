#pragma once

#include <string>
#include <string_view>

namespace capcurate {

// "http://host:port/path" split into the parts an HTTP client needs.
struct HttpEndpoint {
  std::string scheme;
  std::string host;
  int port = 80;
  std::string path = "/";

  std::string base_url() const;  // scheme://host:port
  static HttpEndpoint parse(std::string_view uri);
};

}  // namespace capcurate
