#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hintscope/url.hpp"

namespace hintscope {

struct HttpResponse {
  int status = 0;
  /// Header names are lowercased; repeated headers keep one entry each.
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;

  std::vector<std::string> header_values(std::string_view name) const;
  std::optional<std::string> header(std::string_view name) const;
};

/// Network-level failure. `tag` is one of: dns, tls, timeout, connection,
/// invalid-url, other.
class TransportError : public std::runtime_error {
 public:
  TransportError(std::string tag, const std::string& what)
      : std::runtime_error(what), tag_(std::move(tag)) {}
  const std::string& tag() const { return tag_; }

 private:
  std::string tag_;
};

using RequestHeaders = std::map<std::string, std::string>;

/// Issues one GET without following redirects and without any state kept
/// between calls (no cookies, no connection reuse).
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse get(const Url& url, const RequestHeaders& headers) = 0;
  /// True when requests bypass TLS (loopback test harness).
  virtual bool test_override() const { return false; }
};

struct HttpTransportOptions {
  std::chrono::milliseconds timeout{30000};
  bool verify_tls = true;
  std::size_t max_body_bytes = 8u << 20;
  /// Test-only: send every request as plain HTTP to 127.0.0.1:<port> with the
  /// original Host header. Records produced this way are flagged.
  std::optional<std::uint16_t> loopback_port;
};

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(HttpTransportOptions options = {}) : options_(options) {}
  HttpResponse get(const Url& url, const RequestHeaders& headers) override;
  bool test_override() const override { return options_.loopback_port.has_value(); }

 private:
  HttpTransportOptions options_;
};

}  // namespace hintscope
