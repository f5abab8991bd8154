#include "hintscope/transport.hpp"

#include <memory>

#include <httplib.h>

#include "hintscope/text.hpp"

namespace hintscope {

namespace {

std::string error_tag(httplib::Error err) {
  switch (err) {
    case httplib::Error::Connection: return "connection";
    case httplib::Error::SSLConnection:
    case httplib::Error::SSLLoadingCerts:
    case httplib::Error::SSLServerVerification: return "tls";
    case httplib::Error::ConnectionTimeout: return "timeout";
    case httplib::Error::Read:
    case httplib::Error::Write: return "connection";
    default: return "other";
  }
}

}  // namespace

std::vector<std::string> HttpResponse::header_values(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : headers) {
    if (iequals(k, name)) out.push_back(v);
  }
  return out;
}

std::optional<std::string> HttpResponse::header(std::string_view name) const {
  for (const auto& [k, v] : headers) {
    if (iequals(k, name)) return v;
  }
  return std::nullopt;
}

HttpResponse HttpTransport::get(const Url& url, const RequestHeaders& headers) {
  if (url.scheme != "http" && url.scheme != "https") {
    throw TransportError("invalid-url", "unsupported scheme: " + url.str());
  }
  std::unique_ptr<httplib::Client> client;
  httplib::Headers hdrs;
  if (options_.loopback_port) {
    client = std::make_unique<httplib::Client>("127.0.0.1", *options_.loopback_port);
    hdrs.emplace("Host", url.host);
  } else {
    client = std::make_unique<httplib::Client>(url.origin());
    client->enable_server_certificate_verification(options_.verify_tls);
  }
  if (!client->is_valid()) throw TransportError("invalid-url", "cannot create client for " + url.str());
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client->set_connection_timeout(secs.count(), usecs.count());
  client->set_read_timeout(secs.count(), usecs.count());
  client->set_write_timeout(secs.count(), usecs.count());
  client->set_follow_location(false);
  client->set_keep_alive(false);
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);

  HttpResponse out;
  bool truncated = false;
  auto result = client->Get(
      url.path_and_query(), hdrs,
      [&out](const httplib::Response& r) {
        out.status = r.status;
        for (const auto& [k, v] : r.headers) out.headers.emplace_back(to_lower(k), v);
        return true;
      },
      [&](const char* data, std::size_t len) {
        out.body.append(data, len);
        if (out.body.size() >= options_.max_body_bytes) {
          truncated = true;
          return false;
        }
        return true;
      });
  if (!result) {
    if (truncated && out.status != 0) return out;
    auto err = result.error();
    if (err == httplib::Error::Connection && !options_.loopback_port) {
      // httplib reports resolution failures as connection errors.
      throw TransportError("dns", "cannot connect to " + url.host + ": " + httplib::to_string(err));
    }
    throw TransportError(error_tag(err), url.str() + ": " + httplib::to_string(err));
  }
  return out;
}

}  // namespace hintscope
