#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace hintscope {

// Hierarchical URL (scheme://host[:port]/path?query#fragment). Scheme and
// host are lowercased on parse; path is never empty.
struct Url {
  std::string scheme;
  std::string host;
  std::optional<std::uint16_t> port;
  std::string path = "/";
  std::optional<std::string> query;
  std::optional<std::string> fragment;

  static std::optional<Url> parse(std::string_view text);

  std::uint16_t effective_port() const;
  std::string origin() const;
  std::string path_and_query() const;
  std::string str() const;

  bool operator==(const Url&) const = default;
};

// RFC 3986 reference resolution. Returns nullopt for references that do not
// produce a hierarchical URL (mailto:, javascript:, malformed input).
std::optional<Url> resolve_url(const Url& base, std::string_view reference);

bool is_valid_hostname(std::string_view host);
bool is_ip_literal(std::string_view host);

}  // namespace hintscope
