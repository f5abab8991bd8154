#include "hintscope/url.hpp"

#include <cctype>
#include <charconv>
#include <vector>

#include "hintscope/text.hpp"

namespace hintscope {

namespace {

bool is_scheme_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

std::string remove_dot_segments(std::string_view path) {
  std::vector<std::string_view> out;
  bool absolute = !path.empty() && path.front() == '/';
  auto segments = split(path, '/');
  if (absolute) segments.erase(segments.begin());
  bool trailing_slash = false;
  for (size_t i = 0; i < segments.size(); ++i) {
    auto seg = segments[i];
    bool last = i + 1 == segments.size();
    if (seg == ".") {
      trailing_slash = last;
    } else if (seg == "..") {
      if (!out.empty()) out.pop_back();
      trailing_slash = last;
    } else {
      out.push_back(seg);
      trailing_slash = false;
    }
  }
  std::string result = absolute ? "/" : "";
  for (size_t i = 0; i < out.size(); ++i) {
    if (i) result += '/';
    result += out[i];
  }
  if (trailing_slash && !result.empty() && result.back() != '/') result += '/';
  return result;
}

std::string merge_paths(const Url& base, std::string_view ref_path) {
  auto slash = base.path.rfind('/');
  if (slash == std::string::npos) return "/" + std::string(ref_path);
  return base.path.substr(0, slash + 1) + std::string(ref_path);
}

// Splits "path?query#fragment" into its parts.
void split_tail(std::string_view tail, std::string& path, std::optional<std::string>& query,
                std::optional<std::string>& fragment) {
  if (auto hash = tail.find('#'); hash != std::string_view::npos) {
    fragment = std::string(tail.substr(hash + 1));
    tail = tail.substr(0, hash);
  }
  if (auto q = tail.find('?'); q != std::string_view::npos) {
    query = std::string(tail.substr(q + 1));
    tail = tail.substr(0, q);
  }
  path = std::string(tail);
}

}  // namespace

bool is_ip_literal(std::string_view host) {
  if (host.empty()) return false;
  if (host.front() == '[') return true;
  int dots = 0;
  for (char c : host) {
    if (c == '.') {
      ++dots;
    } else if (!std::isdigit(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return dots == 3;
}

bool is_valid_hostname(std::string_view host) {
  if (host.empty() || host.size() > 253) return false;
  if (is_ip_literal(host)) return true;
  for (auto label : split(host, '.')) {
    if (label.empty() || label.size() > 63) return false;
    if (label.front() == '-' || label.back() == '-') return false;
    for (char c : label) {
      auto u = static_cast<unsigned char>(c);
      if (!(std::isalnum(u) || c == '-' || c == '_' || u >= 0x80)) return false;
    }
  }
  return true;
}

std::optional<Url> Url::parse(std::string_view text) {
  text = trim(text);
  auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  if (!std::isalpha(static_cast<unsigned char>(text.front()))) return std::nullopt;
  for (char c : text.substr(0, colon)) {
    if (!is_scheme_char(c)) return std::nullopt;
  }
  Url url;
  url.scheme = to_lower(text.substr(0, colon));
  auto rest = text.substr(colon + 1);
  if (rest.substr(0, 2) != "//") return std::nullopt;
  rest.remove_prefix(2);

  auto authority_end = rest.find_first_of("/?#");
  auto authority = rest.substr(0, authority_end);
  auto tail = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);

  std::string_view host = authority;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = authority.substr(0, close + 1);
    auto after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') return std::nullopt;
      authority = after;
    } else {
      authority = {};
    }
  } else if (auto pc = authority.rfind(':'); pc != std::string_view::npos) {
    host = authority.substr(0, pc);
    authority = authority.substr(pc);
  } else {
    authority = {};
  }
  if (!authority.empty()) {
    auto digits = authority.substr(1);
    if (!digits.empty()) {
      unsigned value = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (ec != std::errc{} || ptr != digits.data() + digits.size() || value > 65535) {
        return std::nullopt;
      }
      url.port = static_cast<std::uint16_t>(value);
    }
  }
  url.host = to_lower(host);
  if (!url.host.empty() && url.host.back() == '.') url.host.pop_back();
  if (!is_valid_hostname(url.host)) return std::nullopt;

  split_tail(tail, url.path, url.query, url.fragment);
  if (url.path.empty()) url.path = "/";
  url.path = remove_dot_segments(url.path);
  if (url.path.empty()) url.path = "/";
  return url;
}

std::uint16_t Url::effective_port() const {
  if (port) return *port;
  return scheme == "https" ? 443 : 80;
}

std::string Url::origin() const {
  std::string out = scheme + "://" + host;
  if (port && *port != (scheme == "https" ? 443 : 80)) out += ":" + std::to_string(*port);
  return out;
}

std::string Url::path_and_query() const {
  return query ? path + "?" + *query : path;
}

std::string Url::str() const {
  std::string out = origin() + path_and_query();
  if (fragment) out += "#" + *fragment;
  return out;
}

std::optional<Url> resolve_url(const Url& base, std::string_view reference) {
  reference = trim(reference);
  // Scheme present: absolute reference.
  auto colon = reference.find(':');
  auto first_delim = reference.find_first_of("/?#");
  if (colon != std::string_view::npos && colon > 0 &&
      (first_delim == std::string_view::npos || colon < first_delim)) {
    bool scheme_ok = std::isalpha(static_cast<unsigned char>(reference.front()));
    for (char c : reference.substr(0, colon)) scheme_ok = scheme_ok && is_scheme_char(c);
    if (scheme_ok) return Url::parse(reference);
  }
  if (reference.substr(0, 2) == "//") return Url::parse(base.scheme + ":" + std::string(reference));

  Url out = base;
  out.fragment.reset();
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
  split_tail(reference, path, query, fragment);
  out.fragment = fragment;
  if (path.empty()) {
    if (query) out.query = query;
    return out;
  }
  out.query = query;
  out.path = path.front() == '/' ? remove_dot_segments(path) : remove_dot_segments(merge_paths(base, path));
  if (out.path.empty()) out.path = "/";
  return out;
}

}  // namespace hintscope
