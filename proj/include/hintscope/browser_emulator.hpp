#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hintscope/registry.hpp"

namespace hintscope {

enum class Platform { desktop, ios, android };
std::string_view to_string(Platform platform);

/// A browser/platform's client hint behaviour: which hints it will send
/// once granted, which it sends unsolicited, and the values it sends.
struct BrowserProfile {
  std::string name;  // e.g. "chrome-116-desktop"
  std::string browser;
  std::string version;
  Platform platform = Platform::desktop;
  std::string user_agent;
  HintSet supported;
  HintSet default_low_entropy;
  std::map<HintId, std::string> value_table;
};

class ProfileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ProfileCatalog {
 public:
  /// Loads `{"profiles": [...]}`. Throws ProfileError when a hint name is
  /// unknown to `registry` or the default set is not a subset of the
  /// supported set.
  static ProfileCatalog from_json(std::string_view text,
                                  const HintRegistry& registry = HintRegistry::builtin());
  static const ProfileCatalog& builtin();

  /// Exact name, or a version-less alias such as "chrome-desktop".
  const BrowserProfile* find(std::string_view name) const;
  std::vector<std::string> names() const;
  const std::vector<BrowserProfile>& profiles() const { return profiles_; }

 private:
  std::vector<BrowserProfile> profiles_;
};

/// Per-origin Accept-CH grants held by one simulated client session.
class GrantCache {
 public:
  GrantCache();

  std::uint64_t session_id() const { return session_id_; }
  const HintSet& grants(std::string_view origin) const;
  bool empty() const { return grants_.empty(); }

  void set(std::string origin, HintSet granted);

 private:
  std::uint64_t session_id_;
  std::map<std::string, HintSet, std::less<>> grants_;
};

/// Records a received Accept-CH for `origin`. The newest header replaces the
/// origin's grant set; unsupported and unrecognized tokens are dropped.
GrantCache receive_accept_ch(const BrowserProfile& profile, GrantCache cache, std::string_view origin,
                             const ParsedAcceptCh& parsed);

/// Client hint request headers the profile sends to `origin`. Throws
/// ProfileError("profile value gap: ...") when a hint lacks a value.
std::map<std::string, std::string> request_headers(const BrowserProfile& profile,
                                                   const GrantCache& cache, std::string_view origin,
                                                   const HintRegistry& registry = HintRegistry::builtin());

/// Returns an empty cache with a fresh session id.
GrantCache reset_session(const GrantCache& cache);

}  // namespace hintscope
