#include "hintscope/browser_emulator.hpp"

#include <algorithm>
#include <atomic>
#include <iterator>

#include <json.hpp>

#include "hintscope/embedded_data.hpp"
#include "hintscope/text.hpp"

namespace hintscope {

namespace {

std::atomic<std::uint64_t> next_session_id{1};

std::string normalize_origin(std::string_view origin) {
  auto o = to_lower(trim(origin));
  while (!o.empty() && o.back() == '/') o.pop_back();
  return o;
}

HintSet resolve_names(const nlohmann::json& names, const HintRegistry& registry,
                      const std::string& profile) {
  HintSet out;
  for (const auto& n : names) {
    const auto* d = registry.find(n.get<std::string>());
    if (!d) throw ProfileError("profile " + profile + " names unknown hint " + n.get<std::string>());
    out.insert(d->id);
  }
  return out;
}

}  // namespace

std::string_view to_string(Platform platform) {
  switch (platform) {
    case Platform::desktop: return "desktop";
    case Platform::ios: return "ios";
    case Platform::android: return "android";
  }
  return "unknown";
}

ProfileCatalog ProfileCatalog::from_json(std::string_view text, const HintRegistry& registry) {
  ProfileCatalog catalog;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ProfileError(std::string("profile file: ") + e.what());
  }
  for (const auto& p : doc.at("profiles")) {
    BrowserProfile profile;
    profile.name = p.at("name").get<std::string>();
    profile.browser = p.value("browser", "");
    profile.version = p.value("version", "");
    auto platform = p.value("platform", "desktop");
    if (platform == "desktop") {
      profile.platform = Platform::desktop;
    } else if (platform == "ios") {
      profile.platform = Platform::ios;
    } else if (platform == "android") {
      profile.platform = Platform::android;
    } else {
      throw ProfileError("profile " + profile.name + ": unknown platform " + platform);
    }
    profile.user_agent = p.value("user_agent", "");
    profile.supported = resolve_names(p.value("supported", nlohmann::json::array()), registry, profile.name);
    profile.default_low_entropy =
        resolve_names(p.value("default", nlohmann::json::array()), registry, profile.name);
    if (!std::includes(profile.supported.begin(), profile.supported.end(),
                       profile.default_low_entropy.begin(), profile.default_low_entropy.end())) {
      throw ProfileError("profile " + profile.name + ": default hints must be supported");
    }
    const auto values = p.value("values", nlohmann::json::object());
    for (const auto& [name, value] : values.items()) {
      const auto* d = registry.find(name);
      if (!d) throw ProfileError("profile " + profile.name + " has value for unknown hint " + name);
      if (!profile.supported.contains(d->id)) {
        throw ProfileError("profile " + profile.name + " has value for unsupported hint " + name);
      }
      profile.value_table.emplace(d->id, value.get<std::string>());
    }
    if (catalog.find(profile.name)) throw ProfileError("duplicate profile " + profile.name);
    catalog.profiles_.push_back(std::move(profile));
  }
  return catalog;
}

const ProfileCatalog& ProfileCatalog::builtin() {
  static const ProfileCatalog catalog = from_json(embedded::browser_profiles_json());
  return catalog;
}

const BrowserProfile* ProfileCatalog::find(std::string_view name) const {
  auto wanted = to_lower(trim(name));
  for (const auto& p : profiles_) {
    if (p.name == wanted) return &p;
  }
  const BrowserProfile* alias = nullptr;
  for (const auto& p : profiles_) {
    if (p.browser + "-" + std::string(to_string(p.platform)) == wanted) {
      if (alias) return nullptr;  // ambiguous
      alias = &p;
    }
  }
  return alias;
}

std::vector<std::string> ProfileCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& p : profiles_) out.push_back(p.name);
  return out;
}

GrantCache::GrantCache() : session_id_(next_session_id.fetch_add(1)) {}

const HintSet& GrantCache::grants(std::string_view origin) const {
  static const HintSet empty;
  auto it = grants_.find(normalize_origin(origin));
  return it == grants_.end() ? empty : it->second;
}

void GrantCache::set(std::string origin, HintSet granted) {
  grants_[normalize_origin(origin)] = std::move(granted);
}

GrantCache receive_accept_ch(const BrowserProfile& profile, GrantCache cache, std::string_view origin,
                             const ParsedAcceptCh& parsed) {
  HintSet granted;
  std::set_intersection(parsed.recognized.begin(), parsed.recognized.end(), profile.supported.begin(),
                        profile.supported.end(), std::inserter(granted, granted.end()));
  cache.set(std::string(origin), std::move(granted));
  return cache;
}

std::map<std::string, std::string> request_headers(const BrowserProfile& profile,
                                                   const GrantCache& cache, std::string_view origin,
                                                   const HintRegistry& registry) {
  std::map<std::string, std::string> out;
  if (profile.supported.empty()) return out;
  HintSet send = profile.default_low_entropy;
  const auto& granted = cache.grants(origin);
  send.insert(granted.begin(), granted.end());
  for (auto id : send) {
    auto it = profile.value_table.find(id);
    if (it == profile.value_table.end()) {
      throw ProfileError("profile value gap: " + profile.name + " has no value for " +
                         registry.at(id).header_name);
    }
    out.emplace(registry.at(id).header_name, it->second);
  }
  return out;
}

GrantCache reset_session(const GrantCache&) { return GrantCache{}; }

}  // namespace hintscope
