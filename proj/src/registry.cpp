#include "hintscope/registry.hpp"

#include <algorithm>
#include <array>

#include "hintscope/embedded_data.hpp"
#include "hintscope/text.hpp"

namespace hintscope {

namespace {

constexpr std::array<std::string_view, kHintLevelCount> kLevelNames = {
    "very low", "low", "medium", "high", "very high"};

std::string normalize_label(std::string_view text) {
  std::string out = to_lower(trim(text));
  std::replace(out.begin(), out.end(), '_', ' ');
  std::replace(out.begin(), out.end(), '-', ' ');
  return out;
}

}  // namespace

std::string_view to_string(HintLevel level) {
  return kLevelNames.at(static_cast<std::size_t>(level));
}

std::optional<HintLevel> parse_level(std::string_view text) {
  auto norm = normalize_label(text);
  for (std::size_t i = 0; i < kLevelNames.size(); ++i) {
    if (norm == kLevelNames[i]) return static_cast<HintLevel>(i);
  }
  return std::nullopt;
}

std::string_view to_string(HintGroup group) {
  switch (group) {
    case HintGroup::user_agent: return "user-agent";
    case HintGroup::user_preference_media: return "user-preference-media";
    case HintGroup::device_information: return "device-information";
    case HintGroup::network: return "network";
  }
  return "unknown";
}

std::optional<HintGroup> parse_group(std::string_view text) {
  auto norm = normalize_label(text);
  if (norm == "user agent") return HintGroup::user_agent;
  if (norm == "user preference media") return HintGroup::user_preference_media;
  if (norm == "device information") return HintGroup::device_information;
  if (norm == "network") return HintGroup::network;
  return std::nullopt;
}

std::string_view to_string(HintStatus status) {
  switch (status) {
    case HintStatus::valid: return "valid";
    case HintStatus::experimental: return "experimental";
    case HintStatus::deprecated: return "deprecated";
  }
  return "unknown";
}

std::optional<HintStatus> parse_status(std::string_view text) {
  auto norm = normalize_label(text);
  if (norm == "valid") return HintStatus::valid;
  if (norm == "experimental") return HintStatus::experimental;
  if (norm == "deprecated") return HintStatus::deprecated;
  return std::nullopt;
}

HintRegistry HintRegistry::from_csv(std::string_view text) {
  HintRegistry reg;
  for (auto line : data_lines(text)) {
    auto fields = split_csv(line);
    if (fields.size() != 5) {
      throw RegistryError("registry row needs 5 fields: " + std::string(line));
    }
    HintDescriptor d;
    d.header_name = std::string(trim(fields[0]));
    d.friendly_name = std::string(trim(fields[1]));
    auto group = parse_group(fields[2]);
    auto level = parse_level(fields[3]);
    auto status = parse_status(fields[4]);
    if (d.header_name.empty() || !group || !level || !status) {
      throw RegistryError("malformed registry row: " + std::string(line));
    }
    d.group = *group;
    d.level = *level;
    d.status = *status;
    d.id = HintId{static_cast<std::uint16_t>(reg.hints_.size())};
    auto [_, inserted] = reg.by_lower_name_.emplace(to_lower(d.header_name), d.id);
    if (!inserted) throw RegistryError("duplicate registry header: " + d.header_name);
    reg.hints_.push_back(std::move(d));
  }
  return reg;
}

const HintRegistry& HintRegistry::builtin() {
  static const HintRegistry reg = from_csv(embedded::registry_csv());
  return reg;
}

const HintDescriptor* HintRegistry::find(std::string_view header_name) const {
  auto it = by_lower_name_.find(to_lower(trim(header_name)));
  return it == by_lower_name_.end() ? nullptr : &hints_[it->second.value];
}

ParsedAcceptCh HintRegistry::parse_accept_ch(std::span<const std::string> header_values) const {
  ParsedAcceptCh out;
  std::set<std::string> seen_unrecognized;
  for (const auto& value : header_values) {
    out.raw.push_back(value);
    for (auto token : split(value, ',')) {
      token = trim(token);
      if (token.empty()) continue;
      if (const auto* d = find(token)) {
        out.recognized.insert(d->id);
      } else if (seen_unrecognized.insert(to_lower(token)).second) {
        out.unrecognized.emplace_back(token);
      }
    }
  }
  return out;
}

ParsedAcceptCh HintRegistry::parse_accept_ch(std::string_view header_value) const {
  std::string v(header_value);
  return parse_accept_ch(std::span<const std::string>(&v, 1));
}

std::optional<TokenClass> HintRegistry::classify_token(std::string_view token,
                                                       const CountingRules& rules) const {
  const auto* d = find(token);
  if (!d) return std::nullopt;
  return TokenClass{d, d->status, rules.counts(d->status)};
}

std::optional<HintLevel> HintRegistry::max_level(const HintSet& hints) const {
  std::optional<HintLevel> best;
  for (auto id : hints) {
    auto level = at(id).level;
    if (!best || level > *best) best = level;
  }
  return best;
}

HintSet HintRegistry::counted(const HintSet& hints, const CountingRules& rules) const {
  HintSet out;
  for (auto id : hints) {
    if (rules.counts(at(id).status)) out.insert(id);
  }
  return out;
}

std::string HintRegistry::serialize(const ParsedAcceptCh& parsed) const {
  std::string out;
  auto append = [&out](std::string_view s) {
    if (!out.empty()) out += ", ";
    out += s;
  };
  for (auto id : parsed.recognized) append(at(id).header_name);
  for (const auto& tok : parsed.unrecognized) append(tok);
  return out;
}

std::vector<std::string> HintRegistry::names(const HintSet& hints) const {
  std::vector<std::string> out;
  out.reserve(hints.size());
  for (auto id : hints) out.push_back(at(id).header_name);
  return out;
}

}  // namespace hintscope
