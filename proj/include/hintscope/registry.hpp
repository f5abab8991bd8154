#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hintscope {

/// Ordinal rating of how much distinguishing information a hint reveals.
enum class HintLevel : std::uint8_t { very_low = 0, low, medium, high, very_high };

inline constexpr int kHintLevelCount = 5;

std::string_view to_string(HintLevel level);
/// Accepts "very high", "very-high", "very_high" in any case.
std::optional<HintLevel> parse_level(std::string_view text);

enum class HintGroup : std::uint8_t { user_agent, user_preference_media, device_information, network };
std::string_view to_string(HintGroup group);
std::optional<HintGroup> parse_group(std::string_view text);

enum class HintStatus : std::uint8_t { valid, experimental, deprecated };
std::string_view to_string(HintStatus status);
std::optional<HintStatus> parse_status(std::string_view text);

/// Index of a descriptor within the registry that produced it.
struct HintId {
  std::uint16_t value = 0;
  auto operator<=>(const HintId&) const = default;
};

using HintSet = std::set<HintId>;

struct HintDescriptor {
  HintId id;
  std::string header_name;
  std::string friendly_name;
  HintGroup group = HintGroup::user_agent;
  HintLevel level = HintLevel::very_low;
  HintStatus status = HintStatus::valid;
};

/// Which registry statuses count as "valid" when tallying adoption.
/// Experimental and valid hints always count.
struct CountingRules {
  bool deprecated_counts_as_valid = true;

  bool counts(HintStatus status) const {
    return status != HintStatus::deprecated || deprecated_counts_as_valid;
  }
};

struct TokenClass {
  const HintDescriptor* descriptor = nullptr;
  HintStatus status = HintStatus::valid;
  bool counts_as_valid = true;
};

/// Result of parsing one or more Accept-CH field values.
struct ParsedAcceptCh {
  HintSet recognized;
  /// Tokens not in the registry, in first-seen order with original casing.
  std::vector<std::string> unrecognized;
  std::vector<std::string> raw;

  bool empty() const { return recognized.empty() && unrecognized.empty(); }
  bool operator==(const ParsedAcceptCh&) const = default;
};

class RegistryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HintRegistry {
 public:
  /// Parses `header_name,friendly_name,group,level,status` rows. Lines
  /// starting with '#' are comments. Throws RegistryError on bad rows or
  /// duplicate header names.
  static HintRegistry from_csv(std::string_view text);

  /// The shipped registry.
  static const HintRegistry& builtin();

  std::span<const HintDescriptor> descriptors() const { return hints_; }
  std::size_t size() const { return hints_.size(); }
  const HintDescriptor& at(HintId id) const { return hints_.at(id.value); }

  /// Case-insensitive lookup.
  const HintDescriptor* find(std::string_view header_name) const;

  ParsedAcceptCh parse_accept_ch(std::span<const std::string> header_values) const;
  ParsedAcceptCh parse_accept_ch(std::string_view header_value) const;

  std::optional<TokenClass> classify_token(std::string_view token,
                                           const CountingRules& rules = {}) const;

  std::optional<HintLevel> max_level(const HintSet& hints) const;

  /// Subset of `hints` that counts as valid under `rules`.
  HintSet counted(const HintSet& hints, const CountingRules& rules) const;

  /// Comma-joined normal form: recognized names in registry order, then
  /// unrecognized tokens.
  std::string serialize(const ParsedAcceptCh& parsed) const;

  std::vector<std::string> names(const HintSet& hints) const;

 private:
  std::vector<HintDescriptor> hints_;
  std::unordered_map<std::string, HintId> by_lower_name_;
};

}  // namespace hintscope
