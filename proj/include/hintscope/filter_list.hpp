#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hintscope/public_suffix.hpp"

namespace hintscope {

/// Network filter in adblock syntax. Only the URL-matching subset is
/// supported: `||host^` anchors, `|` start/end anchors, `*` and `^`.
struct FilterRule {
  enum class Kind { domain_anchor, plain_substring };

  Kind kind = Kind::plain_substring;
  /// Lowercased pattern without the `@@`, `||`/`|` prefixes, trailing `|`
  /// and options.
  std::string pattern;
  bool exception = false;
  bool start_anchor = false;  // plain rules beginning with '|'
  bool end_anchor = false;    // rules ending with '|'
  std::string text;           // original line
  std::size_t line = 0;

  bool operator==(const FilterRule&) const = default;
};

struct SkippedFilterLine {
  std::size_t line = 0;
  std::string text;
  std::string reason;  // "comment", "cosmetic", "regex", "unsupported-option", "empty-pattern"
};

struct FilterParseReport {
  std::vector<FilterRule> rules;
  std::vector<SkippedFilterLine> skipped;
};

FilterParseReport load_filter_list(std::string_view text);

/// True when `rule` matches `url` (lowercased absolute URL), ignoring
/// whether it is an exception.
bool rule_matches(const FilterRule& rule, std::string_view url);

struct TrackerVerdict {
  std::string domain;  // registrable domain of the URL host
  bool is_tracker = false;
  std::optional<FilterRule> matched_rule;
};

/// Immutable, indexed rule set. Safe for concurrent matching.
class FilterSet {
 public:
  FilterSet() = default;
  explicit FilterSet(std::vector<FilterRule> rules,
                     const PublicSuffixList& psl = PublicSuffixList::builtin());

  static FilterSet from_text(std::string_view text,
                             const PublicSuffixList& psl = PublicSuffixList::builtin());

  /// A URL is a tracker when some blocking rule matches and no exception
  /// rule does. `matched_rule` is the lexicographically smallest matching
  /// blocking rule so the verdict is independent of list order.
  TrackerVerdict match(std::string_view url) const;

  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }

 private:
  void candidates(std::string_view host, std::vector<std::size_t>& out) const;

  std::vector<FilterRule> rules_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_host_;
  std::vector<std::size_t> unindexed_;
  const PublicSuffixList* psl_ = &PublicSuffixList::builtin();
};

TrackerVerdict match_tracker(std::string_view url, const FilterSet& rules);

}  // namespace hintscope
