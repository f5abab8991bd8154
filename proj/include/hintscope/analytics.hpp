#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hintscope/crawl_record.hpp"
#include "hintscope/dataset_store.hpp"
#include "hintscope/registry.hpp"
#include "hintscope/stats.hpp"

namespace hintscope {

using ProfileFilter = std::function<bool(const SiteProfile&)>;

struct HintFrequencyRow {
  std::string hint;
  std::size_t count = 0;
  double share = 0.0;  // of the filtered profile set
};

/// Sites (not requests) whose union hint set contains each hint, descending
/// by count, ties by header name. Hints with zero sites are omitted.
std::vector<HintFrequencyRow> hint_frequency(const std::vector<SiteProfile>& profiles,
                                             const HintRegistry& registry = HintRegistry::builtin(),
                                             const ProfileFilter& filter = {});

inline const std::vector<long> kDefaultRankBuckets{1000, 5000, 10000, 100000, 1000000, 8000000};

struct AdoptionRow {
  long threshold = 0;
  std::size_t sites = 0;
  std::size_t first_party = 0;
  double first_party_pct = 0.0;
  /// Present when third parties were included.
  std::optional<std::size_t> third_party;
  std::optional<double> third_party_pct;
  /// First party or third party.
  std::optional<std::size_t> with_third_party;
  std::optional<double> with_third_party_pct;
};

/// Cumulative buckets (rank <= threshold). A site adopts when its own pages
/// request at least one counted hint; it has third-party adoption when some
/// third party it embeds does. Buckets without sites are omitted.
std::vector<AdoptionRow> adoption_by_rank_bucket(const std::vector<SiteProfile>& profiles,
                                                 const std::vector<long>& buckets = kDefaultRankBuckets,
                                                 bool include_third_party = true,
                                                 const HintRegistry& registry = HintRegistry::builtin(),
                                                 const CountingRules& rules = {});

struct PageKindDiff {
  /// Both page kinds fetched successfully and at least one requests hints.
  std::size_t compared = 0;
  /// Missing a successful fetch of one page kind.
  std::size_t excluded = 0;
  /// Both kinds fetched, neither requests hints.
  std::size_t both_silent = 0;
  std::size_t identical = 0;
  std::size_t different = 0;
  std::size_t login_silent = 0;
  double identical_pct = 0.0;
  double different_pct = 0.0;
  double login_silent_among_different_pct = 0.0;
  /// Hint counts over the compared pages that request at least one hint.
  std::optional<SummaryStats> start_stats;
  std::optional<SummaryStats> login_stats;
};

PageKindDiff page_kind_diff(const std::vector<SiteProfile>& profiles,
                            const HintRegistry& registry = HintRegistry::builtin(),
                            const CountingRules& rules = {});

struct AdoptionPoint {
  std::string month;  // YYYY-MM
  std::string bucket;  // threshold or "all"
  std::size_t sites = 0;
  std::size_t adopting = 0;
  double pct = 0.0;
};

/// Start-page adoption per calendar month and rank bucket. A domain adopts
/// in a month when any of its successful records that month requests a
/// counted hint. Months without records are absent.
std::vector<AdoptionPoint> adoption_over_time(const std::vector<CrawlRecord>& records,
                                              const std::vector<long>& buckets = kDefaultRankBuckets,
                                              const HintRegistry& registry = HintRegistry::builtin(),
                                              const CountingRules& rules = {});

struct InterconnectionGraph {
  std::set<std::string> sites;
  std::map<std::string, HintLevel> third_parties;
  std::set<std::pair<std::string, std::string>> edges;  // (site, third party)

  /// `site,third_party,level` rows with a header line.
  std::string edge_list_csv() const;
  std::string to_dot() const;
};

/// Bipartite site/third-party graph restricted to third parties that
/// request hints. With `page_kind` set only that kind's observations count.
InterconnectionGraph build_interconnection_graph(const std::vector<SiteProfile>& profiles,
                                                 const HintRegistry& registry = HintRegistry::builtin(),
                                                 std::optional<PageKind> page_kind = std::nullopt);

struct HintTest {
  StatResult omnibus;
  std::vector<StatResult> pairwise;
};

struct GroupComparison {
  std::vector<std::string> groups;
  std::vector<HintTest> tests;
  std::vector<std::string> notes;  // skipped tests
};

/// Groups x {requests, does not request} chi-squared tests, per hint or on
/// "any hint". Omnibus p-values are Bonferroni-adjusted over the tests that
/// ran; omnibus results with p < alpha get pairwise 2x2 follow-ups, adjusted
/// by the number of pairs. Profiles without a group label are ignored.
/// Throws StatsError with fewer than two non-empty groups.
GroupComparison group_comparison(const std::vector<SiteProfile>& profiles,
                                 const std::map<std::string, std::string>& grouping, bool per_hint,
                                 double alpha = 0.05,
                                 const HintRegistry& registry = HintRegistry::builtin());

struct VantageCount {
  Vantage vantage;
  std::size_t sites = 0;
  std::size_t adopting = 0;
};

/// Distinct target domains and adopting domains per vantage label.
std::vector<VantageCount> per_vantage_counts(const std::vector<CrawlRecord>& records,
                                             const HintRegistry& registry = HintRegistry::builtin(),
                                             const CountingRules& rules = {});

struct MisspellingRow {
  std::string token;
  std::size_t sites = 0;
  std::optional<std::string> suggestion;
};

/// Unrecognized Accept-CH tokens by number of sites, with the registry name
/// they most likely meant.
std::vector<MisspellingRow> misspelling_report(const std::vector<SiteProfile>& profiles,
                                               const HintRegistry& registry = HintRegistry::builtin(),
                                               std::size_t top_n = 50);

std::optional<std::string> suggest_hint_name(std::string_view token, const HintRegistry& registry);

struct LevelRow {
  std::string category;
  std::size_t sites = 0;
  /// Count per max level, index = HintLevel, plus sites with none.
  std::array<std::size_t, kHintLevelCount> by_level{};
  std::size_t none = 0;
};

/// Distribution of per-site max level by category ("uncategorized" when
/// categories are absent). A site with several categories counts in each.
std::vector<LevelRow> level_by_category(const std::vector<SiteProfile>& profiles);

}  // namespace hintscope
