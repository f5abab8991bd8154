#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hintscope/category_provider.hpp"
#include "hintscope/crawl_record.hpp"
#include "hintscope/filter_list.hpp"
#include "hintscope/public_suffix.hpp"
#include "hintscope/registry.hpp"

namespace hintscope {

enum class RbaStatus { rba, no_rba, unknown };
std::string_view to_string(RbaStatus status);
std::optional<RbaStatus> parse_rba_status(std::string_view text);

/// Everything known about one registrable domain after aggregating its
/// crawl records.
struct SiteProfile {
  std::string domain;
  std::optional<long> rank;
  /// Recognized hints per page kind, unioned over all successful records.
  std::map<PageKind, HintSet> hints_by_page_kind;
  /// Page kinds with at least one successful fetch.
  std::set<PageKind> page_kinds_ok;
  std::optional<HintLevel> max_level;
  std::optional<std::vector<std::string>> categories;
  RbaStatus rba_status = RbaStatus::unknown;
  /// Observed third parties matched by the filter list.
  std::vector<std::string> tracker_linked_third_parties;
  /// Per page kind: third-party domain -> hints it requested (possibly none).
  std::map<PageKind, std::map<std::string, HintSet>> third_party_hints;
  /// Unrecognized Accept-CH tokens seen on this site's own pages, lowercased.
  std::set<std::string> unrecognized_tokens;
  std::set<Vantage> vantages;

  HintSet all_hints() const;
  /// Third parties that requested at least one hint, any page kind.
  std::map<std::string, HintSet> requesting_third_parties() const;
  void recompute_max_level(const HintRegistry& registry);

  bool operator==(const SiteProfile&) const = default;
};

/// Folds `from` into `into` (same domain): sets are unioned, labels kept
/// from `into` when present.
void merge_profile(SiteProfile& into, const SiteProfile& from, const HintRegistry& registry);

struct ProfileBuildReport {
  std::vector<SiteProfile> profiles;  // sorted by domain
  std::size_t records = 0;
  std::size_t failed_records = 0;
  /// Login records whose URL is not on the target's registrable domain.
  std::size_t login_domain_mismatches = 0;
};

ProfileBuildReport build_profiles(const std::vector<CrawlRecord>& records,
                                  const HintRegistry& registry = HintRegistry::builtin(),
                                  const FilterSet* trackers = nullptr,
                                  const PublicSuffixList& psl = PublicSuffixList::builtin());

/// Names of the fields to read from external archive rows (JSON objects,
/// one per line).
struct FieldMap {
  std::string url = "url";
  std::string timestamp = "timestamp";
  std::string headers = "headers";
  std::string accept_ch_header = "accept-ch";
  std::string status = "status";  // optional field
  std::string rank = "rank";      // optional field
  std::string run_id = "archive";
  Vantage vantage{"archive", "archive"};
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t emitted = 0;
  std::size_t skipped = 0;
  std::vector<std::string> skip_reasons;  // first few only
};

/// Converts header-dump rows into start-page CrawlRecords. Rows without a
/// usable url, timestamp or header block are skipped and counted.
/// `headers` may be an object (name -> value or list of values) or an array
/// of {"name", "value"} objects; names match case-insensitively.
IngestReport ingest_archive(std::istream& in, const FieldMap& map,
                            const std::function<void(CrawlRecord)>& sink,
                            const HintRegistry& registry = HintRegistry::builtin(),
                            const PublicSuffixList& psl = PublicSuffixList::builtin());

struct AlignedPair {
  std::string domain;
  SiteProfile a;
  SiteProfile b;
};

/// Pairs profiles whose registrable domains occur in both inputs. Profiles
/// are collapsed to their registrable domain first; duplicates within one
/// input are merged with a warning. Output sorted by domain.
std::vector<AlignedPair> align_datasets(const std::vector<SiteProfile>& a,
                                        const std::vector<SiteProfile>& b,
                                        const HintRegistry& registry = HintRegistry::builtin(),
                                        const PublicSuffixList& psl = PublicSuffixList::builtin());

/// Domain -> 1-based rank. Accepts `rank,domain` lines or bare domains, in
/// which case the line position is the rank.
std::map<std::string, long> parse_rank_list(std::string_view text);
/// `domain,status` lines, status one of rba, no-rba, unknown.
std::map<std::string, RbaStatus> parse_rba_labels(std::string_view text);

struct LabelSources {
  const std::map<std::string, long>* ranks = nullptr;
  CategoryProvider* categories = nullptr;
  const std::map<std::string, RbaStatus>* rba = nullptr;
};

/// Attaches external labels. Ranks already on a profile are replaced only
/// when the rank list has the domain. Category failures leave categories
/// absent and log a warning.
void join_labels(std::vector<SiteProfile>& profiles, const LabelSources& sources);

}  // namespace hintscope
