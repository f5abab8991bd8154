#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hintscope/public_suffix.hpp"
#include "hintscope/transport.hpp"
#include "hintscope/url.hpp"

namespace hintscope {

/// Lowercase words that indicate (positive) or contra-indicate (negative)
/// a login link.
struct IndicatorSet {
  std::vector<std::string> positive;
  std::vector<std::string> negative;

  /// `[positive]` / `[negative]` sections, one word per line, '#' comments.
  static IndicatorSet from_text(std::string_view text);
  static const IndicatorSet& builtin();
};

enum class CandidateSource { anchor_tag, path_probe, search_provider };
std::string_view to_string(CandidateSource source);
std::optional<CandidateSource> parse_candidate_source(std::string_view text);

struct LoginCandidate {
  std::string url;
  std::string text;
  CandidateSource source = CandidateSource::anchor_tag;
  std::size_t position = 0;
  int score = 0;

  bool operator==(const LoginCandidate&) const = default;
};

struct FetchedPage {
  int status = 0;
  std::string body;
  Url final_url;
};

/// Fetch capability used by discovery.
class PageFetcher {
 public:
  virtual ~PageFetcher() = default;
  virtual FetchedPage fetch(const Url& url) = 0;
};

/// Follows redirects over a Transport with a fixed header set.
class TransportPageFetcher final : public PageFetcher {
 public:
  TransportPageFetcher(Transport& transport, RequestHeaders headers, int max_redirects = 10)
      : transport_(transport), headers_(std::move(headers)), max_redirects_(max_redirects) {}
  FetchedPage fetch(const Url& url) override;

 private:
  Transport& transport_;
  RequestHeaders headers_;
  int max_redirects_;
};

struct SearchResult {
  std::string url;
  std::string text;
};

/// Optional last-resort source of candidates, e.g. a site-restricted web
/// search for "login".
class SearchProvider {
 public:
  virtual ~SearchProvider() = default;
  virtual std::vector<SearchResult> search(std::string_view domain) = 0;
};

class NullSearchProvider final : public SearchProvider {
 public:
  std::vector<SearchResult> search(std::string_view) override { return {}; }
};

struct DiscoveryOptions {
  std::optional<std::size_t> max_anchors;
  std::optional<std::size_t> max_search_results;
  bool probe_login_path = true;
};

class DiscoveryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Candidate list in order: page anchors, the /login probe (when it answers
/// 200), then search results. Only https candidates are kept. Throws
/// DiscoveryError when the start page cannot be fetched.
std::vector<LoginCandidate> collect_candidates(const Url& start_url, PageFetcher& fetcher,
                                               SearchProvider* search,
                                               const DiscoveryOptions& options = {});

/// Positive component in {0,1,2,3} plus negative component in {0,-1,-2,-3}:
/// 3 for a match in both text and URL, 2 for URL only, 1 for text only.
int score_candidate(const LoginCandidate& candidate, const IndicatorSet& indicators);

/// Highest score, earliest position on ties; nullopt when nothing scores
/// above zero.
std::optional<LoginCandidate> select_best(std::span<const LoginCandidate> candidates);

/// Registrable domain of the login URL host equals that of `tranco_domain`.
bool validate_login_domain(std::string_view login_url, std::string_view tranco_domain,
                           const PublicSuffixList& psl = PublicSuffixList::builtin());

struct DiscoveryResult {
  std::optional<long> rank;
  std::string domain;
  std::optional<LoginCandidate> login;
  std::size_t candidates = 0;
  std::optional<std::string> error;
};

/// Runs collection, scoring and selection for one domain. Fetch failures
/// of the start page are reported in `error`, never thrown.
DiscoveryResult discover_login(std::optional<long> rank, std::string_view domain, PageFetcher& fetcher,
                               SearchProvider* search, const IndicatorSet& indicators,
                               const DiscoveryOptions& options = {});

/// `rank,domain,login_url|none,score,source`
std::string format_discovery_line(const DiscoveryResult& result);

}  // namespace hintscope
