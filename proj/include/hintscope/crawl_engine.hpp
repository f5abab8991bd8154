#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hintscope/browser_emulator.hpp"
#include "hintscope/crawl_record.hpp"
#include "hintscope/public_suffix.hpp"
#include "hintscope/rate_limiter.hpp"
#include "hintscope/registry.hpp"
#include "hintscope/transport.hpp"

namespace hintscope {

struct CrawlConfig {
  unsigned concurrency = 6;
  /// Aggregate bytes per second across all workers (5 Mbit/s).
  double throughput_cap = 625000.0;
  std::uint64_t order_seed = 0;
  /// One top-level request per target, no retries, nothing kept from bodies
  /// beyond extracted URLs.
  bool ethics_mode = true;
  bool fetch_third_parties = true;
  std::string user_agent_profile = "chrome-116-desktop";
  std::chrono::milliseconds timeout{30000};
  int max_redirects = 10;
  /// Extra attempts after a transport error; ignored in ethics mode.
  int retries = 0;
  Vantage vantage{"unspecified", "unspecified"};
  std::optional<std::string> run_id;
  /// Stamp every record with this instant instead of the wall clock.
  std::optional<std::chrono::sys_seconds> fixed_time;
};

void validate(const CrawlConfig& config);

struct CrawlTarget {
  std::optional<long> rank;
  std::string domain;
  std::string url;
  PageKind page_kind = PageKind::login;
};

/// Parses `rank,domain,url,page_kind` lines, or discovery output lines
/// (`rank,domain,login_url|none,score,source`, taken as login pages;
/// `none` rows are skipped). '#' comments and blank lines are ignored.
std::vector<CrawlTarget> parse_targets(std::string_view text);

struct ThirdPartyRef {
  std::string domain;
  std::string resource_url;

  bool operator==(const ThirdPartyRef&) const = default;
};

/// Subresource references (script/img/link/iframe/source) whose registrable
/// domain differs from `target_domain`, deduplicated, in document order.
std::vector<ThirdPartyRef> extract_third_party_domains(
    std::string_view body, const Url& base_url, std::string_view target_domain,
    const PublicSuffixList& psl = PublicSuffixList::builtin());

/// Fisher-Yates permutation of [0, n) driven by a seeded mt19937_64.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

struct RunManifest {
  std::string run_id;
  std::uint64_t seed = 0;
  CrawlConfig config;
  std::chrono::sys_seconds started{};
  std::chrono::sys_seconds finished{};
  std::size_t targets = 0;
  std::size_t records = 0;
  std::size_t errors = 0;
  std::uint64_t bytes = 0;
  bool test_transport = false;

  std::string to_json() const;
};

using RecordSink = std::function<void(const CrawlRecord&)>;

class Crawler {
 public:
  Crawler(CrawlConfig config, Transport& transport, const BrowserProfile& profile,
          const HintRegistry& registry = HintRegistry::builtin(),
          const PublicSuffixList& psl = PublicSuffixList::builtin());

  /// Crawls one page in a fresh session (empty grant cache, no cookies).
  CrawlRecord crawl_one(const CrawlTarget& target);

  /// Visits targets in a seeded random order with at most `concurrency`
  /// targets in flight. Records reach `sink` one at a time as they
  /// complete. Failures of individual targets never abort the batch.
  RunManifest crawl_batch(const std::vector<CrawlTarget>& targets, const RecordSink& sink);

  const std::string& run_id() const { return run_id_; }

 private:
  struct ChainResult {
    std::optional<int> status;
    std::optional<std::string> error;
    std::optional<ParsedAcceptCh> accept_ch;
    std::string body;
    Url final_url;
  };

  ChainResult fetch_chain(const Url& url, GrantCache& session);
  std::chrono::sys_seconds now() const;

  CrawlConfig config_;
  Transport& transport_;
  const BrowserProfile& profile_;
  const HintRegistry& registry_;
  const PublicSuffixList& psl_;
  ByteRateLimiter limiter_;
  std::string run_id_;
};

}  // namespace hintscope
