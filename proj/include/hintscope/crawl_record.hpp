#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hintscope/registry.hpp"

namespace hintscope {

enum class PageKind { start, login };
std::string_view to_string(PageKind kind);
std::optional<PageKind> parse_page_kind(std::string_view text);

struct Vantage {
  std::string region;
  std::string isp;

  std::string label() const { return region + "/" + isp; }
  auto operator<=>(const Vantage&) const = default;
};

struct ThirdPartyObservation {
  std::string domain;  // registrable domain
  std::string resource_url;
  std::optional<int> status;
  std::optional<std::string> error;
  std::optional<ParsedAcceptCh> accept_ch;

  bool operator==(const ThirdPartyObservation&) const = default;
};

/// One crawl observation of a top-level page.
struct CrawlRecord {
  std::string run_id;
  std::optional<long> rank;
  std::string target_domain;  // registrable domain of the crawled site
  std::string url;
  PageKind page_kind = PageKind::start;
  Vantage vantage;
  std::chrono::sys_seconds timestamp{};
  std::optional<int> status;
  std::optional<std::string> error;  // transport-error tag
  /// From the first response in the redirect chain that carried Accept-CH.
  std::optional<ParsedAcceptCh> accept_ch;
  std::vector<ThirdPartyObservation> third_parties;
  /// Set when the record was produced over the loopback test transport.
  bool test_transport = false;

  bool ok() const { return !error && status && *status < 400; }
  bool operator==(const CrawlRecord&) const = default;
};

std::string format_timestamp(std::chrono::sys_seconds t);
/// ISO 8601 "YYYY-MM-DDTHH:MM:SSZ" (fractional seconds and offsets accepted)
/// or integer epoch seconds.
std::optional<std::chrono::sys_seconds> parse_timestamp(std::string_view text);

}  // namespace hintscope
