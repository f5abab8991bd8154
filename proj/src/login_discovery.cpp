#include "hintscope/login_discovery.hpp"

#include "hintscope/embedded_data.hpp"
#include "hintscope/html_scan.hpp"
#include "hintscope/log.hpp"
#include "hintscope/text.hpp"

namespace hintscope {

namespace {

// 3 = text and URL, 2 = URL only, 1 = text only.
int match_strength(const std::vector<std::string>& words, std::string_view lowered_url,
                   std::string_view text) {
  bool in_url = false;
  bool in_text = false;
  for (const auto& w : words) {
    in_url = in_url || lowered_url.find(w) != std::string_view::npos;
    in_text = in_text || icontains(text, w);
  }
  if (in_url && in_text) return 3;
  if (in_url) return 2;
  if (in_text) return 1;
  return 0;
}

bool is_redirect(int status) {
  return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

}  // namespace

IndicatorSet IndicatorSet::from_text(std::string_view text) {
  IndicatorSet set;
  std::vector<std::string>* section = nullptr;
  for (auto line : data_lines(text)) {
    if (line == "[positive]") {
      section = &set.positive;
    } else if (line == "[negative]") {
      section = &set.negative;
    } else if (section) {
      section->push_back(to_lower(line));
    } else {
      throw std::invalid_argument("indicator word outside a section: " + std::string(line));
    }
  }
  if (set.positive.empty() || set.negative.empty()) {
    throw std::invalid_argument("indicator file needs positive and negative words");
  }
  return set;
}

const IndicatorSet& IndicatorSet::builtin() {
  static const IndicatorSet set = from_text(embedded::indicators_txt());
  return set;
}

std::string_view to_string(CandidateSource source) {
  switch (source) {
    case CandidateSource::anchor_tag: return "anchor-tag";
    case CandidateSource::path_probe: return "path-probe";
    case CandidateSource::search_provider: return "search-provider";
  }
  return "unknown";
}

std::optional<CandidateSource> parse_candidate_source(std::string_view text) {
  if (text == "anchor-tag") return CandidateSource::anchor_tag;
  if (text == "path-probe") return CandidateSource::path_probe;
  if (text == "search-provider") return CandidateSource::search_provider;
  return std::nullopt;
}

FetchedPage TransportPageFetcher::fetch(const Url& url) {
  Url current = url;
  for (int hop = 0;; ++hop) {
    auto resp = transport_.get(current, headers_);
    auto location = resp.header("location");
    if (!is_redirect(resp.status) || !location || hop >= max_redirects_) {
      return {resp.status, std::move(resp.body), current};
    }
    auto next = resolve_url(current, *location);
    if (!next) return {resp.status, std::move(resp.body), current};
    current = *next;
  }
}

std::vector<LoginCandidate> collect_candidates(const Url& start_url, PageFetcher& fetcher,
                                               SearchProvider* search, const DiscoveryOptions& options) {
  std::vector<LoginCandidate> out;
  auto add = [&out](std::optional<Url> url, std::string text, CandidateSource source) {
    if (!url || url->scheme != "https") return;
    url->fragment.reset();
    out.push_back({url->str(), std::move(text), source, out.size(), 0});
  };

  FetchedPage page;
  try {
    page = fetcher.fetch(start_url);
  } catch (const TransportError& e) {
    throw DiscoveryError(start_url.str() + ": " + e.tag() + ": " + e.what());
  }
  if (page.status >= 400 || page.status == 0) {
    throw DiscoveryError(start_url.str() + ": HTTP status " + std::to_string(page.status));
  }
  auto scan = scan_html(page.body);
  std::size_t anchors = 0;
  for (const auto& a : scan.anchors) {
    if (options.max_anchors && anchors >= *options.max_anchors) break;
    if (a.href.empty() || a.href.front() == '#') continue;
    ++anchors;
    add(resolve_url(page.final_url, a.href), a.text, CandidateSource::anchor_tag);
  }

  if (options.probe_login_path) {
    Url probe = start_url;
    probe.path = "/login";
    probe.query.reset();
    probe.fragment.reset();
    try {
      auto resp = fetcher.fetch(probe);
      if (resp.status == 200) add(probe, scan_html(resp.body).title.value_or(""), CandidateSource::path_probe);
    } catch (const TransportError&) {
      // probe candidate simply absent
    }
  }

  if (search) {
    std::size_t taken = 0;
    for (auto& r : search->search(start_url.host)) {
      if (options.max_search_results && taken >= *options.max_search_results) break;
      ++taken;
      add(Url::parse(r.url), std::move(r.text), CandidateSource::search_provider);
    }
  }
  return out;
}

int score_candidate(const LoginCandidate& candidate, const IndicatorSet& indicators) {
  auto url = to_lower(candidate.url);
  return match_strength(indicators.positive, url, candidate.text) -
         match_strength(indicators.negative, url, candidate.text);
}

std::optional<LoginCandidate> select_best(std::span<const LoginCandidate> candidates) {
  const LoginCandidate* best = nullptr;
  for (const auto& c : candidates) {
    if (!best || c.score > best->score || (c.score == best->score && c.position < best->position)) {
      best = &c;
    }
  }
  if (!best || best->score <= 0) return std::nullopt;
  return *best;
}

bool validate_login_domain(std::string_view login_url, std::string_view tranco_domain,
                           const PublicSuffixList& psl) {
  auto url = Url::parse(login_url);
  auto login_domain = url ? psl.try_registrable_domain(url->host) : std::nullopt;
  auto site_domain = psl.try_registrable_domain(tranco_domain);
  if (!login_domain || !site_domain) {
    log::warn("cannot compare login domain " + std::string(login_url) + " with " + std::string(tranco_domain));
    return false;
  }
  return *login_domain == *site_domain;
}

DiscoveryResult discover_login(std::optional<long> rank, std::string_view domain, PageFetcher& fetcher,
                               SearchProvider* search, const IndicatorSet& indicators,
                               const DiscoveryOptions& options) {
  DiscoveryResult result;
  result.rank = rank;
  result.domain = std::string(domain);
  auto start = Url::parse("https://" + std::string(domain) + "/");
  if (!start) {
    result.error = "invalid domain";
    return result;
  }
  try {
    auto candidates = collect_candidates(*start, fetcher, search, options);
    for (auto& c : candidates) c.score = score_candidate(c, indicators);
    result.candidates = candidates.size();
    result.login = select_best(candidates);
  } catch (const DiscoveryError& e) {
    result.error = e.what();
  }
  return result;
}

std::string format_discovery_line(const DiscoveryResult& result) {
  std::string line = result.rank ? std::to_string(*result.rank) : "";
  line += "," + csv_escape(result.domain) + ",";
  if (result.login) {
    line += csv_escape(result.login->url) + "," + std::to_string(result.login->score) + "," +
            std::string(to_string(result.login->source));
  } else {
    line += result.error ? "none,,error" : "none,,";
  }
  return line;
}

}  // namespace hintscope
