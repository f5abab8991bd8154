#include "hintscope/crawl_engine.hpp"

#include <atomic>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "hintscope/html_scan.hpp"
#include "hintscope/log.hpp"
#include "hintscope/text.hpp"

namespace hintscope {

namespace {

bool is_redirect(int status) {
  return status == 301 || status == 302 || status == 303 || status == 307 || status == 308;
}

std::size_t approx_wire_bytes(const HttpResponse& resp) {
  std::size_t n = resp.body.size() + 16;
  for (const auto& [k, v] : resp.headers) n += k.size() + v.size() + 4;
  return n;
}

std::string hex(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return out;
}

}  // namespace

void validate(const CrawlConfig& config) {
  if (config.concurrency < 1) throw std::invalid_argument("concurrency must be >= 1");
  if (!(config.throughput_cap > 0)) throw std::invalid_argument("throughput cap must be > 0");
  if (config.max_redirects < 0) throw std::invalid_argument("max redirects must be >= 0");
}

std::vector<CrawlTarget> parse_targets(std::string_view text) {
  std::vector<CrawlTarget> out;
  for (auto line : data_lines(text)) {
    auto f = split_csv(line);
    for (auto& s : f) s = std::string(trim(s));
    if (f.size() < 3) throw std::invalid_argument("target line needs rank,domain,url: " + std::string(line));
    CrawlTarget t;
    if (!f[0].empty()) {
      try {
        t.rank = std::stol(f[0]);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad rank in target line: " + std::string(line));
      }
    }
    t.domain = f[1];
    t.url = f[2];
    if (f.size() == 4) {
      auto kind = parse_page_kind(f[3]);
      if (!kind) throw std::invalid_argument("bad page kind in target line: " + std::string(line));
      t.page_kind = *kind;
    } else if (f.size() == 5) {
      if (t.url == "none") continue;
      t.page_kind = PageKind::login;
    } else if (f.size() != 3) {
      throw std::invalid_argument("unrecognized target line: " + std::string(line));
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ThirdPartyRef> extract_third_party_domains(std::string_view body, const Url& base_url,
                                                       std::string_view target_domain,
                                                       const PublicSuffixList& psl) {
  std::vector<ThirdPartyRef> out;
  auto scan = scan_html(body);
  if (!scan.parsed) {
    log::warn("unparseable body at " + base_url.str());
    return out;
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& res : scan.resources) {
    auto url = resolve_url(base_url, res.url);
    if (!url || (url->scheme != "https" && url->scheme != "http")) continue;
    auto domain = psl.try_registrable_domain(url->host);
    if (!domain || *domain == target_domain) continue;
    url->fragment.reset();
    auto resource = url->str();
    if (seen.emplace(*domain, resource).second) out.push_back({*domain, std::move(resource)});
  }
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    // Unbiased draw from [0, i) by rejection.
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(perm[i - 1], perm[r % bound]);
  }
  return perm;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["run_id"] = run_id;
  j["seed"] = seed;
  j["started"] = format_timestamp(started);
  j["finished"] = format_timestamp(finished);
  j["vantage"] = {{"region", config.vantage.region}, {"isp", config.vantage.isp}};
  j["config"] = {{"concurrency", config.concurrency},
                 {"throughput_cap_bytes_per_s", config.throughput_cap},
                 {"ethics_mode", config.ethics_mode},
                 {"fetch_third_parties", config.fetch_third_parties},
                 {"user_agent_profile", config.user_agent_profile},
                 {"timeout_ms", config.timeout.count()},
                 {"max_redirects", config.max_redirects},
                 {"retries", config.ethics_mode ? 0 : config.retries}};
  j["targets"] = targets;
  j["records"] = records;
  j["errors"] = errors;
  j["bytes"] = bytes;
  j["test_transport"] = test_transport;
  return j.dump(2) + "\n";
}

Crawler::Crawler(CrawlConfig config, Transport& transport, const BrowserProfile& profile,
                 const HintRegistry& registry, const PublicSuffixList& psl)
    : config_(std::move(config)),
      transport_(transport),
      profile_(profile),
      registry_(registry),
      psl_(psl),
      limiter_((validate(config_), config_.throughput_cap)) {
  if (config_.run_id) {
    run_id_ = *config_.run_id;
  } else {
    auto t = std::chrono::duration_cast<std::chrono::seconds>(now().time_since_epoch()).count();
    run_id_ = "run-" + hex(config_.order_seed ^ static_cast<std::uint64_t>(t)).substr(8);
  }
}

std::chrono::sys_seconds Crawler::now() const {
  if (config_.fixed_time) return *config_.fixed_time;
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

Crawler::ChainResult Crawler::fetch_chain(const Url& url, GrantCache& session) {
  ChainResult out;
  out.final_url = url;
  Url current = url;
  for (int hop = 0;; ++hop) {
    RequestHeaders headers = request_headers(profile_, session, current.origin(), registry_);
    if (!profile_.user_agent.empty()) headers["User-Agent"] = profile_.user_agent;
    headers["Accept"] = "text/html,application/xhtml+xml,*/*;q=0.8";

    HttpResponse resp;
    int attempts = config_.ethics_mode ? 1 : 1 + std::max(0, config_.retries);
    for (int a = 0; a < attempts; ++a) {
      try {
        resp = transport_.get(current, headers);
        out.error.reset();
        break;
      } catch (const TransportError& e) {
        out.error = e.tag();
      }
    }
    if (out.error) {
      out.status.reset();
      return out;
    }
    limiter_.consume(approx_wire_bytes(resp));
    out.status = resp.status;
    out.final_url = current;

    auto values = resp.header_values("accept-ch");
    if (!values.empty()) {
      auto parsed = registry_.parse_accept_ch(values);
      session = receive_accept_ch(profile_, std::move(session), current.origin(), parsed);
      if (!out.accept_ch) out.accept_ch = std::move(parsed);
    }

    auto location = resp.header("location");
    if (is_redirect(resp.status) && location) {
      if (hop >= config_.max_redirects) {
        out.error = "too-many-redirects";
        return out;
      }
      auto next = resolve_url(current, *location);
      if (!next) {
        out.error = "invalid-url";
        return out;
      }
      current = *next;
      continue;
    }
    out.body = std::move(resp.body);
    return out;
  }
}

CrawlRecord Crawler::crawl_one(const CrawlTarget& target) {
  CrawlRecord rec;
  rec.run_id = run_id_;
  rec.rank = target.rank;
  rec.target_domain = psl_.try_registrable_domain(target.domain).value_or(to_lower(target.domain));
  rec.url = target.url;
  rec.page_kind = target.page_kind;
  rec.vantage = config_.vantage;
  rec.timestamp = now();
  rec.test_transport = transport_.test_override();

  auto url = Url::parse(target.url);
  if (!url || url->scheme != "https") {
    rec.error = "invalid-url";
    return rec;
  }
  GrantCache session;
  auto chain = fetch_chain(*url, session);
  rec.status = chain.status;
  rec.error = chain.error;
  rec.accept_ch = std::move(chain.accept_ch);

  if (config_.fetch_third_parties && !chain.error && !chain.body.empty()) {
    for (auto& ref : extract_third_party_domains(chain.body, chain.final_url, rec.target_domain, psl_)) {
      ThirdPartyObservation obs;
      obs.domain = std::move(ref.domain);
      obs.resource_url = std::move(ref.resource_url);
      if (auto tp_url = Url::parse(obs.resource_url)) {
        auto tp = fetch_chain(*tp_url, session);
        obs.status = tp.status;
        obs.error = tp.error;
        obs.accept_ch = std::move(tp.accept_ch);
      } else {
        obs.error = "invalid-url";
      }
      rec.third_parties.push_back(std::move(obs));
    }
  }
  return rec;
}

RunManifest Crawler::crawl_batch(const std::vector<CrawlTarget>& targets, const RecordSink& sink) {
  RunManifest manifest;
  manifest.run_id = run_id_;
  manifest.seed = config_.order_seed;
  manifest.config = config_;
  manifest.started = now();
  manifest.targets = targets.size();
  manifest.test_transport = transport_.test_override();

  auto order = seeded_permutation(targets.size(), config_.order_seed);
  std::atomic<std::size_t> next{0};
  std::mutex sink_mutex;
  auto worker = [&] {
    for (;;) {
      auto i = next.fetch_add(1);
      if (i >= order.size()) return;
      const auto& target = targets[order[i]];
      CrawlRecord rec;
      try {
        rec = crawl_one(target);
      } catch (const std::exception& e) {
        log::warn("crawl of " + target.url + " failed: " + e.what());
        rec.run_id = run_id_;
        rec.rank = target.rank;
        rec.target_domain = to_lower(target.domain);
        rec.url = target.url;
        rec.page_kind = target.page_kind;
        rec.vantage = config_.vantage;
        rec.timestamp = now();
        rec.error = "internal";
      }
      std::lock_guard lock(sink_mutex);
      ++manifest.records;
      if (!rec.ok()) ++manifest.errors;
      sink(rec);
    }
  };
  auto workers = std::min<std::size_t>(config_.concurrency, targets.size());
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  pool.clear();
  manifest.finished = now();
  manifest.bytes = limiter_.total_bytes();
  return manifest;
}

}  // namespace hintscope
